#include "sfnet/metrics.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>

namespace sfnet {

namespace {

void require_nonempty(std::span<const double> v) {
    if (v.empty()) throw std::invalid_argument("metrics: empty residual list");
}

double population_variance(std::span<const double> v) {
    double m = 0.0;
    for (double x : v) m += x;
    m /= static_cast<double>(v.size());
    double acc = 0.0;
    for (double x : v) acc += (x - m) * (x - m);
    return acc / static_cast<double>(v.size());
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

}  // namespace

double mae(std::span<const double> residuals) {
    require_nonempty(residuals);
    double acc = 0.0;
    for (double a : residuals) acc += std::fabs(a);
    return acc / static_cast<double>(residuals.size());
}

double rmse(std::span<const double> residuals) {
    require_nonempty(residuals);
    double acc = 0.0;
    for (double a : residuals) acc += a * a;
    return std::sqrt(acc / static_cast<double>(residuals.size()));
}

double medae(std::span<const double> residuals) {
    require_nonempty(residuals);
    std::vector<double> abs(residuals.size());
    for (size_t i = 0; i < residuals.size(); ++i) abs[i] = std::fabs(residuals[i]);
    std::sort(abs.begin(), abs.end());
    const size_t n = abs.size();
    if (n % 2 == 1) return abs[n / 2];
    return 0.5 * (abs[n / 2 - 1] + abs[n / 2]);
}

double variance_score(std::span<const double> y_true, std::span<const double> y_pred) {
    if (y_true.size() != y_pred.size())
        throw std::invalid_argument("variance_score: length mismatch");
    if (y_true.size() < 2) throw std::invalid_argument("variance_score: need at least 2 samples");
    const double var_true = population_variance(y_true);
    if (!(var_true > 0.0)) throw std::invalid_argument("variance_score: constant y_true");
    std::vector<double> residual(y_true.size());
    for (size_t i = 0; i < y_true.size(); ++i) residual[i] = y_true[i] - y_pred[i];
    return 1.0 - population_variance(residual) / var_true;
}

std::pair<MetricsReport, ResidualDump> evaluate(const FusionModel<float>& model,
                                                const DatasetManifest& manifest, Split split,
                                                Mask mask, const NormStats& stats,
                                                int64_t batch_size) {
    BatchLoader loader(manifest, split, batch_size, model.config.image_size, stats);
    ResidualDump dump;
    std::vector<double> y_true, y_pred;
    for (const auto& batch_idx : loader.epoch_batches(nullptr)) {
        Batch batch = loader.load(batch_idx);
        auto [rgb, depth] = mask_modality(batch.rgb, batch.depth, mask);
        const ForwardResult<float> out = forward(model, rgb, depth);
        for (size_t i = 0; i < batch_idx.size(); ++i) {
            const SampleRecord& rec = manifest.records[size_t(batch_idx[i])];
            const double t = static_cast<double>(batch.omega(static_cast<int64_t>(i), 0));
            const double p = static_cast<double>(out.omega(static_cast<int64_t>(i), 0));
            y_true.push_back(t);
            y_pred.push_back(p);
            dump.rows.push_back(ResidualRow{rec.id, t, p, t - p});
        }
    }
    std::vector<double> residuals(y_true.size());
    for (size_t i = 0; i < y_true.size(); ++i) residuals[i] = y_true[i] - y_pred[i];

    MetricsReport report;
    report.model_name = model.config.profile;
    report.mask = mask;
    report.n = static_cast<int64_t>(y_true.size());
    report.mae = mae(residuals);
    report.rmse = rmse(residuals);
    report.medae = medae(residuals);
    report.vs = variance_score(y_true, y_pred);
    return {std::move(report), std::move(dump)};
}

TimingStats bench_inference(const FusionModel<float>& model, int64_t batch, int64_t warmup,
                            int64_t iters, uint64_t seed) {
    if (batch < 1 || iters < 1) throw std::invalid_argument("bench_inference: batch and iters must be >= 1");
    Rng rng(seed);
    const int64_t s = model.config.image_size;
    const Tensor rgb = rand_normal<float>(rng, {batch, 3, s, s}, 0.0, 1.0);
    const Tensor depth = rand_normal<float>(rng, {batch, 1, s, s}, 0.0, 1.0);

    for (int64_t i = 0; i < warmup; ++i) (void)forward(model, rgb, depth);

    std::vector<double> ms(static_cast<size_t>(iters));
    for (int64_t i = 0; i < iters; ++i) {
        const auto t0 = std::chrono::steady_clock::now();
        const ForwardResult<float> out = forward(model, rgb, depth);
        const auto t1 = std::chrono::steady_clock::now();
        (void)out;
        ms[size_t(i)] = std::chrono::duration<double, std::milli>(t1 - t0).count();
    }

    TimingStats t;
    t.batch = batch;
    t.iters = iters;
    double mean = 0.0;
    for (double v : ms) mean += v;
    mean /= static_cast<double>(iters);
    t.mean_ms_per_batch = mean;
    t.std_ms_per_batch = std::sqrt(population_variance(ms));
    t.min_ms_per_batch = *std::min_element(ms.begin(), ms.end());
    t.mean_ms_per_inference = mean / static_cast<double>(batch);
    return t;
}

void write_report_csv(const std::string& path, const std::vector<MetricsReport>& reports) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error(path + ": cannot open for writing");
    out << "model,mask,n,mae,rmse,medae,vs,ms_per_batch_mean,ms_per_batch_std,ms_per_inference\n";
    for (const MetricsReport& r : reports) {
        out << r.model_name << ',' << to_string(r.mask) << ',' << r.n << ',' << fmt(r.mae) << ','
            << fmt(r.rmse) << ',' << fmt(r.medae) << ',' << fmt(r.vs) << ',';
        if (r.timing)
            out << fmt(r.timing->mean_ms_per_batch) << ',' << fmt(r.timing->std_ms_per_batch)
                << ',' << fmt(r.timing->mean_ms_per_inference);
        else
            out << ",,";
        out << '\n';
    }
}

void write_residuals_csv(const std::string& path, const ResidualDump& dump) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error(path + ": cannot open for writing");
    out << "id,omega_true,omega_pred,residual\n";
    for (const ResidualRow& row : dump.rows)
        out << row.id << ',' << fmt(row.omega_true) << ',' << fmt(row.omega_pred) << ','
            << fmt(row.residual) << '\n';
}

std::string format_report_line(const MetricsReport& r) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "%-14s %-6s n=%-5lld MAEx1e3=%-9.3f RMSEx1e3=%-9.3f "
                  "MedAEx1e3=%-9.3f VS=%.4f",
                  r.model_name.c_str(), to_string(r.mask), static_cast<long long>(r.n),
                  r.mae * 1e3, r.rmse * 1e3, r.medae * 1e3, r.vs);
    return buf;
}

}  // namespace sfnet

#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sfnet/dataset.hpp"
#include "sfnet/model.hpp"

namespace sfnet {

// Regression metrics over residuals a = omega_true - omega_pred, all in
// rad/s except the dimensionless variance score.

double mae(std::span<const double> residuals);
double rmse(std::span<const double> residuals);
double medae(std::span<const double> residuals);

/// Explained variance: 1 - Var(y_true - y_pred) / Var(y_true), population
/// variances. 1.0 is perfect; the score is blind to constant offsets.
double variance_score(std::span<const double> y_true, std::span<const double> y_pred);

struct TimingStats {
    double mean_ms_per_batch = 0.0;
    double std_ms_per_batch = 0.0;   // population convention
    double min_ms_per_batch = 0.0;
    double mean_ms_per_inference = 0.0;  // batch mean / batch size
    int64_t batch = 0;
    int64_t iters = 0;
};

struct MetricsReport {
    std::string model_name;
    Mask mask = Mask::None;
    int64_t n = 0;
    double mae = 0.0;
    double rmse = 0.0;
    double medae = 0.0;
    double vs = 0.0;
    std::optional<TimingStats> timing;
};

struct ResidualRow {
    std::string id;
    double omega_true;
    double omega_pred;
    double residual;  // omega_true - omega_pred
};

struct ResidualDump {
    std::vector<ResidualRow> rows;
};

/// Runs the model over one split in manifest order (batches of 5 by
/// default), with the requested modality zeroed, and reduces to the four
/// metrics plus the per-sample residual dump.
std::pair<MetricsReport, ResidualDump> evaluate(const FusionModel<float>& model,
                                                const DatasetManifest& manifest, Split split,
                                                Mask mask, const NormStats& stats,
                                                int64_t batch_size = 5);

/// Wall-clock forward-pass timing on fixed random normalized inputs.
/// Warmup iterations are excluded; per-inference time is the batch time
/// divided by the batch size. Normalization preprocessing is not included.
TimingStats bench_inference(const FusionModel<float>& model, int64_t batch = 5,
                            int64_t warmup = 10, int64_t iters = 100, uint64_t seed = 42);

void write_report_csv(const std::string& path, const std::vector<MetricsReport>& reports);
void write_residuals_csv(const std::string& path, const ResidualDump& dump);

/// Human-readable table row; error metrics shown x10^3.
std::string format_report_line(const MetricsReport& report);

}  // namespace sfnet

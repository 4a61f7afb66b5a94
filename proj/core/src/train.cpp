#include "sfnet/train.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "sfnet/loss.hpp"
#include "sfnet/optimizer.hpp"

namespace sfnet {

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

}  // namespace

double validate(const FusionModel<float>& model, const BatchLoader& loader, double huber_delta) {
    double total = 0.0;
    int64_t count = 0;
    for (const auto& batch_idx : loader.epoch_batches(nullptr)) {
        const Batch batch = loader.load(batch_idx);
        const ForwardResult<float> out = forward(model, batch.rgb, batch.depth);
        const HuberResult<float> loss = huber_loss(out.omega, batch.omega, huber_delta);
        total += loss.loss * static_cast<double>(batch_idx.size());
        count += static_cast<int64_t>(batch_idx.size());
    }
    return total / static_cast<double>(count);
}

TrainResult train(FusionModel<float>& model, const DatasetManifest& manifest,
                  const NormStats& stats, const TrainOptions& opts, std::ostream* progress) {
    const bool gated = model.config.fusion == FusionKind::Gated;
    BatchLoader train_loader(manifest, Split::Train, opts.batch_train, model.config.image_size,
                             stats);
    BatchLoader val_loader(manifest, Split::Val, opts.batch_val, model.config.image_size, stats);

    auto params = model.parameters();
    AdamConfig adam_cfg;
    adam_cfg.lr = opts.lr;
    AdamState<float> adam = AdamState<float>::init(adam_cfg, params);
    Rng shuffle_rng(Rng::derive(opts.seed, 0x747261696eull));  // training shuffle stream

    TrainResult result;
    result.best_val_loss = std::numeric_limits<double>::infinity();

    auto save = [&](int64_t epoch) {
        if (opts.checkpoint_path.empty()) return;
        Checkpoint ck = checkpoint_from_model(model, stats, epoch, shuffle_rng.state());
        save_checkpoint(opts.checkpoint_path, ck);
    };

    for (int64_t epoch = 1; epoch <= opts.epochs; ++epoch) {
        const auto t0 = std::chrono::steady_clock::now();
        double train_total = 0.0;
        double gate_rgb_total = 0.0, gate_depth_total = 0.0;
        int64_t seen = 0;

        for (const auto& batch_idx : train_loader.epoch_batches(&shuffle_rng)) {
            const Batch batch = train_loader.load(batch_idx);
            ForwardResult<float> out =
                forward(model, batch.rgb, batch.depth, /*want_cache=*/true,
                        /*record_gates=*/gated);
            const HuberResult<float> loss = huber_loss(out.omega, batch.omega, opts.huber_delta);
            if (!std::isfinite(loss.loss))
                throw std::runtime_error("train: non-finite loss at epoch " +
                                         std::to_string(epoch) + ", batch starting with sample " +
                                         manifest.records[size_t(batch_idx[0])].id);
            const auto grads = backward(model, out.cache, loss.grad_pred);
            adam_step(adam, params, grads);

            const auto n = static_cast<double>(batch_idx.size());
            train_total += loss.loss * n;
            seen += static_cast<int64_t>(batch_idx.size());
            if (gated && out.gate_record) {
                gate_rgb_total += out.gate_record->mean_rgb * n;
                gate_depth_total += out.gate_record->mean_depth * n;
            }
        }

        TrainLogRow row;
        row.epoch = epoch;
        row.train_loss = train_total / static_cast<double>(seen);
        row.val_loss = validate(model, val_loader, opts.huber_delta);
        if (gated) {
            row.w_rgb_mean = gate_rgb_total / static_cast<double>(seen);
            row.w_depth_mean = gate_depth_total / static_cast<double>(seen);
        }
        row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        result.log.push_back(row);

        if (progress) {
            (*progress) << "epoch " << epoch << "/" << opts.epochs << "  train " << fmt(row.train_loss)
                        << "  val " << fmt(row.val_loss);
            if (row.w_rgb_mean)
                (*progress) << "  w_rgb " << fmt(*row.w_rgb_mean) << "  w_depth "
                            << fmt(*row.w_depth_mean);
            (*progress) << "  (" << fmt(row.seconds) << " s)\n";
        }

        if (row.val_loss < result.best_val_loss) {
            result.best_val_loss = row.val_loss;
            result.best_epoch = epoch;
            if (opts.save_best) save(epoch);
        }
    }

    if (!opts.save_best) save(opts.epochs);
    if (!opts.log_path.empty()) write_train_log_csv(opts.log_path, result.log);
    return result;
}

void write_train_log_csv(const std::string& path, const std::vector<TrainLogRow>& log) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error(path + ": cannot open for writing");
    out << "epoch,train_loss,val_loss,w_rgb_mean,w_depth_mean,seconds\n";
    for (const TrainLogRow& row : log) {
        out << row.epoch << ',' << fmt(row.train_loss) << ',' << fmt(row.val_loss) << ',';
        if (row.w_rgb_mean) out << fmt(*row.w_rgb_mean);
        out << ',';
        if (row.w_depth_mean) out << fmt(*row.w_depth_mean);
        out << ',' << fmt(row.seconds) << '\n';
    }
}

}  // namespace sfnet

#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "sfnet/checkpoint.hpp"
#include "sfnet/dataset.hpp"
#include "sfnet/model.hpp"

namespace sfnet {

struct TrainOptions {
    int64_t epochs = 200;
    double lr = 1e-4;
    double huber_delta = 1.0;  // rad/s
    int64_t batch_train = 10;
    int64_t batch_val = 5;
    uint64_t seed = 42;
    bool save_best = false;        // default: save the final epoch
    std::string checkpoint_path;   // empty: no checkpoint written
    std::string log_path;          // empty: no CSV written
};

struct TrainLogRow {
    int64_t epoch = 0;
    double train_loss = 0.0;
    double val_loss = 0.0;
    std::optional<double> w_rgb_mean;    // gated models only
    std::optional<double> w_depth_mean;
    double seconds = 0.0;
};

struct TrainResult {
    std::vector<TrainLogRow> log;
    double best_val_loss = 0.0;
    int64_t best_epoch = 0;
};

/// Epoch loop: shuffled training batches (forward, Huber, backward, Adam
/// step per batch), then a full frozen validation pass. Gated models log
/// the epoch's mean gate weights. A non-finite loss aborts with a
/// diagnostic. With epochs == 0 the model is returned unchanged and the
/// log is empty (a checkpoint of the initial parameters is still written
/// when a path is configured).
TrainResult train(FusionModel<float>& model, const DatasetManifest& manifest,
                  const NormStats& stats, const TrainOptions& options,
                  std::ostream* progress = nullptr);

/// Mean validation loss with parameters frozen.
double validate(const FusionModel<float>& model, const BatchLoader& loader, double huber_delta);

void write_train_log_csv(const std::string& path, const std::vector<TrainLogRow>& log);

}  // namespace sfnet

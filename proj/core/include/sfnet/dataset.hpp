#pragma once

#include <array>
#include <string>
#include <vector>

#include "sfnet/tensor.hpp"
#include "sfnet/world.hpp"

namespace sfnet {

enum class Split { Train, Val, Test };

const char* to_string(Split s);
Split split_from_string(const std::string& s);

/// One dataset entry as indexed by manifest.csv; image paths are relative
/// to the manifest's directory.
struct SampleRecord {
    std::string id;
    std::string rgb_path;
    std::string depth_path;
    float omega = 0.0f;  // rad/s, on the 0.1 grid in [-0.3, 0.3]
    Split split = Split::Train;
};

struct DatasetManifest {
    std::string root_dir;
    std::vector<SampleRecord> records;

    std::vector<int32_t> split_indices(Split split) const;
    int64_t split_size(Split split) const;
};

/// Per-channel normalization statistics (rgb_r, rgb_g, rgb_b, depth),
/// computed on the training split only. Color channels are on the 0-1
/// scale; depth is in meters.
struct NormStats {
    std::array<double, 4> mean{};
    std::array<double, 4> std{};
};

/// Split sizing: val and test each get floor(n/5); train takes the rest.
struct SplitSizes {
    int64_t train, val, test;
};
SplitSizes split_sizes(int64_t n_samples);

/// Generates a seeded synthetic dataset under out_dir: PPM/PGM image
/// pairs, manifest.csv and norm.csv. Byte-identical for identical
/// (seed, n_samples, difficulty).
DatasetManifest generate_dataset(uint64_t seed, int64_t n_samples, const std::string& out_dir,
                                 int difficulty = 1);

DatasetManifest load_manifest(const std::string& dir);
void write_manifest(const DatasetManifest& manifest);

NormStats compute_norm_stats(const DatasetManifest& manifest);
NormStats read_norm_csv(const std::string& path);
void write_norm_csv(const std::string& path, const NormStats& stats);

/// Loads norm.csv next to the manifest, computing and writing it when
/// missing.
NormStats load_or_compute_norm_stats(const DatasetManifest& manifest);

/// Raw sample decoded to the 0-1 color / meter depth scale.
struct DecodedSample {
    Tensor rgb;    // [3,S,S] stored as rank-4 [1,3,S,S]
    Tensor depth;  // [1,1,S,S]
};

/// Reads one sample, box-averages it down to image_size (the stored
/// resolution must be an integer multiple) and standardizes it with the
/// given statistics.
DecodedSample load_normalized_sample(const DatasetManifest& manifest, const SampleRecord& rec,
                                     int64_t image_size, const NormStats& stats);

struct Batch {
    Tensor rgb;    // [N,3,S,S]
    Tensor depth;  // [N,1,S,S]
    Tensor omega;  // [N,1]
    std::vector<int32_t> indices;
};

/// Batched, normalized access to one split. Training epochs reshuffle
/// with the caller's seeded rng; passing no rng keeps manifest order
/// (validation/test). The final short batch is kept. Decoded samples are
/// cached in memory when the whole split fits a small budget.
class BatchLoader {
public:
    BatchLoader(const DatasetManifest& manifest, Split split, int64_t batch_size,
                int64_t image_size, NormStats stats);

    int64_t sample_count() const { return static_cast<int64_t>(indices_.size()); }
    int64_t batch_size() const { return batch_size_; }
    int64_t image_size() const { return image_size_; }
    const NormStats& stats() const { return stats_; }

    /// Index groups for one epoch; shuffled when rng is non-null.
    std::vector<std::vector<int32_t>> epoch_batches(Rng* shuffle_rng) const;

    Batch load(const std::vector<int32_t>& manifest_indices) const;

private:
    const DatasetManifest* manifest_;
    std::vector<int32_t> indices_;  // manifest indices of this split, manifest order
    int64_t batch_size_;
    int64_t image_size_;
    NormStats stats_;
    // Decoded cache keyed by manifest index; empty when the split is too
    // large to pin in memory.
    mutable std::vector<DecodedSample> cache_;
    mutable std::vector<char> cached_;
    bool use_cache_ = false;
};

}  // namespace sfnet

#include "sfnet/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "sfnet/image_io.hpp"

namespace fs = std::filesystem;

namespace sfnet {

namespace {

constexpr double kEpisodeDt = 0.2;       // seconds
constexpr int kEpisodeMaxSteps = 200;
constexpr double kCollisionDistance = 0.25;  // meters

std::string sample_id(int64_t index) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%06lld", static_cast<long long>(index));
    return buf;
}

std::string format_omega(float omega) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%.1f", static_cast<double>(omega) + 0.0);
    return buf;
}

float parse_label(const std::string& s) {
    const float v = std::stof(s);
    const double snapped = std::round(static_cast<double>(v) * 10.0) / 10.0;
    if (std::fabs(snapped - v) > 1e-6 || std::fabs(v) > 0.3 + 1e-6)
        throw std::runtime_error("manifest: label off the 0.1 rad/s grid: " + s);
    return v;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) out.push_back(field);
    return out;
}

}  // namespace

const char* to_string(Split s) {
    switch (s) {
        case Split::Train: return "train";
        case Split::Val: return "val";
        default: return "test";
    }
}

Split split_from_string(const std::string& s) {
    if (s == "train") return Split::Train;
    if (s == "val") return Split::Val;
    if (s == "test") return Split::Test;
    throw std::invalid_argument("unknown split: " + s);
}

std::vector<int32_t> DatasetManifest::split_indices(Split split) const {
    std::vector<int32_t> out;
    for (size_t i = 0; i < records.size(); ++i)
        if (records[i].split == split) out.push_back(static_cast<int32_t>(i));
    return out;
}

int64_t DatasetManifest::split_size(Split split) const {
    return static_cast<int64_t>(split_indices(split).size());
}

SplitSizes split_sizes(int64_t n) {
    const int64_t fifth = n / 5;
    return SplitSizes{n - 2 * fifth, fifth, fifth};
}

DatasetManifest generate_dataset(uint64_t seed, int64_t n_samples, const std::string& out_dir,
                                 int difficulty) {
    if (n_samples < 10) throw std::invalid_argument("generate_dataset: need at least 10 samples");
    fs::create_directories(fs::path(out_dir) / "images");

    DatasetManifest manifest;
    manifest.root_dir = out_dir;

    int64_t produced = 0;
    uint64_t episode = 0;
    while (produced < n_samples) {
        Rng rng(Rng::derive(seed, episode));
        WorldSpec world = generate_world(rng, difficulty);
        RobotState state;
        state.x = 0.6;
        state.y = rng.next_uniform(-0.3, 0.3);
        state.heading = rng.next_uniform(-0.3, 0.3);

        for (int step = 0; step < kEpisodeMaxSteps && produced < n_samples; ++step) {
            if (clearance(world, state.x, state.y) < kCollisionDistance) break;
            const double omega = expert_policy(world, state);
            const RenderedFrame frame = render(world, state);

            SampleRecord rec;
            rec.id = sample_id(produced);
            rec.rgb_path = "images/" + rec.id + "_rgb.ppm";
            rec.depth_path = "images/" + rec.id + "_depth.pgm";
            rec.omega = static_cast<float>(omega);
            write_ppm((fs::path(out_dir) / rec.rgb_path).string(), frame.rgb);
            write_pgm16((fs::path(out_dir) / rec.depth_path).string(), frame.depth);
            manifest.records.push_back(std::move(rec));
            ++produced;

            state = step_state(state, omega, kEpisodeDt);
            world = world.advanced(kEpisodeDt);
        }
        ++episode;
    }

    // Seeded shuffle, then contiguous blocks of the permutation become the
    // split assignment.
    std::vector<int64_t> perm(static_cast<size_t>(n_samples));
    for (int64_t i = 0; i < n_samples; ++i) perm[size_t(i)] = i;
    Rng shuffle_rng(Rng::derive(seed, 0x73706c6974ull));  // split-assignment stream
    for (int64_t i = n_samples - 1; i > 0; --i) {
        const int64_t j = static_cast<int64_t>(shuffle_rng.next_below(uint64_t(i) + 1));
        std::swap(perm[size_t(i)], perm[size_t(j)]);
    }
    const SplitSizes sizes = split_sizes(n_samples);
    for (int64_t k = 0; k < n_samples; ++k) {
        Split s = Split::Test;
        if (k < sizes.train)
            s = Split::Train;
        else if (k < sizes.train + sizes.val)
            s = Split::Val;
        manifest.records[size_t(perm[size_t(k)])].split = s;
    }

    write_manifest(manifest);
    write_norm_csv((fs::path(out_dir) / "norm.csv").string(), compute_norm_stats(manifest));
    return manifest;
}

void write_manifest(const DatasetManifest& manifest) {
    const std::string path = (fs::path(manifest.root_dir) / "manifest.csv").string();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error(path + ": cannot open for writing");
    out << "id,rgb,depth,omega,split\n";
    for (const SampleRecord& r : manifest.records)
        out << r.id << ',' << r.rgb_path << ',' << r.depth_path << ',' << format_omega(r.omega)
            << ',' << to_string(r.split) << '\n';
    if (!out) throw std::runtime_error(path + ": write failed");
}

DatasetManifest load_manifest(const std::string& dir) {
    const std::string path = (fs::path(dir) / "manifest.csv").string();
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error(path + ": cannot open");
    DatasetManifest manifest;
    manifest.root_dir = dir;
    std::string line;
    if (!std::getline(in, line) || line != "id,rgb,depth,omega,split")
        throw std::runtime_error(path + ": bad manifest header");
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != 5) throw std::runtime_error(path + ": malformed row: " + line);
        SampleRecord rec;
        rec.id = fields[0];
        rec.rgb_path = fields[1];
        rec.depth_path = fields[2];
        rec.omega = parse_label(fields[3]);
        rec.split = split_from_string(fields[4]);
        manifest.records.push_back(std::move(rec));
    }
    if (manifest.records.empty()) throw std::runtime_error(path + ": empty manifest");
    return manifest;
}

NormStats compute_norm_stats(const DatasetManifest& manifest) {
    std::array<double, 4> sum{}, sumsq{};
    int64_t pixels = 0;
    bool any = false;
    for (const SampleRecord& rec : manifest.records) {
        if (rec.split != Split::Train) continue;
        any = true;
        const ImageRgb8 rgb = read_ppm((fs::path(manifest.root_dir) / rec.rgb_path).string());
        const ImageGray16 depth =
            read_pgm16((fs::path(manifest.root_dir) / rec.depth_path).string());
        for (size_t i = 0; i < rgb.pixels.size(); i += 3) {
            for (int c = 0; c < 3; ++c) {
                const double v = rgb.pixels[i + size_t(c)] / 255.0;
                sum[size_t(c)] += v;
                sumsq[size_t(c)] += v * v;
            }
        }
        for (uint16_t mm : depth.pixels) {
            const double v = mm / 1000.0;  // meters
            sum[3] += v;
            sumsq[3] += v * v;
        }
        pixels += static_cast<int64_t>(depth.pixels.size());
    }
    if (!any) throw std::runtime_error("compute_norm_stats: training split is empty");
    NormStats stats;
    for (size_t c = 0; c < 4; ++c) {
        stats.mean[c] = sum[c] / static_cast<double>(pixels);
        const double var = sumsq[c] / static_cast<double>(pixels) - stats.mean[c] * stats.mean[c];
        stats.std[c] = std::sqrt(std::max(var, 0.0));
        if (!(stats.std[c] > 0.0))
            throw std::runtime_error("compute_norm_stats: channel " + std::to_string(c) +
                                     " has zero standard deviation");
    }
    return stats;
}

static const char* kChannelNames[4] = {"rgb_r", "rgb_g", "rgb_b", "depth"};

void write_norm_csv(const std::string& path, const NormStats& stats) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error(path + ": cannot open for writing");
    out << "channel,mean,std\n";
    char buf[96];
    for (size_t c = 0; c < 4; ++c) {
        std::snprintf(buf, sizeof buf, "%s,%.17g,%.17g\n", kChannelNames[c], stats.mean[c],
                      stats.std[c]);
        out << buf;
    }
}

NormStats read_norm_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error(path + ": cannot open");
    std::string line;
    if (!std::getline(in, line) || line != "channel,mean,std")
        throw std::runtime_error(path + ": bad norm.csv header");
    NormStats stats;
    std::array<bool, 4> seen{};
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != 3) throw std::runtime_error(path + ": malformed row: " + line);
        for (size_t c = 0; c < 4; ++c) {
            if (fields[0] == kChannelNames[c]) {
                stats.mean[c] = std::stod(fields[1]);
                stats.std[c] = std::stod(fields[2]);
                seen[c] = true;
            }
        }
    }
    for (bool s : seen)
        if (!s) throw std::runtime_error(path + ": missing channel rows");
    return stats;
}

NormStats load_or_compute_norm_stats(const DatasetManifest& manifest) {
    const std::string path = (fs::path(manifest.root_dir) / "norm.csv").string();
    if (fs::exists(path)) return read_norm_csv(path);
    const NormStats stats = compute_norm_stats(manifest);
    write_norm_csv(path, stats);
    return stats;
}

namespace {

// Box-average a single channel from src_size down to dst_size (integer
// factor), then standardize.
void downsample_normalize(const double* src, int64_t src_size, float* dst, int64_t dst_size,
                          double mean, double std) {
    const int64_t k = src_size / dst_size;
    const double inv = 1.0 / static_cast<double>(k * k);
    for (int64_t i = 0; i < dst_size; ++i) {
        for (int64_t j = 0; j < dst_size; ++j) {
            double acc = 0.0;
            for (int64_t u = 0; u < k; ++u) {
                const double* row = src + (i * k + u) * src_size + j * k;
                for (int64_t v = 0; v < k; ++v) acc += row[v];
            }
            dst[i * dst_size + j] = static_cast<float>((acc * inv - mean) / std);
        }
    }
}

}  // namespace

DecodedSample load_normalized_sample(const DatasetManifest& manifest, const SampleRecord& rec,
                                     int64_t image_size, const NormStats& stats) {
    const ImageRgb8 rgb = read_ppm((fs::path(manifest.root_dir) / rec.rgb_path).string());
    const ImageGray16 depth = read_pgm16((fs::path(manifest.root_dir) / rec.depth_path).string());
    if (rgb.width != rgb.height || depth.width != depth.height || rgb.width != depth.width)
        throw std::runtime_error("sample " + rec.id + ": images must be square and same size");
    const int64_t src = rgb.width;
    if (src % image_size != 0)
        throw std::runtime_error("sample " + rec.id + ": stored size " + std::to_string(src) +
                                 " is not an integer multiple of model input " +
                                 std::to_string(image_size));

    DecodedSample out;
    out.rgb = Tensor({1, 3, image_size, image_size});
    out.depth = Tensor({1, 1, image_size, image_size});

    std::vector<double> plane(static_cast<size_t>(src * src));
    for (int c = 0; c < 3; ++c) {
        for (int64_t p = 0; p < src * src; ++p)
            plane[size_t(p)] = rgb.pixels[size_t(3 * p + c)] / 255.0;
        downsample_normalize(plane.data(), src, out.rgb.data() + c * image_size * image_size,
                             image_size, stats.mean[size_t(c)], stats.std[size_t(c)]);
    }
    for (int64_t p = 0; p < src * src; ++p) plane[size_t(p)] = depth.pixels[size_t(p)] / 1000.0;
    downsample_normalize(plane.data(), src, out.depth.data(), image_size, stats.mean[3],
                         stats.std[3]);
    return out;
}

BatchLoader::BatchLoader(const DatasetManifest& manifest, Split split, int64_t batch_size,
                         int64_t image_size, NormStats stats)
    : manifest_(&manifest),
      indices_(manifest.split_indices(split)),
      batch_size_(batch_size),
      image_size_(image_size),
      stats_(stats) {
    if (indices_.empty())
        throw std::runtime_error(std::string("dataset split '") + to_string(split) +
                                 "' is empty in " + manifest.root_dir);
    if (batch_size_ < 1) throw std::invalid_argument("BatchLoader: batch size must be >= 1");
    const int64_t bytes =
        sample_count() * 4 * image_size_ * image_size_ * int64_t(sizeof(float));
    use_cache_ = bytes <= (int64_t(256) << 20);
    if (use_cache_) {
        cache_.resize(manifest.records.size());
        cached_.assign(manifest.records.size(), 0);
    }
}

std::vector<std::vector<int32_t>> BatchLoader::epoch_batches(Rng* shuffle_rng) const {
    std::vector<int32_t> order = indices_;
    if (shuffle_rng) {
        for (int64_t i = static_cast<int64_t>(order.size()) - 1; i > 0; --i) {
            const int64_t j = static_cast<int64_t>(shuffle_rng->next_below(uint64_t(i) + 1));
            std::swap(order[size_t(i)], order[size_t(j)]);
        }
    }
    std::vector<std::vector<int32_t>> batches;
    for (size_t start = 0; start < order.size(); start += size_t(batch_size_)) {
        const size_t end = std::min(order.size(), start + size_t(batch_size_));
        batches.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(start),
                             order.begin() + static_cast<std::ptrdiff_t>(end));
    }
    return batches;
}

Batch BatchLoader::load(const std::vector<int32_t>& manifest_indices) const {
    const int64_t n = static_cast<int64_t>(manifest_indices.size());
    Batch batch;
    batch.indices = manifest_indices;
    batch.rgb = Tensor({n, 3, image_size_, image_size_});
    batch.depth = Tensor({n, 1, image_size_, image_size_});
    batch.omega = Tensor({n, 1});
    const int64_t plane = image_size_ * image_size_;
    for (int64_t i = 0; i < n; ++i) {
        const int32_t idx = manifest_indices[size_t(i)];
        const SampleRecord& rec = manifest_->records.at(size_t(idx));
        const DecodedSample* sample;
        DecodedSample local;
        if (use_cache_) {
            if (!cached_[size_t(idx)]) {
                cache_[size_t(idx)] = load_normalized_sample(*manifest_, rec, image_size_, stats_);
                cached_[size_t(idx)] = 1;
            }
            sample = &cache_[size_t(idx)];
        } else {
            local = load_normalized_sample(*manifest_, rec, image_size_, stats_);
            sample = &local;
        }
        std::copy(sample->rgb.data(), sample->rgb.data() + 3 * plane,
                  batch.rgb.data() + i * 3 * plane);
        std::copy(sample->depth.data(), sample->depth.data() + plane,
                  batch.depth.data() + i * plane);
        batch.omega(i, 0) = rec.omega;
    }
    return batch;
}

}  // namespace sfnet

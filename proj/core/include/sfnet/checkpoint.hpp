#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sfnet/dataset.hpp"
#include "sfnet/model.hpp"
#include "sfnet/optimizer.hpp"

namespace sfnet {

/// Serialized model bundle.
///
/// On-disk layout (all integers little-endian):
///   magic "SFCK" | u16 version=1 | u32 header length | UTF-8 JSON header
///   | raw f32 tensor payloads in directory order | u32 CRC32 of all
///   preceding bytes.
/// The JSON header carries the model config, normalization statistics,
/// epoch, rng state and the tensor directory (name, dtype code 0 = f32,
/// rank, dims, byte offset into the payload section).
struct Checkpoint {
    static constexpr uint16_t kVersion = 1;

    ModelConfig config;
    NormStats norm;
    int64_t epoch = 0;
    Rng::State rng_state{};
    std::vector<std::pair<std::string, Tensor>> tensors;

    struct AdamMeta {
        AdamConfig config;
        int64_t t = 0;
    };
    std::optional<AdamMeta> adam;  // optimizer moment tensors ride in `tensors`
};

void save_checkpoint(const std::string& path, const Checkpoint& checkpoint);
Checkpoint load_checkpoint(const std::string& path);

Checkpoint checkpoint_from_model(FusionModel<float>& model, const NormStats& norm, int64_t epoch,
                                 const Rng::State& rng_state);

/// Rebuilds the model from a checkpoint; the tensor directory must carry
/// exactly the parameter names of the stored config.
FusionModel<float> model_from_checkpoint(const Checkpoint& checkpoint);

}  // namespace sfnet

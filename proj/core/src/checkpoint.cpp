#include "sfnet/checkpoint.hpp"

#include <zlib.h>

#include <cstring>
#include <fstream>
#include <map>

#include <json.hpp>

namespace sfnet {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
    throw std::runtime_error(path + ": " + what);
}

void put_u16(std::string& out, uint16_t v) {
    out.push_back(static_cast<char>(v & 0xff));
    out.push_back(static_cast<char>(v >> 8));
}

void put_u32(std::string& out, uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

json config_to_json(const ModelConfig& c) {
    return json{{"fusion", to_string(c.fusion)},
                {"image_size", c.image_size},
                {"conv_widths", c.conv_widths},
                {"fc_widths", c.fc_widths},
                {"embed_dim", c.embed_dim},
                {"gate_hidden", c.gate_hidden},
                {"post_widths", c.post_widths},
                {"profile", c.profile}};
}

ModelConfig config_from_json(const json& j) {
    ModelConfig c;
    c.fusion = fusion_from_string(j.at("fusion").get<std::string>());
    c.image_size = j.at("image_size").get<int64_t>();
    c.conv_widths = j.at("conv_widths").get<std::vector<int64_t>>();
    c.fc_widths = j.at("fc_widths").get<std::vector<int64_t>>();
    c.embed_dim = j.at("embed_dim").get<int64_t>();
    c.gate_hidden = j.at("gate_hidden").get<int64_t>();
    c.post_widths = j.at("post_widths").get<std::vector<int64_t>>();
    c.profile = j.at("profile").get<std::string>();
    c.validate();
    return c;
}

}  // namespace

void save_checkpoint(const std::string& path, const Checkpoint& ck) {
    json header;
    header["config"] = config_to_json(ck.config);
    header["norm"] = json{{"mean", ck.norm.mean}, {"std", ck.norm.std}};
    header["epoch"] = ck.epoch;
    header["rng"] = json{{"s", std::vector<uint64_t>(ck.rng_state.s, ck.rng_state.s + 4)},
                         {"has_cached", ck.rng_state.has_cached},
                         {"cached", ck.rng_state.cached}};
    if (ck.adam) {
        header["adam"] = json{{"t", ck.adam->t},
                              {"lr", ck.adam->config.lr},
                              {"beta1", ck.adam->config.beta1},
                              {"beta2", ck.adam->config.beta2},
                              {"eps", ck.adam->config.eps}};
    }
    json dir = json::array();
    int64_t offset = 0;
    for (const auto& [name, tensor] : ck.tensors) {
        dir.push_back(json{{"name", name},
                           {"dtype", 0},
                           {"rank", tensor.rank()},
                           {"dims", tensor.shape()},
                           {"offset", offset}});
        offset += tensor.numel() * int64_t(sizeof(float));
    }
    header["tensors"] = std::move(dir);
    const std::string header_bytes = header.dump();

    std::string prefix = "SFCK";
    put_u16(prefix, Checkpoint::kVersion);
    put_u32(prefix, static_cast<uint32_t>(header_bytes.size()));

    std::ofstream out(path, std::ios::binary);
    if (!out) fail(path, "cannot open for writing");
    uLong crc = crc32(0L, Z_NULL, 0);
    auto emit = [&](const void* data, size_t len) {
        crc = crc32(crc, static_cast<const Bytef*>(data), static_cast<uInt>(len));
        out.write(static_cast<const char*>(data), static_cast<std::streamsize>(len));
    };
    emit(prefix.data(), prefix.size());
    emit(header_bytes.data(), header_bytes.size());
    static_assert(sizeof(float) == 4);
    for (const auto& [name, tensor] : ck.tensors)
        emit(tensor.data(), size_t(tensor.numel()) * sizeof(float));
    std::string trailer;
    put_u32(trailer, static_cast<uint32_t>(crc));
    out.write(trailer.data(), static_cast<std::streamsize>(trailer.size()));
    if (!out) fail(path, "write failed");
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(path, "cannot open");
    uLong crc = crc32(0L, Z_NULL, 0);
    auto consume = [&](void* data, size_t len, const char* what) {
        in.read(static_cast<char*>(data), static_cast<std::streamsize>(len));
        if (in.gcount() != static_cast<std::streamsize>(len))
            fail(path, std::string("truncated (") + what + ")");
        crc = crc32(crc, static_cast<const Bytef*>(data), static_cast<uInt>(len));
    };

    char magic[4];
    consume(magic, 4, "magic");
    if (std::memcmp(magic, "SFCK", 4) != 0) fail(path, "bad magic");
    uint8_t vbuf[2];
    consume(vbuf, 2, "version");
    const uint16_t version = static_cast<uint16_t>(vbuf[0] | (vbuf[1] << 8));
    if (version != Checkpoint::kVersion)
        fail(path, "unsupported version " + std::to_string(version));
    uint8_t lbuf[4];
    consume(lbuf, 4, "header length");
    const uint32_t header_len = static_cast<uint32_t>(lbuf[0]) | (uint32_t(lbuf[1]) << 8) |
                                (uint32_t(lbuf[2]) << 16) | (uint32_t(lbuf[3]) << 24);
    std::string header_bytes(header_len, '\0');
    consume(header_bytes.data(), header_len, "header");

    json header;
    try {
        header = json::parse(header_bytes);
    } catch (const json::exception& e) {
        fail(path, std::string("bad header json: ") + e.what());
    }

    Checkpoint ck;
    try {
        ck.config = config_from_json(header.at("config"));
        const json& norm = header.at("norm");
        for (size_t c = 0; c < 4; ++c) {
            ck.norm.mean[c] = norm.at("mean").at(c).get<double>();
            ck.norm.std[c] = norm.at("std").at(c).get<double>();
        }
        ck.epoch = header.at("epoch").get<int64_t>();
        const json& rng = header.at("rng");
        for (size_t i = 0; i < 4; ++i) ck.rng_state.s[i] = rng.at("s").at(i).get<uint64_t>();
        ck.rng_state.has_cached = rng.at("has_cached").get<bool>();
        ck.rng_state.cached = rng.at("cached").get<double>();
        if (header.contains("adam")) {
            Checkpoint::AdamMeta meta;
            meta.t = header["adam"].at("t").get<int64_t>();
            meta.config.lr = header["adam"].at("lr").get<double>();
            meta.config.beta1 = header["adam"].at("beta1").get<double>();
            meta.config.beta2 = header["adam"].at("beta2").get<double>();
            meta.config.eps = header["adam"].at("eps").get<double>();
            ck.adam = meta;
        }

        int64_t expected_offset = 0;
        for (const json& entry : header.at("tensors")) {
            const std::string name = entry.at("name").get<std::string>();
            if (entry.at("dtype").get<int>() != 0) fail(path, "unsupported dtype for " + name);
            const Shape dims = entry.at("dims").get<Shape>();
            if (entry.at("rank").get<int64_t>() != static_cast<int64_t>(dims.size()))
                fail(path, "rank/dims mismatch for " + name);
            if (entry.at("offset").get<int64_t>() != expected_offset)
                fail(path, "non-contiguous tensor directory at " + name);
            Tensor t(dims);
            consume(t.data(), size_t(t.numel()) * sizeof(float), name.c_str());
            expected_offset += t.numel() * int64_t(sizeof(float));
            ck.tensors.emplace_back(name, std::move(t));
        }
    } catch (const json::exception& e) {
        fail(path, std::string("bad header field: ") + e.what());
    }

    uint8_t cbuf[4];
    in.read(reinterpret_cast<char*>(cbuf), 4);
    if (in.gcount() != 4) fail(path, "truncated (checksum)");
    const uint32_t stored = static_cast<uint32_t>(cbuf[0]) | (uint32_t(cbuf[1]) << 8) |
                            (uint32_t(cbuf[2]) << 16) | (uint32_t(cbuf[3]) << 24);
    if (stored != static_cast<uint32_t>(crc)) fail(path, "checksum failure");
    return ck;
}

Checkpoint checkpoint_from_model(FusionModel<float>& model, const NormStats& norm, int64_t epoch,
                                 const Rng::State& rng_state) {
    Checkpoint ck;
    ck.config = model.config;
    ck.norm = norm;
    ck.epoch = epoch;
    ck.rng_state = rng_state;
    for (const auto& p : model.parameters()) ck.tensors.emplace_back(p.name, *p.tensor);
    return ck;
}

FusionModel<float> model_from_checkpoint(const Checkpoint& ck) {
    FusionModel<float> model = build_model_structure<float>(ck.config);
    std::map<std::string, const Tensor*> stored;
    for (const auto& [name, tensor] : ck.tensors)
        if (name.rfind("adam.", 0) != 0) stored[name] = &tensor;

    auto params = model.parameters();
    if (stored.size() != params.size())
        throw std::runtime_error("checkpoint: tensor directory does not match the config (" +
                                 std::to_string(stored.size()) + " stored vs " +
                                 std::to_string(params.size()) + " expected)");
    for (auto& p : params) {
        auto it = stored.find(p.name);
        if (it == stored.end()) throw std::runtime_error("checkpoint: missing tensor " + p.name);
        if (!(it->second->shape() == p.tensor->shape()))
            throw std::runtime_error("checkpoint: shape mismatch for " + p.name);
        *p.tensor = *it->second;
    }
    return model;
}

}  // namespace sfnet

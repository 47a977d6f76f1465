#include "ease/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

#include <json.hpp>

namespace ease {

namespace {

using nlohmann::json;

static_assert(std::endian::native == std::endian::little,
              "checkpoint payloads are written as native doubles and assume a little-endian host");

constexpr char k_magic[4] = {'E', 'A', 'S', 'E'};

void put_u32(std::string& out, std::uint32_t v) {
    char buf[4];
    std::memcpy(buf, &v, 4);
    out.append(buf, 4);
}

void put_u64(std::string& out, std::uint64_t v) {
    char buf[8];
    std::memcpy(buf, &v, 8);
    out.append(buf, 8);
}

void append_tensor_entries(json& manifest, std::string& payload, const std::string& prefix,
                           const std::map<std::string, Tensor>& tensors) {
    for (const auto& [name, t] : tensors) {
        json entry;
        entry["name"] = prefix + name;
        entry["shape"] = t.shape();
        entry["dtype"] = "f64";
        manifest["tensors"].push_back(std::move(entry));
        payload.append(reinterpret_cast<const char*>(t.values().data()),
                       static_cast<size_t>(t.size()) * sizeof(double));
    }
}

struct Reader {
    const std::string& bytes;
    const std::string& path;
    size_t pos = 0;

    void need(size_t n, const std::string& what) {
        if (bytes.size() - pos < n)
            throw std::runtime_error("checkpoint truncated: " + path + " (" + what + ")");
    }
    std::uint32_t u32(const std::string& what) {
        need(4, what);
        std::uint32_t v;
        std::memcpy(&v, bytes.data() + pos, 4);
        pos += 4;
        return v;
    }
    std::uint64_t u64(const std::string& what) {
        need(8, what);
        std::uint64_t v;
        std::memcpy(&v, bytes.data() + pos, 8);
        pos += 8;
        return v;
    }
};

}  // namespace

void save_checkpoint(const Checkpoint& state, const std::string& path) {
    json manifest;
    manifest["config"] = json::parse(config_to_json_string(state.config));
    manifest["step"] = state.step;
    manifest["adam_step"] = state.adam_step;
    manifest["rng"] = {{"seed", state.rng.seed}, {"counter", state.rng.counter}};
    manifest["tensors"] = json::array();

    std::string payload;
    append_tensor_entries(manifest, payload, "", state.params);
    append_tensor_entries(manifest, payload, "adam/m/", state.adam_m);
    append_tensor_entries(manifest, payload, "adam/v/", state.adam_v);

    const std::string manifest_text = manifest.dump();

    std::string blob;
    blob.append(k_magic, 4);
    put_u32(blob, k_checkpoint_version);
    put_u64(blob, manifest_text.size());
    blob += manifest_text;
    blob += payload;

    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("checkpoint: cannot open " + tmp + " for writing");
        out.write(blob.data(), static_cast<std::streamsize>(blob.size()));
        if (!out) throw std::runtime_error("checkpoint: write failed for " + tmp);
    }
    std::filesystem::rename(tmp, path);
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("checkpoint: cannot open " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    const std::string bytes = buf.str();

    Reader r{bytes, path};
    r.need(4, "magic");
    if (std::memcmp(bytes.data(), k_magic, 4) != 0)
        throw std::runtime_error("not an EASE checkpoint: " + path);
    r.pos = 4;

    const std::uint32_t version = r.u32("version");
    if (version != k_checkpoint_version)
        throw std::runtime_error("checkpoint version mismatch: " + path + " has version " +
                                 std::to_string(version) + ", expected " +
                                 std::to_string(k_checkpoint_version));

    const std::uint64_t manifest_len = r.u64("manifest length");
    r.need(manifest_len, "manifest");
    json manifest = json::parse(bytes.substr(r.pos, manifest_len), nullptr, false);
    if (manifest.is_discarded())
        throw std::runtime_error("checkpoint: manifest is not valid JSON in " + path);
    r.pos += manifest_len;

    Checkpoint state;
    try {
        state.config = config_from_json_string(manifest.at("config").dump());
        state.step = manifest.at("step").get<std::int64_t>();
        state.adam_step = manifest.at("adam_step").get<std::int64_t>();
        state.rng.seed = manifest.at("rng").at("seed").get<std::uint64_t>();
        state.rng.counter = manifest.at("rng").at("counter").get<std::uint64_t>();
    } catch (const json::exception& e) {
        throw std::runtime_error("checkpoint: bad manifest in " + path + ": " + e.what());
    }

    for (const json& entry : manifest.at("tensors")) {
        std::string name;
        Shape shape;
        try {
            name = entry.at("name").get<std::string>();
            shape = entry.at("shape").get<Shape>();
            if (entry.at("dtype").get<std::string>() != "f64")
                throw std::runtime_error("checkpoint: unsupported dtype for tensor " + name +
                                         " in " + path);
        } catch (const json::exception& e) {
            throw std::runtime_error("checkpoint: bad tensor entry in " + path + ": " + e.what());
        }
        for (Index d : shape)
            if (d < 1)
                throw std::runtime_error("checkpoint: bad shape for tensor " + name + " in " +
                                         path);

        Tensor t = Tensor::zeros(shape);
        const size_t nbytes = static_cast<size_t>(t.size()) * sizeof(double);
        r.need(nbytes, "payload of " + name);
        std::memcpy(t.values().data(), bytes.data() + r.pos, nbytes);
        r.pos += nbytes;

        if (name.rfind("adam/m/", 0) == 0)
            state.adam_m.emplace(name.substr(7), std::move(t));
        else if (name.rfind("adam/v/", 0) == 0)
            state.adam_v.emplace(name.substr(7), std::move(t));
        else
            state.params.emplace(std::move(name), std::move(t));
    }

    if (r.pos != bytes.size())
        throw std::runtime_error("checkpoint: trailing bytes after payloads in " + path);
    return state;
}

}  // namespace ease

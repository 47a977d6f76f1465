#include "ease/checkpoint.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

using namespace ease;
namespace fs = std::filesystem;

namespace {

fs::path scratch_file(const std::string& name) {
    fs::path p = fs::temp_directory_path() / name;
    fs::remove(p);
    return p;
}

Checkpoint sample_checkpoint() {
    Checkpoint ck;
    ck.config = desk_preset();
    ck.config.train_data = "/data/train.jsonl";
    ck.config.pi = 0.3;
    ck.params.emplace("enc/w", Tensor::from_values({2, 3}, {0.1, -0.2, 0.3, 1e-17, -4.0, 5.5}));
    ck.params.emplace("head/b", Tensor::from_values({1, 4}, {0.0, 1.0, -1.0, 0.125}));
    ck.adam_m.emplace("enc/w", Tensor::full({2, 3}, 0.01));
    ck.adam_m.emplace("head/b", Tensor::full({1, 4}, -0.02));
    ck.adam_v.emplace("enc/w", Tensor::full({2, 3}, 0.001));
    ck.adam_v.emplace("head/b", Tensor::full({1, 4}, 0.002));
    ck.adam_step = 7;
    ck.step = 42;
    ck.rng = RngState{99, 123456};
    return ck;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void spit(const fs::path& p, const std::string& bytes) {
    std::ofstream out(p, std::ios::binary);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

bool bitwise_equal(const std::map<std::string, Tensor>& a, const std::map<std::string, Tensor>& b) {
    if (a.size() != b.size()) return false;
    for (const auto& [name, t] : a) {
        auto it = b.find(name);
        if (it == b.end() || t.shape() != it->second.shape()) return false;
        for (Index i = 0; i < t.size(); ++i)
            if (t.values()[i] != it->second.values()[i]) return false;
    }
    return true;
}

std::string error_of(const std::string& path) {
    try {
        load_checkpoint(path);
    } catch (const std::exception& e) {
        return e.what();
    }
    return "";
}

}  // namespace

TEST_CASE("checkpoint round trip is bitwise exact") {
    fs::path p = scratch_file("ease_ckpt_roundtrip.ease");
    Checkpoint ck = sample_checkpoint();
    save_checkpoint(ck, p.string());

    Checkpoint back = load_checkpoint(p.string());
    CHECK(bitwise_equal(back.params, ck.params));
    CHECK(bitwise_equal(back.adam_m, ck.adam_m));
    CHECK(bitwise_equal(back.adam_v, ck.adam_v));
    CHECK(back.adam_step == 7);
    CHECK(back.step == 42);
    CHECK(back.rng.seed == 99);
    CHECK(back.rng.counter == 123456);
    CHECK(config_to_json_string(back.config) == config_to_json_string(ck.config));
    fs::remove(p);
}

TEST_CASE("save, load, save again produces byte-identical files") {
    fs::path p1 = scratch_file("ease_ckpt_a.ease");
    fs::path p2 = scratch_file("ease_ckpt_b.ease");
    save_checkpoint(sample_checkpoint(), p1.string());
    save_checkpoint(load_checkpoint(p1.string()), p2.string());
    CHECK(slurp(p1) == slurp(p2));
    fs::remove(p1);
    fs::remove(p2);
}

TEST_CASE("saving leaves no temp residue next to the file") {
    fs::path dir = fs::temp_directory_path() / "ease_ckpt_dir";
    fs::remove_all(dir);
    fs::create_directories(dir);
    save_checkpoint(sample_checkpoint(), (dir / "model.ease").string());
    size_t entries = 0;
    for (const auto& entry : fs::directory_iterator(dir)) {
        ++entries;
        CHECK(entry.path().filename() == "model.ease");
    }
    CHECK(entries == 1);
    fs::remove_all(dir);
}

TEST_CASE("wrong magic is rejected as not a checkpoint") {
    fs::path p = scratch_file("ease_ckpt_magic.ease");
    save_checkpoint(sample_checkpoint(), p.string());
    std::string bytes = slurp(p);
    bytes[0] = 'X';
    spit(p, bytes);
    CHECK(error_of(p.string()).find("not an EASE checkpoint") != std::string::npos);
    fs::remove(p);
}

TEST_CASE("version mismatch names both versions") {
    fs::path p = scratch_file("ease_ckpt_version.ease");
    save_checkpoint(sample_checkpoint(), p.string());
    std::string bytes = slurp(p);
    bytes[4] = 9;  // u32 version little-endian starts at offset 4
    spit(p, bytes);
    std::string msg = error_of(p.string());
    CHECK(msg.find("version") != std::string::npos);
    CHECK(msg.find("9") != std::string::npos);
    CHECK(msg.find("1") != std::string::npos);
    fs::remove(p);
}

TEST_CASE("corrupted manifest length reads as truncation, not a crash") {
    fs::path p = scratch_file("ease_ckpt_length.ease");
    save_checkpoint(sample_checkpoint(), p.string());
    std::string bytes = slurp(p);
    bytes[8] = '\xff';  // low byte of the u64 manifest length
    bytes[14] = '\x7f';
    spit(p, bytes);
    CHECK(error_of(p.string()).find("truncated") != std::string::npos);
    fs::remove(p);
}

TEST_CASE("truncated payload names the tensor it ran out in") {
    fs::path p = scratch_file("ease_ckpt_short.ease");
    save_checkpoint(sample_checkpoint(), p.string());
    std::string bytes = slurp(p);
    bytes.resize(bytes.size() - 12);  // clip into the final tensor's payload
    spit(p, bytes);
    std::string msg = error_of(p.string());
    CHECK(msg.find("truncated") != std::string::npos);
    CHECK(msg.find("adam/v/head/b") != std::string::npos);  // maps order tensors; this is last
    fs::remove(p);
}

TEST_CASE("trailing garbage is rejected") {
    fs::path p = scratch_file("ease_ckpt_trailing.ease");
    save_checkpoint(sample_checkpoint(), p.string());
    std::string bytes = slurp(p) + "junk";
    spit(p, bytes);
    CHECK_THROWS_AS(load_checkpoint(p.string()), std::runtime_error);
    fs::remove(p);
}

TEST_CASE("missing file is its own error") {
    CHECK_THROWS_AS(load_checkpoint("/nonexistent/nowhere.ease"), std::runtime_error);
}

TEST_CASE("empty file reads as truncation") {
    fs::path p = scratch_file("ease_ckpt_empty.ease");
    spit(p, "");
    CHECK(error_of(p.string()).find("truncated") != std::string::npos);
    fs::remove(p);
}

#include "ease/config.hpp"

#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <string>

using namespace ease;

namespace {

TrainConfig valid_base() {
    TrainConfig cfg;
    cfg.train_data = "train.jsonl";
    return cfg;
}

}  // namespace

// ---------------------------------------------------------------------------
// defaults and presets
// ---------------------------------------------------------------------------

TEST_CASE("defaults are the paper hyperparameters") {
    TrainConfig cfg;
    CHECK(cfg.learning_rate == 3e-5);
    CHECK(cfg.warmup_steps == 500);
    CHECK(cfg.total_steps == 20000);
    CHECK(cfg.batch_size == 16);
    CHECK(cfg.pi == 0.5);
    CHECK(cfg.beta == 5.0);
    CHECK(cfg.level == EncodeLevel::sentence);
    CHECK(cfg.mask_scheme == MaskScheme::embed_mix);
    CHECK(cfg.model_dim == 64);
    CHECK(cfg.num_heads == 4);
    CHECK_FALSE(cfg.plain_seq2seq);
    CHECK_FALSE(cfg.pretrain);
    validate(cfg);
}

TEST_CASE("desk preset is valid and short") {
    TrainConfig cfg = desk_preset();
    validate(cfg);
    CHECK(cfg.total_steps == 2000);
    CHECK(cfg.batch_size == 16);
    CHECK(cfg.model_dim == 64);
    CHECK(cfg.vocab_size <= 512);
}

// ---------------------------------------------------------------------------
// JSON round trip
// ---------------------------------------------------------------------------

TEST_CASE("config survives a JSON round trip") {
    TrainConfig cfg = desk_preset();
    cfg.level = EncodeLevel::token;
    cfg.mask_scheme = MaskScheme::attention_block;
    cfg.share_encoder = true;
    cfg.pi = 0.25;
    cfg.lasso_weight = 0.125;
    cfg.seed = 12345;
    cfg.train_data = "/data/train.jsonl";
    cfg.init_checkpoint = "/runs/pre/checkpoint.ease";

    TrainConfig back = config_from_json_string(config_to_json_string(cfg));
    CHECK(config_to_json_string(back) == config_to_json_string(cfg));
    CHECK(back.level == EncodeLevel::token);
    CHECK(back.mask_scheme == MaskScheme::attention_block);
    CHECK(back.share_encoder);
    CHECK(back.pi == 0.25);
    CHECK(back.seed == 12345);
    CHECK(back.train_data == "/data/train.jsonl");
}

TEST_CASE("config file round trip") {
    namespace fs = std::filesystem;
    fs::path path = fs::temp_directory_path() / "ease_config_test.json";
    TrainConfig cfg = desk_preset();
    cfg.beta = 2.5;
    cfg.out_dir = "/runs/x";
    save_config(cfg, path.string());
    TrainConfig back = load_config(path.string());
    CHECK(config_to_json_string(back) == config_to_json_string(cfg));
    fs::remove(path);
}

TEST_CASE("missing keys keep their defaults") {
    TrainConfig cfg = config_from_json_string(R"({"pi": 0.3})");
    CHECK(cfg.pi == 0.3);
    CHECK(cfg.beta == 5.0);
    CHECK(cfg.total_steps == 20000);
}

TEST_CASE("unknown keys and bad values are rejected") {
    CHECK_THROWS_AS(config_from_json_string(R"({"zeta": 1})"), std::invalid_argument);
    CHECK_THROWS_AS(config_from_json_string(R"({"pi": "often"})"), std::invalid_argument);
    CHECK_THROWS_AS(config_from_json_string(R"({"level": "paragraph"})"), std::invalid_argument);
    CHECK_THROWS_AS(config_from_json_string("[1,2]"), std::invalid_argument);
}

// ---------------------------------------------------------------------------
// --set overrides
// ---------------------------------------------------------------------------

TEST_CASE("apply_override handles numbers, bools, enums, and strings") {
    TrainConfig cfg;
    apply_override(cfg, "pi=0.25");
    apply_override(cfg, "total_steps=100");
    apply_override(cfg, "share_encoder=true");
    apply_override(cfg, "level=token");
    apply_override(cfg, "mask_scheme=attention_block");
    apply_override(cfg, "train_data=/tmp/a b.jsonl");
    CHECK(cfg.pi == 0.25);
    CHECK(cfg.total_steps == 100);
    CHECK(cfg.share_encoder);
    CHECK(cfg.level == EncodeLevel::token);
    CHECK(cfg.mask_scheme == MaskScheme::attention_block);
    CHECK(cfg.train_data == "/tmp/a b.jsonl");
}

TEST_CASE("apply_override rejects malformed assignments") {
    TrainConfig cfg;
    CHECK_THROWS_AS(apply_override(cfg, "pi"), std::invalid_argument);
    CHECK_THROWS_AS(apply_override(cfg, "pi=maybe"), std::invalid_argument);
    CHECK_THROWS_AS(apply_override(cfg, "zeta=1"), std::invalid_argument);
}

// ---------------------------------------------------------------------------
// validation
// ---------------------------------------------------------------------------

TEST_CASE("validate rejects bad schedules and weights") {
    auto broken = [](auto&& tweak) {
        TrainConfig cfg = valid_base();
        tweak(cfg);
        CHECK_THROWS_AS(validate(cfg), std::invalid_argument);
    };
    broken([](TrainConfig& c) { c.warmup_steps = c.total_steps; });
    broken([](TrainConfig& c) { c.warmup_steps = -1; });
    broken([](TrainConfig& c) { c.total_steps = 0; });
    broken([](TrainConfig& c) { c.batch_size = 0; });
    broken([](TrainConfig& c) { c.lasso_weight = -0.1; });
    broken([](TrainConfig& c) { c.bce_weight = -1.0; });
    broken([](TrainConfig& c) { c.beta = -0.5; });
    broken([](TrainConfig& c) { c.learning_rate = -1e-5; });
}

TEST_CASE("validate rejects bad budgets and temperatures") {
    auto broken = [](auto&& tweak) {
        TrainConfig cfg = valid_base();
        tweak(cfg);
        CHECK_THROWS_AS(validate(cfg), std::invalid_argument);
    };
    broken([](TrainConfig& c) { c.pi = 0.0; });
    broken([](TrainConfig& c) { c.pi = 1.2; });
    broken([](TrainConfig& c) { c.pi = 1.0; });  // beta stays 5.0: degenerate prior
    broken([](TrainConfig& c) { c.tau = 0.0; });
}

TEST_CASE("pi = 1 is fine once beta is 0") {
    TrainConfig cfg = valid_base();
    cfg.pi = 1.0;
    cfg.beta = 0.0;
    validate(cfg);
}

TEST_CASE("plain seq2seq must switch off every extractor-side term") {
    TrainConfig cfg = valid_base();
    cfg.plain_seq2seq = true;
    CHECK_THROWS_AS(validate(cfg), std::invalid_argument);  // beta still 5.0
    cfg.beta = 0.0;
    validate(cfg);
    cfg.share_encoder = true;
    CHECK_THROWS_AS(validate(cfg), std::invalid_argument);
    cfg.share_encoder = false;
    cfg.bce_weight = 0.5;
    CHECK_THROWS_AS(validate(cfg), std::invalid_argument);
}

TEST_CASE("validate rejects bad dims") {
    auto broken = [](auto&& tweak) {
        TrainConfig cfg = valid_base();
        tweak(cfg);
        CHECK_THROWS_AS(validate(cfg), std::invalid_argument);
    };
    broken([](TrainConfig& c) { c.model_dim = 30; });  // not divisible by heads
    broken([](TrainConfig& c) { c.num_heads = 0; });
    broken([](TrainConfig& c) { c.vocab_size = 6; });  // reserved ids only
    broken([](TrainConfig& c) { c.max_positions = 1; });
    broken([](TrainConfig& c) { c.min_sentences = 0; });
    broken([](TrainConfig& c) { c.max_decode_len = 0; });
}

// ---------------------------------------------------------------------------
// sub-config mapping
// ---------------------------------------------------------------------------

TEST_CASE("extractor and abstractor configs inherit the train config") {
    TrainConfig cfg = valid_base();
    cfg.level = EncodeLevel::token;
    cfg.mask_scheme = MaskScheme::attention_block;
    cfg.share_encoder = true;
    cfg.model_dim = 32;
    cfg.num_heads = 2;
    cfg.ffn_dim = 48;
    cfg.extractor_layers = 3;
    cfg.abstractor_layers = 1;
    cfg.tau = 0.7;
    cfg.pi = 0.4;
    cfg.min_sentences = 2;

    ExtractorConfig x = extractor_config(cfg);
    CHECK(x.num_layers == 3);
    CHECK(x.model_dim == 32);
    CHECK(x.num_heads == 2);
    CHECK(x.ffn_dim == 48);
    CHECK(x.level == EncodeLevel::token);
    CHECK(x.tau == 0.7);
    CHECK(x.sparsity_pi == 0.4);
    CHECK(x.min_sentences == 2);

    AbstractorConfig a = abstractor_config(cfg);
    CHECK(a.num_layers == 1);
    CHECK(a.model_dim == 32);
    CHECK(a.mask_scheme == MaskScheme::attention_block);
    CHECK(a.share_encoder);
}

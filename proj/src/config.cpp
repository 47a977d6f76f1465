#include "ease/config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace ease {

namespace {

using nlohmann::json;

std::string level_name(EncodeLevel level) {
    return level == EncodeLevel::token ? "token" : "sentence";
}

EncodeLevel level_from_name(const std::string& name) {
    if (name == "token") return EncodeLevel::token;
    if (name == "sentence") return EncodeLevel::sentence;
    throw std::invalid_argument("config: level must be \"token\" or \"sentence\", got \"" + name +
                                "\"");
}

std::string scheme_name(MaskScheme scheme) {
    return scheme == MaskScheme::attention_block ? "attention_block" : "embed_mix";
}

MaskScheme scheme_from_name(const std::string& name) {
    if (name == "embed_mix") return MaskScheme::embed_mix;
    if (name == "attention_block") return MaskScheme::attention_block;
    throw std::invalid_argument(
        "config: mask_scheme must be \"embed_mix\" or \"attention_block\", got \"" + name + "\"");
}

template <typename T>
T field_as(const json& value, const std::string& key) {
    try {
        return value.get<T>();
    } catch (const json::exception&) {
        throw std::invalid_argument("config: bad value for \"" + key + "\": " + value.dump());
    }
}

void apply_field(TrainConfig& c, const std::string& key, const json& v) {
    if (key == "level") c.level = level_from_name(field_as<std::string>(v, key));
    else if (key == "mask_scheme") c.mask_scheme = scheme_from_name(field_as<std::string>(v, key));
    else if (key == "share_encoder") c.share_encoder = field_as<bool>(v, key);
    else if (key == "plain_seq2seq") c.plain_seq2seq = field_as<bool>(v, key);
    else if (key == "pretrain") c.pretrain = field_as<bool>(v, key);
    else if (key == "pi") c.pi = field_as<double>(v, key);
    else if (key == "beta") c.beta = field_as<double>(v, key);
    else if (key == "tau") c.tau = field_as<double>(v, key);
    else if (key == "lasso_weight") c.lasso_weight = field_as<double>(v, key);
    else if (key == "bce_weight") c.bce_weight = field_as<double>(v, key);
    else if (key == "learning_rate") c.learning_rate = field_as<double>(v, key);
    else if (key == "warmup_steps") c.warmup_steps = field_as<std::int64_t>(v, key);
    else if (key == "total_steps") c.total_steps = field_as<std::int64_t>(v, key);
    else if (key == "batch_size") c.batch_size = field_as<std::int64_t>(v, key);
    else if (key == "seed") c.seed = field_as<std::uint64_t>(v, key);
    else if (key == "model_dim") c.model_dim = field_as<std::int64_t>(v, key);
    else if (key == "num_heads") c.num_heads = field_as<std::int64_t>(v, key);
    else if (key == "ffn_dim") c.ffn_dim = field_as<std::int64_t>(v, key);
    else if (key == "extractor_layers") c.extractor_layers = field_as<std::int64_t>(v, key);
    else if (key == "abstractor_layers") c.abstractor_layers = field_as<std::int64_t>(v, key);
    else if (key == "max_positions") c.max_positions = field_as<std::int64_t>(v, key);
    else if (key == "vocab_size") c.vocab_size = field_as<std::int64_t>(v, key);
    else if (key == "min_sentences") c.min_sentences = field_as<std::int64_t>(v, key);
    else if (key == "max_decode_len") c.max_decode_len = field_as<std::int64_t>(v, key);
    else if (key == "train_data") c.train_data = field_as<std::string>(v, key);
    else if (key == "eval_data") c.eval_data = field_as<std::string>(v, key);
    else if (key == "train_labels") c.train_labels = field_as<std::string>(v, key);
    else if (key == "init_checkpoint") c.init_checkpoint = field_as<std::string>(v, key);
    else if (key == "out_dir") c.out_dir = field_as<std::string>(v, key);
    else throw std::invalid_argument("config: unknown key \"" + key + "\"");
}

json to_json(const TrainConfig& c) {
    json j;
    j["level"] = level_name(c.level);
    j["mask_scheme"] = scheme_name(c.mask_scheme);
    j["share_encoder"] = c.share_encoder;
    j["plain_seq2seq"] = c.plain_seq2seq;
    j["pretrain"] = c.pretrain;
    j["pi"] = c.pi;
    j["beta"] = c.beta;
    j["tau"] = c.tau;
    j["lasso_weight"] = c.lasso_weight;
    j["bce_weight"] = c.bce_weight;
    j["learning_rate"] = c.learning_rate;
    j["warmup_steps"] = c.warmup_steps;
    j["total_steps"] = c.total_steps;
    j["batch_size"] = c.batch_size;
    j["seed"] = c.seed;
    j["model_dim"] = c.model_dim;
    j["num_heads"] = c.num_heads;
    j["ffn_dim"] = c.ffn_dim;
    j["extractor_layers"] = c.extractor_layers;
    j["abstractor_layers"] = c.abstractor_layers;
    j["max_positions"] = c.max_positions;
    j["vocab_size"] = c.vocab_size;
    j["min_sentences"] = c.min_sentences;
    j["max_decode_len"] = c.max_decode_len;
    j["train_data"] = c.train_data;
    j["eval_data"] = c.eval_data;
    j["train_labels"] = c.train_labels;
    j["init_checkpoint"] = c.init_checkpoint;
    j["out_dir"] = c.out_dir;
    return j;
}

TrainConfig from_json(const json& j) {
    if (!j.is_object()) throw std::invalid_argument("config: top level must be a JSON object");
    TrainConfig c;
    for (const auto& [key, value] : j.items()) apply_field(c, key, value);
    return c;
}

}  // namespace

void validate(const TrainConfig& c) {
    if (c.warmup_steps < 0) throw std::invalid_argument("config: warmup_steps must be >= 0");
    if (c.total_steps < 1) throw std::invalid_argument("config: total_steps must be >= 1");
    if (c.warmup_steps >= c.total_steps)
        throw std::invalid_argument("config: warmup_steps must be < total_steps");
    if (c.batch_size < 1) throw std::invalid_argument("config: batch_size must be >= 1");
    if (c.beta < 0.0 || c.lasso_weight < 0.0 || c.bce_weight < 0.0)
        throw std::invalid_argument("config: loss weights must be non-negative");
    if (!(c.pi > 0.0 && c.pi <= 1.0)) throw std::invalid_argument("config: pi must lie in (0,1]");
    if (c.pi == 1.0 && c.beta > 0.0)
        throw std::invalid_argument("config: beta must be 0 when pi == 1 (KL prior degenerates)");
    if (!(c.tau > 0.0)) throw std::invalid_argument("config: tau must be positive");
    if (c.learning_rate < 0.0)
        throw std::invalid_argument("config: learning_rate must be non-negative");
    if (c.plain_seq2seq &&
        (c.beta > 0.0 || c.lasso_weight > 0.0 || c.bce_weight > 0.0 || c.share_encoder))
        throw std::invalid_argument(
            "config: plain_seq2seq has no extractor; beta, lasso_weight, bce_weight must be 0 "
            "and share_encoder false");
    if (c.model_dim < 1 || c.num_heads < 1 || c.ffn_dim < 1 || c.extractor_layers < 1 ||
        c.abstractor_layers < 1 || c.max_positions < 2)
        throw std::invalid_argument("config: model dims must be positive");
    if (c.model_dim % c.num_heads != 0)
        throw std::invalid_argument("config: model_dim must be divisible by num_heads");
    if (c.vocab_size < k_num_reserved + 1)
        throw std::invalid_argument("config: vocab_size must exceed the reserved ids");
    if (c.min_sentences < 1) throw std::invalid_argument("config: min_sentences must be >= 1");
    if (c.max_decode_len < 1) throw std::invalid_argument("config: max_decode_len must be >= 1");
}

TrainConfig desk_preset() {
    TrainConfig c;
    c.learning_rate = 1e-3;  // 3e-5 never leaves the warmup basin in 2000 steps at this scale
    c.tau = 1.0;             // 0.01 saturates the relaxation; desk runs need live gradients
    c.beta = 1.0;
    c.warmup_steps = 100;
    c.total_steps = 2000;
    c.batch_size = 16;
    return c;
}

TrainConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("config: cannot open " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return config_from_json_string(buf.str());
}

void save_config(const TrainConfig& config, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("config: cannot open " + path + " for writing");
    out << config_to_json_string(config) << "\n";
    if (!out) throw std::runtime_error("config: write failed for " + path);
}

std::string config_to_json_string(const TrainConfig& config) {
    return to_json(config).dump(2);
}

TrainConfig config_from_json_string(const std::string& text) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded()) throw std::invalid_argument("config: invalid JSON");
    return from_json(j);
}

void apply_override(TrainConfig& config, const std::string& assignment) {
    auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0)
        throw std::invalid_argument("config: override must look like key=value, got \"" +
                                    assignment + "\"");
    const std::string key = assignment.substr(0, eq);
    const std::string raw = assignment.substr(eq + 1);
    json value = json::parse(raw, nullptr, false);
    if (value.is_discarded() || value.is_object() || value.is_array()) value = raw;
    apply_field(config, key, value);
}

ExtractorConfig extractor_config(const TrainConfig& c) {
    ExtractorConfig x;
    x.num_layers = c.extractor_layers;
    x.model_dim = c.model_dim;
    x.num_heads = c.num_heads;
    x.ffn_dim = c.ffn_dim;
    x.max_positions = c.max_positions;
    x.level = c.level;
    x.tau = c.tau;
    x.sparsity_pi = c.pi;
    x.min_sentences = c.min_sentences;
    return x;
}

AbstractorConfig abstractor_config(const TrainConfig& c) {
    AbstractorConfig a;
    a.num_layers = c.abstractor_layers;
    a.model_dim = c.model_dim;
    a.num_heads = c.num_heads;
    a.ffn_dim = c.ffn_dim;
    a.max_positions = c.max_positions;
    a.mask_scheme = c.mask_scheme;
    a.share_encoder = c.share_encoder;
    return a;
}

}  // namespace ease

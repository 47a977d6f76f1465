// ease: train, evaluate, and poke at sparsity-budgeted summarization models.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ease/harness.hpp"

namespace {

using nlohmann::json;

struct CommonOpts {
    std::string config_path;
    std::vector<std::string> sets;
    std::optional<std::uint64_t> seed;
    std::string out;
};

void add_common(CLI::App* cmd, CommonOpts& opts, bool out_required) {
    cmd->add_option("--config", opts.config_path, "flat JSON config file")
        ->check(CLI::ExistingFile);
    cmd->add_option("--set", opts.sets, "config override, key=value (repeatable)")->type_size(1);
    cmd->add_option("--seed", opts.seed, "override the config seed");
    auto* out = cmd->add_option("--out", opts.out, "output directory");
    if (out_required) out->required();
}

ease::TrainConfig resolve_config(const CommonOpts& opts) {
    ease::TrainConfig cfg;
    if (!opts.config_path.empty()) cfg = ease::load_config(opts.config_path);
    for (const std::string& assignment : opts.sets) ease::apply_override(cfg, assignment);
    if (opts.seed) cfg.seed = *opts.seed;
    if (!opts.out.empty()) cfg.out_dir = opts.out;
    ease::validate(cfg);
    return cfg;
}

std::filesystem::path ensure_out_dir(const std::string& dir) {
    if (dir.empty()) throw std::invalid_argument("an output directory is required (--out)");
    std::filesystem::path p(dir);
    std::filesystem::create_directories(p);
    return p;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path.string());
    out << text;
    if (!text.empty() && text.back() != '\n') out << "\n";
    if (!out) throw std::runtime_error("write failed for " + path.string());
}

std::string read_text(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

// ---------------------------------------------------------------------------
// gen-data
// ---------------------------------------------------------------------------

struct GenOpts {
    int num_docs = 200;
    int eval_docs = 50;
    int sentences_per_doc = 10;
    double salient_fraction = 0.3;
    int vocab_size = 120;
};

void apply_gen_override(GenOpts& gen, const std::string& assignment) {
    const size_t eq = assignment.find('=');
    if (eq == std::string::npos)
        throw std::invalid_argument("gen-data: override must look like key=value, got \"" +
                                    assignment + "\"");
    const std::string key = assignment.substr(0, eq);
    const std::string value = assignment.substr(eq + 1);
    try {
        if (key == "num_docs")
            gen.num_docs = std::stoi(value);
        else if (key == "eval_docs")
            gen.eval_docs = std::stoi(value);
        else if (key == "sentences_per_doc")
            gen.sentences_per_doc = std::stoi(value);
        else if (key == "salient_fraction")
            gen.salient_fraction = std::stod(value);
        else if (key == "vocab_size")
            gen.vocab_size = std::stoi(value);
        else
            throw std::invalid_argument("gen-data: unknown key \"" + key + "\"");
    } catch (const std::invalid_argument&) {
        throw;
    } catch (const std::exception&) {
        throw std::invalid_argument("gen-data: bad value for \"" + key + "\"");
    }
}

int run_gen_data(const CommonOpts& common, const GenOpts& gen) {
    const std::uint64_t seed = common.seed.value_or(0);
    const auto out = ensure_out_dir(common.out);

    auto corpus = [&](int docs, const char* stream) {
        ease::SyntheticSpec spec;
        spec.num_docs = docs;
        spec.sentences_per_doc = gen.sentences_per_doc;
        spec.salient_fraction = gen.salient_fraction;
        spec.vocab_size = gen.vocab_size;
        spec.seed = ease::derive_stream(seed, stream).seed;
        return ease::generate_synthetic_corpus(spec);
    };
    const auto train_docs = corpus(gen.num_docs, "train");
    const auto eval_docs = corpus(gen.eval_docs, "eval");

    auto examples = [](const std::vector<ease::SyntheticDoc>& docs) {
        std::vector<ease::RawExample> out;
        out.reserve(docs.size());
        for (const ease::SyntheticDoc& d : docs) out.push_back(d.example);
        return out;
    };
    ease::write_jsonl((out / "train.jsonl").string(), examples(train_docs));
    ease::write_jsonl((out / "eval.jsonl").string(), examples(eval_docs));
    ease::write_salience_labels((out / "train_salience.jsonl").string(), train_docs);
    ease::write_salience_labels((out / "eval_salience.jsonl").string(), eval_docs);

    json j;
    j["eval"] = (out / "eval.jsonl").string();
    j["eval_docs"] = gen.eval_docs;
    j["seed"] = seed;
    j["train"] = (out / "train.jsonl").string();
    j["train_docs"] = gen.num_docs;
    std::cout << j.dump(2) << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// oracle
// ---------------------------------------------------------------------------

int run_oracle(const std::string& data_path, const CommonOpts& common) {
    const auto labels = ease::oracle_labels_for(ease::read_jsonl(data_path));
    for (const std::vector<int>& row : labels) std::cout << json{{"labels", row}}.dump() << "\n";
    if (!common.out.empty()) {
        const auto out = ensure_out_dir(common.out);
        ease::write_oracle_labels((out / "labels.jsonl").string(), labels);
    }
    return 0;
}

// ---------------------------------------------------------------------------
// train / pretrain
// ---------------------------------------------------------------------------

int run_train(const CommonOpts& common, bool pretrain) {
    ease::TrainConfig cfg = resolve_config(common);
    if (pretrain) cfg.pretrain = true;
    const auto out = ensure_out_dir(cfg.out_dir);

    ease::Trainer trainer(cfg);
    trainer.run();

    const auto ckpt_path = out / "checkpoint.ease";
    ease::save_checkpoint(trainer.snapshot(), ckpt_path.string());
    ease::write_loss_csv((out / "loss.csv").string(), trainer.log());

    json j;
    j["checkpoint"] = ckpt_path.string();
    j["loss_csv"] = (out / "loss.csv").string();
    j["steps"] = trainer.step();
    if (!trainer.log().empty()) j["final_total"] = trainer.log().back().total;
    std::cout << j.dump(2) << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// evaluate
// ---------------------------------------------------------------------------

int run_evaluate(const std::string& ckpt_path, const CommonOpts& common) {
    ease::Checkpoint ck = ease::load_checkpoint(ckpt_path);
    for (const std::string& assignment : common.sets) ease::apply_override(ck.config, assignment);
    if (!common.out.empty()) ck.config.out_dir = common.out;
    if (ck.config.eval_data.empty())
        throw std::invalid_argument("evaluate: no eval_data (set it via --set eval_data=...)");

    const std::uint64_t report_seed = common.seed.value_or(ck.config.seed);
    const ease::MetricsReport report =
        ease::evaluate(ck, ease::read_jsonl(ck.config.eval_data), report_seed);
    const std::string text = ease::report_to_json(report);
    std::cout << text << "\n";
    if (!ck.config.out_dir.empty())
        write_text(ensure_out_dir(ck.config.out_dir) / "report.json", text);
    return 0;
}

// ---------------------------------------------------------------------------
// sweep
// ---------------------------------------------------------------------------

std::string pi_dir_name(double pi) {
    std::ostringstream os;
    os << "pi_" << pi;
    return os.str();
}

int run_sweep(const CommonOpts& common, const std::vector<double>& pis) {
    ease::TrainConfig base = resolve_config(common);
    if (base.eval_data.empty())
        throw std::invalid_argument("sweep: no eval_data (set it via --set eval_data=...)");
    const auto data = ease::read_jsonl(base.eval_data);

    const std::vector<double> grid = pis.empty() ? std::vector<double>{0.2, 0.3, 0.5} : pis;
    const auto rows = ease::sparsity_sweep(base, grid, data);

    std::cerr << ease::sweep_table(rows);
    const std::string text = ease::sweep_to_json(rows);
    std::cout << text << "\n";
    if (!base.out_dir.empty()) {
        const auto out = ensure_out_dir(base.out_dir);
        write_text(out / "report.json", text);
        for (const ease::SweepRow& row : rows) {
            const auto row_dir = out / pi_dir_name(row.pi);
            std::filesystem::create_directories(row_dir);
            ease::write_loss_csv((row_dir / "loss.csv").string(), row.report.loss_curve);
        }
    }
    return 0;
}

// ---------------------------------------------------------------------------
// summarize
// ---------------------------------------------------------------------------

int run_summarize(const std::string& ckpt_path, const std::string& doc_path,
                  const CommonOpts& common) {
    ease::Checkpoint ck = ease::load_checkpoint(ckpt_path);
    for (const std::string& assignment : common.sets) ease::apply_override(ck.config, assignment);

    const ease::SummaryResult result =
        ease::summarize(ck, read_text(doc_path), ck.config.pi);
    const std::string text = ease::summary_to_json(result);
    std::cout << text << "\n";
    if (!common.out.empty()) write_text(ensure_out_dir(common.out) / "summary.json", text);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"EASE: extractive-abstractive summarization with a sparsity budget"};
    app.require_subcommand(1);

    CommonOpts gen_common;
    GenOpts gen_opts;
    auto* gen = app.add_subcommand("gen-data", "generate a synthetic corpus with salience labels");
    gen->add_option("--seed", gen_common.seed, "master seed (default 0)");
    gen->add_option("--out", gen_common.out, "output directory")->required();
    std::vector<std::string> gen_sets;
    gen->add_option("--set", gen_sets,
                    "num_docs, eval_docs, sentences_per_doc, salient_fraction, vocab_size")
        ->type_size(1);

    CommonOpts oracle_common;
    std::string oracle_data;
    auto* oracle = app.add_subcommand("oracle", "greedy oracle labels for a JSONL dataset");
    oracle->add_option("data", oracle_data, "dataset JSONL")->required()->check(CLI::ExistingFile);
    oracle->add_option("--out", oracle_common.out, "also write <out>/labels.jsonl");

    CommonOpts train_common;
    auto* train = app.add_subcommand("train", "train a model and save its checkpoint");
    add_common(train, train_common, false);

    CommonOpts pre_common;
    auto* pretrain = app.add_subcommand("pretrain", "reconstruction pretraining (target := source)");
    add_common(pretrain, pre_common, false);

    CommonOpts eval_common;
    std::string eval_ckpt;
    auto* evaluate = app.add_subcommand("evaluate", "score a checkpoint on its eval data");
    evaluate->add_option("checkpoint", eval_ckpt, "checkpoint file")
        ->required()
        ->check(CLI::ExistingFile);
    evaluate->add_option("--set", eval_common.sets, "config override, key=value")->type_size(1);
    evaluate->add_option("--seed", eval_common.seed, "report seed (default: checkpoint seed)");
    evaluate->add_option("--out", eval_common.out, "write <out>/report.json");

    CommonOpts sweep_common;
    std::vector<double> sweep_pis;
    auto* sweep = app.add_subcommand("sweep", "train and evaluate one model per pi");
    add_common(sweep, sweep_common, false);
    sweep->add_option("--pi", sweep_pis, "pi grid (repeatable; default 0.2 0.3 0.5)")
        ->type_size(1);

    CommonOpts sum_common;
    std::string sum_ckpt, sum_doc;
    auto* summarize = app.add_subcommand("summarize", "summarize one document with evidence spans");
    summarize->add_option("checkpoint", sum_ckpt, "checkpoint file")
        ->required()
        ->check(CLI::ExistingFile);
    summarize->add_option("document", sum_doc, "text file to summarize")
        ->required()
        ->check(CLI::ExistingFile);
    summarize->add_option("--set", sum_common.sets, "config override, key=value (pi=... to pick the budget)")
        ->type_size(1);
    summarize->add_option("--out", sum_common.out, "write <out>/summary.json");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (*gen) {
            for (const std::string& s : gen_sets) apply_gen_override(gen_opts, s);
            return run_gen_data(gen_common, gen_opts);
        }
        if (*oracle) return run_oracle(oracle_data, oracle_common);
        if (*train) return run_train(train_common, false);
        if (*pretrain) return run_train(pre_common, true);
        if (*evaluate) return run_evaluate(eval_ckpt, eval_common);
        if (*sweep) return run_sweep(sweep_common, sweep_pis);
        if (*summarize) return run_summarize(sum_ckpt, sum_doc, sum_common);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

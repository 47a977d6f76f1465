#include "ease/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "ease/rng.hpp"
#include "ease/text.hpp"

namespace ease {

namespace {

using nlohmann::json;

[[noreturn]] void line_fail(const std::string& path, size_t line_no, const std::string& why) {
    throw std::runtime_error(path + ":" + std::to_string(line_no) + ": " + why);
}

}  // namespace

std::vector<RawExample> read_jsonl(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("read_jsonl: cannot open " + path);

    std::vector<RawExample> out;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json j = json::parse(line, nullptr, false);
        if (j.is_discarded()) line_fail(path, line_no, "invalid JSON");
        if (!j.is_object()) line_fail(path, line_no, "record is not an object");
        for (const auto& [key, value] : j.items()) {
            if (key != "source" && key != "target")
                line_fail(path, line_no, "unexpected field \"" + key + "\"");
            if (!value.is_string())
                line_fail(path, line_no, "field \"" + key + "\" is not a string");
        }
        if (!j.contains("source")) line_fail(path, line_no, "missing \"source\"");

        RawExample ex;
        ex.source = j["source"].get<std::string>();
        ex.has_target = j.contains("target");
        if (ex.has_target) ex.target = j["target"].get<std::string>();
        out.push_back(std::move(ex));
    }
    return out;
}

void write_jsonl(const std::string& path, const std::vector<RawExample>& examples) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_jsonl: cannot open " + path);
    for (const RawExample& ex : examples) {
        json j;
        j["source"] = ex.source;
        if (ex.has_target) j["target"] = ex.target;
        out << j.dump() << "\n";
    }
    if (!out) throw std::runtime_error("write_jsonl: write failed for " + path);
}

// ---------------------------------------------------------------------------
// synthetic corpus
// ---------------------------------------------------------------------------

std::vector<SyntheticDoc> generate_synthetic_corpus(const SyntheticSpec& spec) {
    if (spec.num_docs < 1) throw std::invalid_argument("gen-data: num_docs must be positive");
    if (spec.sentences_per_doc < 4)
        throw std::invalid_argument("gen-data: sentences_per_doc must be at least 4");
    if (!(spec.salient_fraction > 0.0 && spec.salient_fraction < 1.0))
        throw std::invalid_argument("gen-data: salient_fraction must lie in (0,1)");

    // budget: 6 reserved ids + 1 marker, the rest split between pools
    const int available = spec.vocab_size - static_cast<int>(k_num_reserved) - 1;
    const int filler_n = available / 2;
    const int content_n = available - filler_n;
    if (filler_n < 4 || content_n < 4)
        throw std::invalid_argument("gen-data: vocab_size " + std::to_string(spec.vocab_size) +
                                    " cannot hold disjoint filler and content pools");

    int salient_count = static_cast<int>(
        std::llround(spec.salient_fraction * spec.sentences_per_doc));
    salient_count = std::max(1, std::min(salient_count, spec.sentences_per_doc - 1));

    RngState rng = derive_stream(spec.seed, "gen-data");

    auto filler_word = [&](std::uint64_t i) { return "w" + std::to_string(i); };
    auto content_word = [&](std::uint64_t i) { return "k" + std::to_string(i); };

    std::vector<SyntheticDoc> docs;
    docs.reserve(static_cast<size_t>(spec.num_docs));
    for (int d = 0; d < spec.num_docs; ++d) {
        // choose salient positions: partial Fisher-Yates over sentence slots
        std::vector<int> slots(static_cast<size_t>(spec.sentences_per_doc));
        for (int i = 0; i < spec.sentences_per_doc; ++i) slots[static_cast<size_t>(i)] = i;
        for (int i = 0; i < salient_count; ++i) {
            std::uint64_t j =
                i + next_below(rng, static_cast<std::uint64_t>(spec.sentences_per_doc - i));
            std::swap(slots[static_cast<size_t>(i)], slots[static_cast<size_t>(j)]);
        }
        std::vector<int> salient(slots.begin(), slots.begin() + salient_count);
        std::sort(salient.begin(), salient.end());

        std::vector<std::string> sentences;
        size_t next_salient = 0;
        for (int s = 0; s < spec.sentences_per_doc; ++s) {
            bool is_salient =
                next_salient < salient.size() && salient[next_salient] == s;
            if (is_salient) ++next_salient;

            int len = 4 + static_cast<int>(next_below(rng, 4));  // 4..7 words
            std::string sent;
            if (is_salient) sent = "topic";
            for (int w = 0; w < len; ++w) {
                if (!sent.empty()) sent.push_back(' ');
                sent += is_salient
                            ? content_word(next_below(rng, static_cast<std::uint64_t>(content_n)))
                            : filler_word(next_below(rng, static_cast<std::uint64_t>(filler_n)));
            }
            sent.push_back('.');
            sentences.push_back(std::move(sent));
        }

        SyntheticDoc doc;
        doc.salient = salient;
        for (size_t s = 0; s < sentences.size(); ++s) {
            if (s) doc.example.source.push_back(' ');
            doc.example.source += sentences[s];
        }
        for (size_t i = 0; i < salient.size(); ++i) {
            if (i) doc.example.target.push_back(' ');
            doc.example.target += sentences[static_cast<size_t>(salient[i])];
        }
        doc.example.has_target = true;
        docs.push_back(std::move(doc));
    }
    return docs;
}

void write_salience_labels(const std::string& path, const std::vector<SyntheticDoc>& docs) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_salience_labels: cannot open " + path);
    for (const SyntheticDoc& doc : docs) {
        json j;
        j["salient"] = doc.salient;
        out << j.dump() << "\n";
    }
}

std::vector<std::vector<int>> read_salience_labels(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("read_salience_labels: cannot open " + path);
    std::vector<std::vector<int>> out;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json j = json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object() || !j.contains("salient") ||
            !j["salient"].is_array())
            line_fail(path, line_no, "expected {\"salient\":[...]}");
        out.push_back(j["salient"].get<std::vector<int>>());
    }
    return out;
}

}  // namespace ease

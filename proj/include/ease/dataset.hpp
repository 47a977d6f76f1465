#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace ease {

struct RawExample {
    std::string source;
    std::string target;
    bool has_target = true;
};

/// Strict JSONL reader: one JSON object per line with exactly the string
/// fields "source" and "target" ("target" may be absent for pretraining
/// files). Anything else — stray fields, wrong types, bad JSON — is an
/// error naming the line.
std::vector<RawExample> read_jsonl(const std::string& path);

/// One {"source":...,"target":...} object per line ("target" omitted when
/// absent).
void write_jsonl(const std::string& path, const std::vector<RawExample>& examples);

// ---------------------------------------------------------------------------
// synthetic corpus: filler sentences from one token pool, salient sentences
// from a disjoint content pool behind a marker token; the target is the
// salient sentences concatenated in order
// ---------------------------------------------------------------------------
struct SyntheticSpec {
    int num_docs = 0;
    int sentences_per_doc = 0;
    double salient_fraction = 0.0;
    int vocab_size = 0;
    std::uint64_t seed = 0;
};

struct SyntheticDoc {
    RawExample example;
    std::vector<int> salient;  // sentence indices, ascending
};

std::vector<SyntheticDoc> generate_synthetic_corpus(const SyntheticSpec& spec);

/// Construction labels as JSONL: {"salient":[...]} per document.
void write_salience_labels(const std::string& path, const std::vector<SyntheticDoc>& docs);
std::vector<std::vector<int>> read_salience_labels(const std::string& path);

}  // namespace ease

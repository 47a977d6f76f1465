#include <doctest.h>

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>

#include "ease/dataset.hpp"
#include "ease/text.hpp"

using namespace ease;

TEST_CASE("tokenize lowercases and splits punctuation") {
    auto toks = tokenize("The cat, sat!");
    REQUIRE(toks.size() == 5);
    CHECK(toks[0] == "the");
    CHECK(toks[1] == "cat");
    CHECK(toks[2] == ",");
    CHECK(toks[3] == "sat");
    CHECK(toks[4] == "!");
}

TEST_CASE("segment_sentences keeps delimiters and handles missing ones") {
    auto s1 = segment_sentences("A b. C d.");
    REQUIRE(s1.size() == 2);
    CHECK(s1[0] == "A b.");
    CHECK(s1[1] == "C d.");

    auto s2 = segment_sentences("no terminator");
    REQUIRE(s2.size() == 1);
    CHECK(s2[0] == "no terminator");

    CHECK(segment_sentences("Hi! Ok? Yes.").size() == 3);

    // a period inside a number is not a boundary
    CHECK(segment_sentences("pi is 3.14 ok. done.").size() == 2);

    CHECK_THROWS_AS(segment_sentences(""), std::invalid_argument);
    CHECK_THROWS_AS(segment_sentences("   "), std::invalid_argument);
}

TEST_CASE("document tokens reproduce the tokenized raw text") {
    std::string raw = "The cat sat. Dogs bark! Ok?";
    Document doc = make_document(raw);
    std::vector<std::string> flat;
    for (const auto& sent : doc.sentences) flat.insert(flat.end(), sent.begin(), sent.end());
    CHECK(flat == tokenize(raw));
}

TEST_CASE("build_vocab reserves ids 0-5 and ranks by frequency then lexicographically") {
    Vocabulary v = Vocabulary::build({"a a b"}, 8);
    CHECK(v.size() == 8);
    CHECK(v.token_of(0) == "<pad>");
    CHECK(v.token_of(5) == "<cls>");
    CHECK(v.id_of("a") == 6);
    CHECK(v.id_of("b") == 7);

    Vocabulary empty = Vocabulary::build({}, 100);
    CHECK(empty.size() == 6);

    Vocabulary tie = Vocabulary::build({"b b a a"}, 8);
    CHECK(tie.id_of("a") == 6);  // tie broken lexicographically
    CHECK(tie.id_of("b") == 7);

    CHECK_THROWS_AS(Vocabulary::build({"x"}, 5), std::invalid_argument);

    // truncation keeps the most frequent tokens
    Vocabulary trunc = Vocabulary::build({"c c c b b a"}, 8);
    CHECK(trunc.contains("c"));
    CHECK(trunc.contains("b"));
    CHECK(!trunc.contains("a"));
    CHECK(trunc.id_of("a") == k_unk_id);
}

TEST_CASE("sentence-level encoding inserts one CLS per sentence with alternating segments") {
    Vocabulary v = Vocabulary::build({"the cat sat . dogs bark ."}, 64);
    EncodedExample e = encode("The cat sat. Dogs bark.", "the cat", v, EncodeLevel::sentence);

    CHECK(e.num_sentences == 2);
    REQUIRE(e.cls_positions.size() == 2);
    CHECK(e.cls_positions[0] == 0);
    CHECK(e.source_ids[0] == k_cls_id);
    CHECK(e.source_ids[static_cast<size_t>(e.cls_positions[1])] == k_cls_id);

    // segment ids: 0 for the first sentence block, 1 for the second
    for (size_t i = 0; i < e.source_ids.size(); ++i)
        CHECK(e.segment_ids[i] == e.sentence_ids[i] % 2);

    // sentence_ids non-decreasing, CLS count equals distinct sentence count
    for (size_t i = 1; i < e.sentence_ids.size(); ++i)
        CHECK(e.sentence_ids[i] >= e.sentence_ids[i - 1]);
    CHECK(static_cast<Index>(e.cls_positions.size()) == e.num_sentences);

    // target bracketed by BOS/EOS
    REQUIRE(e.target_ids.size() == 4);
    CHECK(e.target_ids.front() == k_bos_id);
    CHECK(e.target_ids.back() == k_eos_id);
}

TEST_CASE("token-level encoding has no CLS and all-zero segments") {
    Vocabulary v = Vocabulary::build({"the cat sat . dogs bark ."}, 64);
    EncodedExample e = encode("The cat sat. Dogs bark.", "", v, EncodeLevel::token);
    CHECK(e.cls_positions.empty());
    for (Index seg : e.segment_ids) CHECK(seg == 0);
    REQUIRE(e.target_ids.size() == 2);  // empty target is just BOS EOS

    EncodedExample u = encode("zebra cat", "", v, EncodeLevel::token);
    CHECK(u.source_ids[0] == k_unk_id);  // unseen word

    CHECK_THROWS_AS(encode("   ", "", v, EncodeLevel::token), std::invalid_argument);
}

TEST_CASE("encode-decode round trip reproduces tokens up to UNK substitution") {
    Vocabulary v = Vocabulary::build({"the cat sat . quick fox ."}, 64);
    std::string source = "The cat sat. A quick fox.";
    EncodedExample e = encode(source, "", v, EncodeLevel::token);
    auto decoded = decode(e.source_ids, v);
    auto original = tokenize(source);
    REQUIRE(decoded.size() == original.size());
    for (size_t i = 0; i < decoded.size(); ++i) {
        if (v.contains(original[i]))
            CHECK(decoded[i] == original[i]);
        else
            CHECK(decoded[i] == "<unk>");
    }
}

// ---------------------------------------------------------------------------
// synthetic corpus
// ---------------------------------------------------------------------------

TEST_CASE("synthetic corpus honors the salient fraction and is seed-deterministic") {
    SyntheticSpec spec;
    spec.num_docs = 5;
    spec.sentences_per_doc = 10;
    spec.salient_fraction = 0.3;
    spec.vocab_size = 64;
    spec.seed = 17;

    auto docs = generate_synthetic_corpus(spec);
    REQUIRE(docs.size() == 5);
    for (const auto& doc : docs) {
        CHECK(doc.salient.size() == 3);  // round(0.3 * 10)
        CHECK(segment_sentences(doc.example.source).size() == 10);

        // target is the salient sentences concatenated in source order
        auto sentences = segment_sentences(doc.example.source);
        std::string expect;
        for (size_t i = 0; i < doc.salient.size(); ++i) {
            if (i) expect.push_back(' ');
            expect += sentences[static_cast<size_t>(doc.salient[i])];
        }
        CHECK(doc.example.target == expect);

        // salient sentences carry the marker token, fillers never do
        for (size_t s = 0; s < sentences.size(); ++s) {
            bool has_marker = sentences[s].rfind("topic", 0) == 0;
            bool is_salient =
                std::find(doc.salient.begin(), doc.salient.end(), static_cast<int>(s)) !=
                doc.salient.end();
            CHECK(has_marker == is_salient);
        }
    }

    auto again = generate_synthetic_corpus(spec);
    for (size_t i = 0; i < docs.size(); ++i) {
        CHECK(docs[i].example.source == again[i].example.source);
        CHECK(docs[i].example.target == again[i].example.target);
    }

    spec.seed = 18;
    auto other = generate_synthetic_corpus(spec);
    CHECK(docs[0].example.source != other[0].example.source);
}

TEST_CASE("synthetic targets are verbatim subsets of their sources") {
    SyntheticSpec spec;
    spec.num_docs = 8;
    spec.sentences_per_doc = 6;
    spec.salient_fraction = 0.4;
    spec.vocab_size = 48;
    spec.seed = 3;
    for (const auto& doc : generate_synthetic_corpus(spec)) {
        auto src = tokenize(doc.example.source);
        for (const auto& tok : tokenize(doc.example.target))
            CHECK(std::find(src.begin(), src.end(), tok) != src.end());
    }
}

TEST_CASE("synthetic generator rejects bad specs") {
    SyntheticSpec spec;
    spec.num_docs = 1;
    spec.sentences_per_doc = 10;
    spec.salient_fraction = 0.3;
    spec.vocab_size = 10;  // cannot hold two disjoint pools
    spec.seed = 1;
    CHECK_THROWS_AS(generate_synthetic_corpus(spec), std::invalid_argument);

    spec.vocab_size = 64;
    spec.sentences_per_doc = 3;
    CHECK_THROWS_AS(generate_synthetic_corpus(spec), std::invalid_argument);

    spec.sentences_per_doc = 10;
    spec.salient_fraction = 1.0;
    CHECK_THROWS_AS(generate_synthetic_corpus(spec), std::invalid_argument);
}

// ---------------------------------------------------------------------------
// dataset files
// ---------------------------------------------------------------------------

namespace {

struct TempFile {
    std::string path;
    explicit TempFile(const std::string& name) : path("/tmp/ease_test_" + name) {}
    ~TempFile() { std::remove(path.c_str()); }
};

}  // namespace

TEST_CASE("jsonl round trip preserves examples") {
    TempFile f("roundtrip.jsonl");
    std::vector<RawExample> examples;
    examples.push_back({"a b. c d.", "a b.", true});
    examples.push_back({"quote \" and \\ backslash.", "", true});
    RawExample no_target;
    no_target.source = "pretrain only.";
    no_target.has_target = false;
    examples.push_back(no_target);

    write_jsonl(f.path, examples);
    auto back = read_jsonl(f.path);
    REQUIRE(back.size() == 3);
    CHECK(back[0].source == examples[0].source);
    CHECK(back[0].target == examples[0].target);
    CHECK(back[1].source == examples[1].source);
    CHECK(back[2].has_target == false);
}

TEST_CASE("jsonl reader is strict about the record schema") {
    TempFile f("strict.jsonl");
    auto write_line = [&](const std::string& line) {
        std::ofstream out(f.path);
        out << line << "\n";
    };

    write_line("not json at all");
    CHECK_THROWS_AS(read_jsonl(f.path), std::runtime_error);

    write_line(R"(["array","not","object"])");
    CHECK_THROWS_AS(read_jsonl(f.path), std::runtime_error);

    write_line(R"({"source":"x.","target":"y.","extra":1})");
    CHECK_THROWS_AS(read_jsonl(f.path), std::runtime_error);

    write_line(R"({"source":42,"target":"y."})");
    CHECK_THROWS_AS(read_jsonl(f.path), std::runtime_error);

    write_line(R"({"target":"y."})");
    CHECK_THROWS_AS(read_jsonl(f.path), std::runtime_error);

    write_line(R"({"source":"x.","target":"y."})");
    auto ok = read_jsonl(f.path);
    REQUIRE(ok.size() == 1);
    CHECK(ok[0].source == "x.");
}

TEST_CASE("tokenize_with_spans points every token back into the source") {
    std::string text = "The cat, sat!";
    auto spans = tokenize_with_spans(text);
    REQUIRE(spans.size() == 5);
    CHECK(spans[0].first == "the");
    CHECK(spans[1].first == "cat");
    CHECK(spans[2].first == ",");
    CHECK(spans[3].first == "sat");
    CHECK(spans[4].first == "!");
    for (auto& [tok, span] : spans) {
        std::string raw = text.substr(static_cast<size_t>(span.begin),
                                      static_cast<size_t>(span.end - span.begin));
        // span covers the original-cased characters of the token
        REQUIRE(raw.size() == tok.size());
        for (size_t i = 0; i < raw.size(); ++i)
            CHECK(static_cast<char>(std::tolower(static_cast<unsigned char>(raw[i]))) == tok[i]);
    }
    CHECK(spans[2].second.begin == 7);
    CHECK(spans[2].second.end == 8);
}

TEST_CASE("segment_sentence_spans substr-reproduces segment_sentences") {
    std::string text = "  First one.  Second!  Is this third? trailing bit";
    auto sents = segment_sentences(text);
    auto spans = segment_sentence_spans(text);
    REQUIRE(sents.size() == spans.size());
    REQUIRE(sents.size() == 4);
    for (size_t i = 0; i < sents.size(); ++i) {
        CHECK(text.substr(static_cast<size_t>(spans[i].begin),
                          static_cast<size_t>(spans[i].end - spans[i].begin)) == sents[i]);
    }
    CHECK(sents[0] == "First one.");
    CHECK(sents[3] == "trailing bit");
}

#include "ease/text.hpp"

#include <algorithm>
#include <cctype>
#include <stdexcept>

namespace ease {

namespace {

bool is_space_char(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

bool is_punct_char(char c) {
    unsigned char u = static_cast<unsigned char>(c);
    return u < 128 && std::ispunct(u) != 0;
}

char lower_char(char c) {
    return static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
}

bool is_blank(const std::string& text) {
    return std::all_of(text.begin(), text.end(), is_space_char);
}

}  // namespace

const std::vector<std::string>& reserved_tokens() {
    static const std::vector<std::string> toks = {"<pad>", "<unk>", "<bos>",
                                                  "<eos>", "<mask>", "<cls>"};
    return toks;
}

std::vector<std::pair<std::string, Span>> tokenize_with_spans(const std::string& text) {
    std::vector<std::pair<std::string, Span>> out;
    std::string word;
    size_t word_begin = 0;
    auto flush = [&](size_t end) {
        if (!word.empty()) {
            out.push_back({word, {static_cast<Index>(word_begin), static_cast<Index>(end)}});
            word.clear();
        }
    };
    for (size_t i = 0; i < text.size(); ++i) {
        char c = text[i];
        if (is_space_char(c)) {
            flush(i);
        } else if (is_punct_char(c)) {
            flush(i);
            out.push_back({std::string(1, c),
                           {static_cast<Index>(i), static_cast<Index>(i + 1)}});
        } else {
            if (word.empty()) word_begin = i;
            word.push_back(lower_char(c));
        }
    }
    flush(text.size());
    return out;
}

std::vector<std::string> tokenize(const std::string& text) {
    std::vector<std::string> out;
    for (auto& [tok, span] : tokenize_with_spans(text)) out.push_back(std::move(tok));
    return out;
}

std::vector<Span> segment_sentence_spans(const std::string& text) {
    if (text.empty() || is_blank(text))
        throw std::invalid_argument("segment_sentences: empty text");

    std::vector<Span> spans;
    auto push_trimmed = [&](size_t begin, size_t end) {
        while (begin < end && is_space_char(text[begin])) ++begin;
        while (end > begin && is_space_char(text[end - 1])) --end;
        if (begin < end)
            spans.push_back({static_cast<Index>(begin), static_cast<Index>(end)});
    };
    size_t start = 0;
    for (size_t i = 0; i < text.size(); ++i) {
        char c = text[i];
        bool terminal = (c == '.' || c == '!' || c == '?') &&
                        (i + 1 == text.size() || is_space_char(text[i + 1]));
        if (!terminal) continue;
        push_trimmed(start, i + 1);
        start = i + 1;
    }
    push_trimmed(start, text.size());
    return spans;
}

std::vector<std::string> segment_sentences(const std::string& text) {
    std::vector<std::string> sentences;
    for (const Span& s : segment_sentence_spans(text))
        sentences.push_back(text.substr(static_cast<size_t>(s.begin),
                                        static_cast<size_t>(s.end - s.begin)));
    return sentences;
}

Document make_document(const std::string& text) {
    Document doc;
    doc.raw = text;
    for (const std::string& sent : segment_sentences(text)) {
        std::vector<std::string> toks = tokenize(sent);
        if (!toks.empty()) doc.sentences.push_back(std::move(toks));
    }
    if (doc.sentences.empty())
        throw std::invalid_argument("make_document: text tokenizes to nothing");
    return doc;
}

// ---------------------------------------------------------------------------
// vocabulary
// ---------------------------------------------------------------------------

Vocabulary Vocabulary::build(const std::vector<std::string>& texts, size_t max_size) {
    if (max_size < static_cast<size_t>(k_num_reserved))
        throw std::invalid_argument("build_vocab: max_size " + std::to_string(max_size) +
                                    " cannot hold the " + std::to_string(k_num_reserved) +
                                    " reserved tokens");
    std::map<std::string, std::int64_t> freq;
    for (const std::string& text : texts)
        for (const std::string& tok : tokenize(text)) freq[tok]++;

    // descending frequency, ties broken lexicographically; std::map already
    // iterates tokens in lexicographic order, so a stable sort on count alone
    // preserves the tie-break
    std::vector<std::pair<std::string, std::int64_t>> ranked(freq.begin(), freq.end());
    std::stable_sort(ranked.begin(), ranked.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });

    Vocabulary v;
    v.id_to_token_ = reserved_tokens();
    for (const auto& [tok, count] : ranked) {
        if (v.id_to_token_.size() >= max_size) break;
        v.id_to_token_.push_back(tok);
    }
    for (size_t i = 0; i < v.id_to_token_.size(); ++i)
        v.token_to_id_[v.id_to_token_[i]] = static_cast<Index>(i);
    return v;
}

Index Vocabulary::id_of(const std::string& token) const {
    auto it = token_to_id_.find(token);
    return it == token_to_id_.end() ? k_unk_id : it->second;
}

const std::string& Vocabulary::token_of(Index id) const {
    if (id < 0 || id >= size())
        throw std::invalid_argument("vocabulary: id " + std::to_string(id) +
                                    " outside vocabulary of size " + std::to_string(size()));
    return id_to_token_[static_cast<size_t>(id)];
}

bool Vocabulary::contains(const std::string& token) const {
    return token_to_id_.count(token) != 0;
}

// ---------------------------------------------------------------------------
// encoding
// ---------------------------------------------------------------------------

EncodedExample encode(const std::string& source_text, const std::string& target_text,
                      const Vocabulary& vocab, EncodeLevel level) {
    Document doc = make_document(source_text);

    EncodedExample enc;
    enc.level = level;
    enc.num_sentences = static_cast<Index>(doc.sentences.size());
    for (size_t s = 0; s < doc.sentences.size(); ++s) {
        Index seg = level == EncodeLevel::sentence ? static_cast<Index>(s % 2) : 0;
        if (level == EncodeLevel::sentence) {
            enc.cls_positions.push_back(static_cast<Index>(enc.source_ids.size()));
            enc.source_ids.push_back(k_cls_id);
            enc.sentence_ids.push_back(static_cast<Index>(s));
            enc.segment_ids.push_back(seg);
        }
        for (const std::string& tok : doc.sentences[s]) {
            enc.source_ids.push_back(vocab.id_of(tok));
            enc.sentence_ids.push_back(static_cast<Index>(s));
            enc.segment_ids.push_back(seg);
        }
    }

    enc.target_ids.push_back(k_bos_id);
    if (!target_text.empty() && !std::all_of(target_text.begin(), target_text.end(),
                                             [](char c) { return c == ' '; }))
        for (const std::string& tok : tokenize(target_text))
            enc.target_ids.push_back(vocab.id_of(tok));
    enc.target_ids.push_back(k_eos_id);
    return enc;
}

std::vector<std::string> decode(const std::vector<Index>& ids, const Vocabulary& vocab) {
    std::vector<std::string> out;
    out.reserve(ids.size());
    for (Index id : ids) out.push_back(vocab.token_of(id));
    return out;
}

std::string join_tokens(const std::vector<std::string>& tokens) {
    std::string out;
    for (size_t i = 0; i < tokens.size(); ++i) {
        if (i) out.push_back(' ');
        out += tokens[i];
    }
    return out;
}

}  // namespace ease

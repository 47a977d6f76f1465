#pragma once

#include "ease/tensor.hpp"

#include <map>
#include <string>
#include <vector>

namespace ease {

// reserved vocabulary slots, fixed for every vocabulary
constexpr Index k_pad_id = 0;
constexpr Index k_unk_id = 1;
constexpr Index k_bos_id = 2;
constexpr Index k_eos_id = 3;
constexpr Index k_mask_id = 4;
constexpr Index k_cls_id = 5;
constexpr Index k_num_reserved = 6;

const std::vector<std::string>& reserved_tokens();

/// Half-open character range into the raw text (for evidence highlighting).
struct Span {
    Index begin = 0;
    Index end = 0;
};

/// Lowercased whitespace-plus-punctuation tokenization: words are maximal
/// runs of non-space non-punctuation characters, each punctuation character
/// is its own token.
std::vector<std::string> tokenize(const std::string& text);

/// tokenize plus the source character range of every token (the token text
/// is lowercased, the span indexes the original).
std::vector<std::pair<std::string, Span>> tokenize_with_spans(const std::string& text);

/// Split at '.', '!' or '?' followed by whitespace or end of text; the
/// delimiter stays with its sentence. A text with no delimiter is one
/// sentence. Throws on empty/blank text.
std::vector<std::string> segment_sentences(const std::string& text);

/// Character ranges of the sentences segment_sentences returns, such that
/// text.substr(span) reproduces each sentence.
std::vector<Span> segment_sentence_spans(const std::string& text);

struct Document {
    std::string raw;
    std::vector<std::vector<std::string>> sentences;  // tokens per sentence
};

/// Segments and tokenizes; drops sentences that tokenize to nothing.
Document make_document(const std::string& text);

// ---------------------------------------------------------------------------
// vocabulary: reserved tokens first, then corpus tokens by descending
// frequency with lexicographic tie-break
// ---------------------------------------------------------------------------
class Vocabulary {
public:
    static Vocabulary build(const std::vector<std::string>& texts, size_t max_size);

    Index id_of(const std::string& token) const;  // UNK for out-of-vocabulary
    const std::string& token_of(Index id) const;
    bool contains(const std::string& token) const;
    Index size() const { return static_cast<Index>(id_to_token_.size()); }

private:
    std::vector<std::string> id_to_token_;
    std::map<std::string, Index> token_to_id_;
};

// ---------------------------------------------------------------------------
// encoding
// ---------------------------------------------------------------------------
enum class EncodeLevel { token, sentence };

struct EncodedExample {
    EncodeLevel level = EncodeLevel::sentence;
    std::vector<Index> source_ids;
    std::vector<Index> sentence_ids;    // per-token sentence index, non-decreasing
    std::vector<Index> cls_positions;   // sentence level only
    std::vector<Index> segment_ids;     // sentence index mod 2; zeros at token level
    std::vector<Index> target_ids;      // bracketed by BOS/EOS
    Index num_sentences = 0;
};

/// Sentence level inserts one CLS at the front of each sentence and
/// alternates segment ids mod 2; token level has no CLS and all-zero
/// segments. The target (possibly empty) is bracketed by BOS/EOS.
/// Throws if the source tokenizes to nothing.
EncodedExample encode(const std::string& source_text, const std::string& target_text,
                      const Vocabulary& vocab, EncodeLevel level);

/// Ids back to tokens; reserved ids render as their token strings.
std::vector<std::string> decode(const std::vector<Index>& ids, const Vocabulary& vocab);

/// Tokens joined by single spaces.
std::string join_tokens(const std::vector<std::string>& tokens);

}  // namespace ease

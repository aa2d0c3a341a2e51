#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

namespace skmt {

// A token is a non-empty UTF-8 string without whitespace.
using Token = std::string;
using TokenId = std::int32_t;

struct SentencePair {
    std::uint32_t id = 0;  // insertion order, unique within a corpus
    std::vector<Token> source;
    std::vector<Token> target;
};

enum class CorpusFormat { jsonl, tsv };

// Splits on runs of Unicode whitespace. Empty input yields an empty
// sequence. Lowercasing (ASCII only) is applied when requested.
std::vector<Token> tokenize(const std::string& text, bool lowercase = false);

class ParallelCorpus {
public:
    ParallelCorpus() = default;

    // Appends a pair, assigning the next id. Not thread safe; a corpus
    // is immutable once shared across readers.
    const SentencePair& add_pair(std::vector<Token> source, std::vector<Token> target);

    const std::vector<SentencePair>& pairs() const { return pairs_; }
    const SentencePair& pair(std::uint32_t id) const { return pairs_.at(id); }
    std::size_t size() const { return pairs_.size(); }
    bool empty() const { return pairs_.empty(); }

    // Exact multiset counts over the target side.
    const std::unordered_map<Token, std::uint64_t>& token_counts() const { return token_counts_; }
    std::uint64_t target_count(const Token& t) const;

private:
    std::vector<SentencePair> pairs_;
    std::unordered_map<Token, std::uint64_t> token_counts_;
};

// Reads a bilingual corpus, one pair per non-blank line.
//   tsv:   source<TAB>target
//   jsonl: {"src": "...", "tgt": "..."}
// Throws std::runtime_error naming the line on malformed lines or when
// a side is empty after tokenization.
ParallelCorpus load_corpus(const std::string& path, CorpusFormat format, bool lowercase = false);

// Writes the corpus back out in the given format (inverse of load_corpus).
void save_corpus(const ParallelCorpus& corpus, const std::string& path, CorpusFormat format);

class Vocabulary {
public:
    static constexpr TokenId kBos = 0;
    static constexpr TokenId kEos = 1;
    static constexpr TokenId kUnk = 2;
    static constexpr TokenId kPad = 3;

    Vocabulary();

    // Adds a token if absent; returns its id.
    TokenId add(const Token& t);

    // Id for a token, or kUnk when not present.
    TokenId id_or_unk(const Token& t) const;
    bool contains(const Token& t) const;
    const Token& token(TokenId id) const;
    std::size_t size() const { return id_to_token_.size(); }

    std::vector<TokenId> ids_or_unk(const std::vector<Token>& tokens) const;
    std::vector<Token> tokens(const std::vector<TokenId>& ids) const;

    // JSON persistence (token -> id map; byte-stable for a given corpus).
    void save(const std::string& path) const;
    static Vocabulary load(const std::string& path);

private:
    std::unordered_map<Token, TokenId> token_to_id_;
    std::vector<Token> id_to_token_;
};

// Specials first (ids 0-3), then source and target tokens of each pair
// in first-appearance order.
Vocabulary build_vocabulary(const ParallelCorpus& corpus);

}  // namespace skmt

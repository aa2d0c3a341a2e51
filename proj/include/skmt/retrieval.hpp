#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "skmt/corpus.hpp"

namespace skmt {

struct RetrievalConfig {
    int top_n = 64;       // full-text candidates kept before re-ranking
    int m = 2;            // reference pairs kept after re-ranking
    double bm25_k1 = 1.2;
    double bm25_b = 0.75;
};

struct ScoredCandidate {
    std::uint32_t pair_id = 0;
    double bm25 = 0.0;
    double sim = 0.0;  // filled by the re-ranking stage, in [0, 1]
};

struct Posting {
    std::uint32_t pair_id;
    std::uint32_t tf;
};

// Full-text index over corpus source sides. Supports many concurrent
// readers; insertion requires exclusive access.
struct InvertedIndex {
    // Postings are kept sorted by pair id, so an index grown by
    // insertions is identical to one built in a single pass.
    std::unordered_map<Token, std::vector<Posting>> postings;
    std::unordered_map<std::uint32_t, std::uint32_t> doc_length;
    std::uint64_t total_length = 0;

    std::size_t doc_count() const { return doc_length.size(); }
    std::size_t df(const Token& t) const {
        auto it = postings.find(t);
        return it == postings.end() ? 0 : it->second.size();
    }
};

InvertedIndex build_index(const ParallelCorpus& corpus);

// Adds one pair to the index. Throws on a duplicate id. Afterwards
// searches match a from-scratch build over the extended corpus exactly.
void insert_pair(InvertedIndex& index, const SentencePair& pair);

// Okapi BM25 over pairs sharing at least one query token, sorted by
// (score desc, pair id asc) and truncated to top_n. Repeated query
// tokens are counted once. Throws "empty index" when doc_count is 0.
std::vector<ScoredCandidate> bm25_search(const InvertedIndex& index,
                                         const std::vector<Token>& query, int top_n,
                                         double k1 = 1.2, double b = 0.75);

// Token-level Levenshtein distance, unit-cost edits.
std::size_t edit_distance(const std::vector<Token>& a, const std::vector<Token>& b);

// 1 - dist(x, xi) / max(|x|, |xi|). Throws when both are empty.
double rerank_similarity(const std::vector<Token>& x, const std::vector<Token>& xi);

// Full retrieval stage: BM25 top_n, similarity re-rank, keep the first
// cfg.m pairs ordered by (sim desc, bm25 desc, pair id asc). Returns
// fewer than m when fewer candidates overlap; empty on an empty index.
std::vector<ScoredCandidate> retrieve_references(const InvertedIndex& index,
                                                 const std::vector<Token>& x,
                                                 const ParallelCorpus& corpus,
                                                 const RetrievalConfig& cfg);

// Versioned binary persistence (magic "SKIX1", little-endian integers,
// length-prefixed token strings, tokens in sorted order).
void save_index(const InvertedIndex& index, const std::string& path);
InvertedIndex load_index(const std::string& path);

// Debug export.
std::string index_to_json(const InvertedIndex& index);

}  // namespace skmt

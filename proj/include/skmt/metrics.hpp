#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "skmt/corpus.hpp"
#include "skmt/retrieval.hpp"

namespace skmt {

struct MetricReport {
    double bleu = 0.0;  // percent
    double chrf = 0.0;  // percent
};

// Corpus BLEU: geometric mean of 1-4-gram modified precisions times the
// brevity penalty, times 100. No smoothing: any zero precision makes
// the score 0. Single reference per hypothesis.
double corpus_bleu(const std::vector<std::vector<Token>>& hyps,
                   const std::vector<std::vector<Token>>& refs);

// Character n-gram F-score, n = 1..6, beta = 2, whitespace excluded
// (n-grams run across token boundaries), macro-averaged over orders,
// times 100. Orders where neither side has n-grams are skipped.
double chrf(const std::vector<std::vector<Token>>& hyps,
            const std::vector<std::vector<Token>>& refs);

struct FrequencyBucket {
    std::uint64_t lo = 0;                      // inclusive
    std::optional<std::uint64_t> hi = {};      // exclusive; absent = unbounded
    std::uint64_t matched = 0;
    std::uint64_t total = 0;

    double accuracy() const { return total == 0 ? 0.0 : static_cast<double>(matched) / total; }
    std::string label() const;
};

using FrequencyBucketTable = std::vector<FrequencyBucket>;

// Buckets reference tokens by their target-side frequency in the
// training corpus (unseen tokens fall in the lowest bucket); matched is
// the clipped bag intersection between hypothesis and reference tokens
// within each bucket. Edges are strictly increasing cut points: buckets
// are [0, e1), [e1, e2), ..., [en, inf).
FrequencyBucketTable word_accuracy_by_frequency(const std::vector<std::vector<Token>>& hyps,
                                                const std::vector<std::vector<Token>>& refs,
                                                const ParallelCorpus& train,
                                                const std::vector<std::uint64_t>& bucket_edges);

struct RecallBucket {
    std::string label;
    std::uint64_t matched = 0;
    std::uint64_t total = 0;

    bool defined() const { return total > 0; }
    double recall() const { return total == 0 ? 0.0 : static_cast<double>(matched) / total; }
};

struct RIndicatorReport {
    // Buckets over the prior-occurrence count i: {0}, {1}, [2,5), [5,9), [9, inf).
    std::vector<RecallBucket> buckets;

    const RecallBucket& bucket(std::size_t i) const { return buckets.at(i); }
};

// Recall of reference tokens grouped by how often they occurred in the
// previous references of the document. For sentence j, the unique
// tokens of ref_j are assigned the total number of occurrences of that
// token over refs 1..j-1; a token is recalled when it appears in
// hypothesis j. Denominators depend only on the references.
RIndicatorReport r_indicator(const std::vector<std::vector<Token>>& doc_hyps,
                             const std::vector<std::vector<Token>>& doc_refs);

struct SimilarityHistogram {
    // 10 bins: [0, 0.1), ..., [0.8, 0.9), [0.9, 1.0].
    std::vector<std::uint64_t> counts = std::vector<std::uint64_t>(10, 0);
    std::uint64_t total = 0;

    double percent(std::size_t bin) const {
        return total == 0 ? 0.0 : 100.0 * static_cast<double>(counts.at(bin)) / total;
    }
};

// Per test sentence, the maximum re-ranking similarity against the
// corpus: over the top_n full-text candidates by default, or over every
// pair when exact is set.
SimilarityHistogram corpus_similarity_histogram(const InvertedIndex& index,
                                                const ParallelCorpus& corpus,
                                                const std::vector<std::vector<Token>>& test_sources,
                                                int top_n = 64, bool exact = false);

}  // namespace skmt

#include "skmt/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace skmt {

namespace {

void require_aligned(std::size_t h, std::size_t r) {
    if (h != r) {
        throw std::invalid_argument("hypothesis/reference counts differ: " + std::to_string(h) +
                                    " vs " + std::to_string(r));
    }
    if (h == 0) {
        throw std::invalid_argument("need at least one sentence");
    }
}

using NgramCounts = std::unordered_map<std::string, std::uint64_t>;

// Token n-grams joined with an unlikely separator byte.
NgramCounts token_ngrams(const std::vector<Token>& tokens, std::size_t n) {
    NgramCounts counts;
    if (tokens.size() < n) {
        return counts;
    }
    for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
        std::string key;
        for (std::size_t k = 0; k < n; ++k) {
            if (k > 0) key.push_back('\x1f');
            key += tokens[i + k];
        }
        ++counts[key];
    }
    return counts;
}

std::uint64_t clipped_matches(const NgramCounts& hyp, const NgramCounts& ref) {
    std::uint64_t m = 0;
    for (const auto& [gram, count] : hyp) {
        auto it = ref.find(gram);
        if (it != ref.end()) {
            m += std::min(count, it->second);
        }
    }
    return m;
}

}  // namespace

double corpus_bleu(const std::vector<std::vector<Token>>& hyps,
                   const std::vector<std::vector<Token>>& refs) {
    require_aligned(hyps.size(), refs.size());
    constexpr std::size_t kMaxOrder = 4;
    std::uint64_t matched[kMaxOrder] = {0, 0, 0, 0};
    std::uint64_t total[kMaxOrder] = {0, 0, 0, 0};
    std::uint64_t hyp_len = 0;
    std::uint64_t ref_len = 0;
    for (std::size_t s = 0; s < hyps.size(); ++s) {
        hyp_len += hyps[s].size();
        ref_len += refs[s].size();
        for (std::size_t n = 1; n <= kMaxOrder; ++n) {
            const NgramCounts h = token_ngrams(hyps[s], n);
            const NgramCounts r = token_ngrams(refs[s], n);
            matched[n - 1] += clipped_matches(h, r);
            if (hyps[s].size() >= n) {
                total[n - 1] += hyps[s].size() - n + 1;
            }
        }
    }
    double log_precision = 0.0;
    for (std::size_t n = 0; n < kMaxOrder; ++n) {
        if (matched[n] == 0 || total[n] == 0) {
            return 0.0;
        }
        log_precision += std::log(static_cast<double>(matched[n]) / static_cast<double>(total[n]));
    }
    if (hyp_len == 0) {
        return 0.0;
    }
    const double bp =
        hyp_len >= ref_len
            ? 1.0
            : std::exp(1.0 - static_cast<double>(ref_len) / static_cast<double>(hyp_len));
    return 100.0 * bp * std::exp(log_precision / kMaxOrder);
}

namespace {

// Code points of all tokens, concatenated; whitespace never appears
// inside a token, so this is the sentence with whitespace removed.
std::vector<char32_t> sentence_codepoints(const std::vector<Token>& tokens) {
    std::vector<char32_t> out;
    for (const Token& t : tokens) {
        std::size_t i = 0;
        while (i < t.size()) {
            const unsigned char b0 = static_cast<unsigned char>(t[i]);
            char32_t cp = b0;
            int len = 1;
            if ((b0 & 0xE0) == 0xC0) {
                len = 2;
                cp = b0 & 0x1F;
            } else if ((b0 & 0xF0) == 0xE0) {
                len = 3;
                cp = b0 & 0x0F;
            } else if ((b0 & 0xF8) == 0xF0) {
                len = 4;
                cp = b0 & 0x07;
            }
            if (len > 1 && i + static_cast<std::size_t>(len) <= t.size()) {
                for (int k = 1; k < len; ++k) {
                    cp = (cp << 6) | (static_cast<unsigned char>(t[i + static_cast<std::size_t>(k)]) & 0x3F);
                }
                i += static_cast<std::size_t>(len);
            } else {
                ++i;
            }
            out.push_back(cp);
        }
    }
    return out;
}

using CharNgramCounts = std::map<std::u32string, std::uint64_t>;

CharNgramCounts char_ngrams(const std::vector<char32_t>& cps, std::size_t n) {
    CharNgramCounts counts;
    if (cps.size() < n) {
        return counts;
    }
    for (std::size_t i = 0; i + n <= cps.size(); ++i) {
        ++counts[std::u32string(cps.begin() + static_cast<std::ptrdiff_t>(i),
                                cps.begin() + static_cast<std::ptrdiff_t>(i + n))];
    }
    return counts;
}

}  // namespace

double chrf(const std::vector<std::vector<Token>>& hyps,
            const std::vector<std::vector<Token>>& refs) {
    require_aligned(hyps.size(), refs.size());
    constexpr std::size_t kMaxOrder = 6;
    constexpr double kBetaSq = 4.0;  // beta = 2: recall weighted twice as much
    std::uint64_t matched[kMaxOrder] = {};
    std::uint64_t hyp_total[kMaxOrder] = {};
    std::uint64_t ref_total[kMaxOrder] = {};
    for (std::size_t s = 0; s < hyps.size(); ++s) {
        const std::vector<char32_t> h_cps = sentence_codepoints(hyps[s]);
        const std::vector<char32_t> r_cps = sentence_codepoints(refs[s]);
        for (std::size_t n = 1; n <= kMaxOrder; ++n) {
            const CharNgramCounts h = char_ngrams(h_cps, n);
            const CharNgramCounts r = char_ngrams(r_cps, n);
            for (const auto& [gram, count] : h) {
                hyp_total[n - 1] += count;
                auto it = r.find(gram);
                if (it != r.end()) {
                    matched[n - 1] += std::min(count, it->second);
                }
            }
            for (const auto& [gram, count] : r) {
                ref_total[n - 1] += count;
            }
        }
    }
    double f_sum = 0.0;
    std::size_t orders = 0;
    for (std::size_t n = 0; n < kMaxOrder; ++n) {
        if (hyp_total[n] == 0 && ref_total[n] == 0) {
            continue;  // order not observable on this corpus
        }
        ++orders;
        const double p =
            hyp_total[n] == 0 ? 0.0 : static_cast<double>(matched[n]) / static_cast<double>(hyp_total[n]);
        const double r =
            ref_total[n] == 0 ? 0.0 : static_cast<double>(matched[n]) / static_cast<double>(ref_total[n]);
        const double den = kBetaSq * p + r;
        f_sum += den > 0.0 ? (1.0 + kBetaSq) * p * r / den : 0.0;
    }
    return orders == 0 ? 0.0 : 100.0 * f_sum / static_cast<double>(orders);
}

std::string FrequencyBucket::label() const {
    std::ostringstream os;
    if (hi.has_value()) {
        os << "[" << lo << "," << *hi << ")";
    } else {
        os << "[" << lo << ",inf)";
    }
    return os.str();
}

FrequencyBucketTable word_accuracy_by_frequency(const std::vector<std::vector<Token>>& hyps,
                                                const std::vector<std::vector<Token>>& refs,
                                                const ParallelCorpus& train,
                                                const std::vector<std::uint64_t>& bucket_edges) {
    require_aligned(hyps.size(), refs.size());
    for (std::size_t i = 1; i < bucket_edges.size(); ++i) {
        if (bucket_edges[i] <= bucket_edges[i - 1]) {
            throw std::invalid_argument("bucket edges must be strictly increasing");
        }
    }
    FrequencyBucketTable table;
    std::uint64_t lo = 0;
    for (const std::uint64_t e : bucket_edges) {
        table.push_back(FrequencyBucket{lo, e, 0, 0});
        lo = e;
    }
    table.push_back(FrequencyBucket{lo, std::nullopt, 0, 0});

    const auto bucket_of = [&](const Token& t) -> std::size_t {
        const std::uint64_t freq = train.target_count(t);
        std::size_t b = 0;
        while (b < bucket_edges.size() && freq >= bucket_edges[b]) {
            ++b;
        }
        return b;
    };

    for (std::size_t s = 0; s < hyps.size(); ++s) {
        // Per-bucket token bags for this sentence.
        std::vector<std::unordered_map<Token, std::uint64_t>> ref_bags(table.size());
        std::vector<std::unordered_map<Token, std::uint64_t>> hyp_bags(table.size());
        for (const Token& t : refs[s]) {
            const std::size_t b = bucket_of(t);
            ++ref_bags[b][t];
            ++table[b].total;
        }
        for (const Token& t : hyps[s]) {
            ++hyp_bags[bucket_of(t)][t];
        }
        for (std::size_t b = 0; b < table.size(); ++b) {
            for (const auto& [token, count] : ref_bags[b]) {
                auto it = hyp_bags[b].find(token);
                if (it != hyp_bags[b].end()) {
                    table[b].matched += std::min(count, it->second);
                }
            }
        }
    }
    return table;
}

RIndicatorReport r_indicator(const std::vector<std::vector<Token>>& doc_hyps,
                             const std::vector<std::vector<Token>>& doc_refs) {
    require_aligned(doc_hyps.size(), doc_refs.size());
    RIndicatorReport report;
    report.buckets = {RecallBucket{"R0", 0, 0}, RecallBucket{"R1", 0, 0},
                      RecallBucket{"R2-5", 0, 0}, RecallBucket{"R5-9", 0, 0},
                      RecallBucket{"R9+", 0, 0}};
    // Prior-count bucket: {0}, {1}, [2,5), [5,9), [9, inf).
    const auto bucket_of = [](std::uint64_t i) -> std::size_t {
        if (i == 0) return 0;
        if (i == 1) return 1;
        if (i < 5) return 2;
        if (i < 9) return 3;
        return 4;
    };

    std::unordered_map<Token, std::uint64_t> history;  // occurrences over refs seen so far
    for (std::size_t j = 0; j < doc_refs.size(); ++j) {
        std::unordered_map<Token, bool> hyp_has;
        for (const Token& t : doc_hyps[j]) {
            hyp_has[t] = true;
        }
        std::unordered_map<Token, bool> seen_in_ref;
        for (const Token& t : doc_refs[j]) {
            if (seen_in_ref.count(t)) {
                continue;  // unique tokens of the reference
            }
            seen_in_ref[t] = true;
            const auto it = history.find(t);
            const std::uint64_t prior = it == history.end() ? 0 : it->second;
            RecallBucket& b = report.buckets[bucket_of(prior)];
            ++b.total;
            if (hyp_has.count(t)) {
                ++b.matched;
            }
        }
        for (const Token& t : doc_refs[j]) {
            ++history[t];
        }
    }
    return report;
}

SimilarityHistogram corpus_similarity_histogram(const InvertedIndex& index,
                                                const ParallelCorpus& corpus,
                                                const std::vector<std::vector<Token>>& test_sources,
                                                int top_n, bool exact) {
    SimilarityHistogram hist;
    for (const std::vector<Token>& x : test_sources) {
        double best = 0.0;
        if (exact) {
            for (const SentencePair& p : corpus.pairs()) {
                best = std::max(best, rerank_similarity(x, p.source));
            }
        } else if (index.doc_count() > 0) {
            for (const ScoredCandidate& c : bm25_search(index, x, top_n)) {
                best = std::max(best, rerank_similarity(x, corpus.pair(c.pair_id).source));
            }
        }
        const std::size_t bin = std::min<std::size_t>(9, static_cast<std::size_t>(best * 10.0));
        ++hist.counts[bin];
        ++hist.total;
    }
    return hist;
}

}  // namespace skmt

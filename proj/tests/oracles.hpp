#pragma once

// Independent reference computations the tests check the implementation
// against. These deliberately take the slow direct route (full scans,
// full DP matrices, literal formula evaluation) and share no code with
// the library paths they verify.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "skmt/corpus.hpp"
#include "skmt/datastore.hpp"
#include "skmt/retrieval.hpp"

namespace oracle {

// Okapi BM25 by full scan: scores every pair sharing at least one
// query token, sorted by (score desc, id asc).
inline std::vector<skmt::ScoredCandidate> bm25_full_scan(const skmt::ParallelCorpus& corpus,
                                                         const std::vector<skmt::Token>& query,
                                                         double k1 = 1.2, double b = 0.75) {
    const double n_docs = static_cast<double>(corpus.size());
    double total_len = 0.0;
    for (const auto& p : corpus.pairs()) {
        total_len += static_cast<double>(p.source.size());
    }
    const double avg_len = total_len / n_docs;

    std::vector<skmt::Token> terms;
    for (const auto& t : query) {
        if (std::find(terms.begin(), terms.end(), t) == terms.end()) {
            terms.push_back(t);
        }
    }
    std::map<skmt::Token, double> df;
    for (const auto& t : terms) {
        for (const auto& p : corpus.pairs()) {
            if (std::find(p.source.begin(), p.source.end(), t) != p.source.end()) {
                df[t] += 1.0;
            }
        }
    }

    std::vector<skmt::ScoredCandidate> out;
    for (const auto& p : corpus.pairs()) {
        double score = 0.0;
        bool overlaps = false;
        for (const auto& t : terms) {
            const double tf = static_cast<double>(std::count(p.source.begin(), p.source.end(), t));
            if (tf == 0.0) {
                continue;
            }
            overlaps = true;
            const double idf = std::log((n_docs - df[t] + 0.5) / (df[t] + 0.5) + 1.0);
            const double len = static_cast<double>(p.source.size());
            score += idf * tf * (k1 + 1.0) / (tf + k1 * (1.0 - b + b * len / avg_len));
        }
        if (overlaps) {
            out.push_back(skmt::ScoredCandidate{p.id, score, 0.0});
        }
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& c) {
        if (a.bm25 != c.bm25) return a.bm25 > c.bm25;
        return a.pair_id < c.pair_id;
    });
    return out;
}

// Levenshtein distance with the full DP matrix.
inline std::size_t edit_distance_matrix(const std::vector<skmt::Token>& a,
                                        const std::vector<skmt::Token>& b) {
    const std::size_t n = a.size();
    const std::size_t m = b.size();
    std::vector<std::vector<std::size_t>> d(n + 1, std::vector<std::size_t>(m + 1, 0));
    for (std::size_t i = 0; i <= n; ++i) d[i][0] = i;
    for (std::size_t j = 0; j <= m; ++j) d[0][j] = j;
    for (std::size_t i = 1; i <= n; ++i) {
        for (std::size_t j = 1; j <= m; ++j) {
            const std::size_t cost = a[i - 1] == b[j - 1] ? 0 : 1;
            d[i][j] = std::min({d[i - 1][j] + 1, d[i][j - 1] + 1, d[i - 1][j - 1] + cost});
        }
    }
    return d[n][m];
}

// Full rerank pipeline by scanning the whole corpus: BM25 over all
// pairs, keep top_n, re-rank by 1 - dist/max_len, keep m.
inline std::vector<std::uint32_t> retrieve_full_scan(const skmt::ParallelCorpus& corpus,
                                                     const std::vector<skmt::Token>& query,
                                                     int top_n, int m) {
    auto candidates = bm25_full_scan(corpus, query);
    if (candidates.size() > static_cast<std::size_t>(top_n)) {
        candidates.resize(static_cast<std::size_t>(top_n));
    }
    struct Row {
        std::uint32_t id;
        double sim;
        double bm25;
    };
    std::vector<Row> rows;
    for (const auto& c : candidates) {
        const auto& src = corpus.pair(c.pair_id).source;
        const double max_len = static_cast<double>(std::max(query.size(), src.size()));
        const double sim = 1.0 - static_cast<double>(edit_distance_matrix(query, src)) / max_len;
        rows.push_back(Row{c.pair_id, sim, c.bm25});
    }
    std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
        if (a.sim != b.sim) return a.sim > b.sim;
        if (a.bm25 != b.bm25) return a.bm25 > b.bm25;
        return a.id < b.id;
    });
    if (rows.size() > static_cast<std::size_t>(m)) {
        rows.resize(static_cast<std::size_t>(m));
    }
    std::vector<std::uint32_t> ids;
    for (const Row& r : rows) {
        ids.push_back(r.id);
    }
    return ids;
}

// Exhaustive nearest neighbors: every distance computed elementwise and
// fully sorted.
inline std::vector<std::pair<std::size_t, double>> knn_exhaustive(
    const skmt::DynamicDatastore& ds, const std::vector<double>& query, int k) {
    std::vector<std::pair<std::size_t, double>> all;
    for (std::size_t i = 0; i < ds.entries.size(); ++i) {
        double d2 = 0.0;
        for (std::size_t c = 0; c < query.size(); ++c) {
            const double d = ds.entries[i].key[c] - query[c];
            d2 += d * d;
        }
        all.emplace_back(i, d2);
    }
    std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second < b.second;
        return a.first < b.first;
    });
    if (all.size() > static_cast<std::size_t>(k)) {
        all.resize(static_cast<std::size_t>(k));
    }
    return all;
}

// Literal evaluation of the neighbor distribution: p(v) proportional to
// the sum of exp(-d2/tau) over neighbors valued v, no shifting.
inline std::vector<double> knn_distribution_direct(
    const std::vector<std::pair<skmt::TokenId, double>>& neighbors, double tau,
    std::size_t vocab_size) {
    std::vector<double> p(vocab_size, 0.0);
    double z = 0.0;
    for (const auto& [value, d2] : neighbors) {
        const double w = std::exp(-d2 / tau);
        p[static_cast<std::size_t>(value)] += w;
        z += w;
    }
    for (double& x : p) {
        x /= z;
    }
    return p;
}

}  // namespace oracle

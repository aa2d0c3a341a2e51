#include "skmt/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <stdexcept>

#include "json.hpp"

namespace skmt {

namespace {

void index_one(InvertedIndex& index, const SentencePair& pair) {
    std::unordered_map<Token, std::uint32_t> tf;
    for (const Token& t : pair.source) {
        ++tf[t];
    }
    for (const auto& [token, count] : tf) {
        auto& list = index.postings[token];
        const Posting p{pair.id, count};
        // Keep lists sorted by pair id regardless of insertion order.
        auto it = std::lower_bound(list.begin(), list.end(), pair.id,
                                   [](const Posting& a, std::uint32_t id) { return a.pair_id < id; });
        list.insert(it, p);
    }
    index.doc_length.emplace(pair.id, static_cast<std::uint32_t>(pair.source.size()));
    index.total_length += pair.source.size();
}

}  // namespace

InvertedIndex build_index(const ParallelCorpus& corpus) {
    InvertedIndex index;
    for (const SentencePair& p : corpus.pairs()) {
        index_one(index, p);
    }
    return index;
}

void insert_pair(InvertedIndex& index, const SentencePair& pair) {
    if (index.doc_length.count(pair.id) > 0) {
        throw std::runtime_error("pair id already indexed: " + std::to_string(pair.id));
    }
    index_one(index, pair);
}

std::vector<ScoredCandidate> bm25_search(const InvertedIndex& index,
                                         const std::vector<Token>& query, int top_n, double k1,
                                         double b) {
    if (index.doc_count() == 0) {
        throw std::runtime_error("empty index");
    }
    if (top_n <= 0) {
        return {};
    }
    const double n_docs = static_cast<double>(index.doc_count());
    const double avg_len = static_cast<double>(index.total_length) / n_docs;

    // Unique query terms in first-appearance order, so per-document
    // score accumulation is a fixed sequence of additions.
    std::vector<Token> terms;
    terms.reserve(query.size());
    for (const Token& t : query) {
        if (std::find(terms.begin(), terms.end(), t) == terms.end()) {
            terms.push_back(t);
        }
    }

    std::unordered_map<std::uint32_t, double> scores;
    for (const Token& t : terms) {
        auto it = index.postings.find(t);
        if (it == index.postings.end()) {
            continue;
        }
        const double df = static_cast<double>(it->second.size());
        const double idf = std::log((n_docs - df + 0.5) / (df + 0.5) + 1.0);
        for (const Posting& p : it->second) {
            const double len = static_cast<double>(index.doc_length.at(p.pair_id));
            const double tf = static_cast<double>(p.tf);
            const double num = tf * (k1 + 1.0);
            const double den = tf + k1 * (1.0 - b + b * len / avg_len);
            scores[p.pair_id] += idf * num / den;
        }
    }

    std::vector<ScoredCandidate> out;
    out.reserve(scores.size());
    for (const auto& [id, score] : scores) {
        out.push_back(ScoredCandidate{id, score, 0.0});
    }
    std::sort(out.begin(), out.end(), [](const ScoredCandidate& a, const ScoredCandidate& c) {
        if (a.bm25 != c.bm25) return a.bm25 > c.bm25;
        return a.pair_id < c.pair_id;
    });
    if (out.size() > static_cast<std::size_t>(top_n)) {
        out.resize(static_cast<std::size_t>(top_n));
    }
    return out;
}

std::size_t edit_distance(const std::vector<Token>& a, const std::vector<Token>& b) {
    const std::size_t n = a.size();
    const std::size_t m = b.size();
    if (n == 0) return m;
    if (m == 0) return n;
    std::vector<std::size_t> prev(m + 1);
    std::vector<std::size_t> curr(m + 1);
    for (std::size_t j = 0; j <= m; ++j) {
        prev[j] = j;
    }
    for (std::size_t i = 1; i <= n; ++i) {
        curr[0] = i;
        for (std::size_t j = 1; j <= m; ++j) {
            const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
            curr[j] = std::min({prev[j] + 1, curr[j - 1] + 1, sub});
        }
        std::swap(prev, curr);
    }
    return prev[m];
}

double rerank_similarity(const std::vector<Token>& x, const std::vector<Token>& xi) {
    const std::size_t max_len = std::max(x.size(), xi.size());
    if (max_len == 0) {
        throw std::runtime_error("undefined similarity: both sequences empty");
    }
    const double dist = static_cast<double>(edit_distance(x, xi));
    return 1.0 - dist / static_cast<double>(max_len);
}

std::vector<ScoredCandidate> retrieve_references(const InvertedIndex& index,
                                                 const std::vector<Token>& x,
                                                 const ParallelCorpus& corpus,
                                                 const RetrievalConfig& cfg) {
    if (index.doc_count() == 0) {
        return {};
    }
    std::vector<ScoredCandidate> candidates =
        bm25_search(index, x, cfg.top_n, cfg.bm25_k1, cfg.bm25_b);
    for (ScoredCandidate& c : candidates) {
        c.sim = rerank_similarity(x, corpus.pair(c.pair_id).source);
    }
    std::sort(candidates.begin(), candidates.end(),
              [](const ScoredCandidate& a, const ScoredCandidate& b) {
                  if (a.sim != b.sim) return a.sim > b.sim;
                  if (a.bm25 != b.bm25) return a.bm25 > b.bm25;
                  return a.pair_id < b.pair_id;
              });
    if (candidates.size() > static_cast<std::size_t>(cfg.m)) {
        candidates.resize(static_cast<std::size_t>(cfg.m));
    }
    return candidates;
}

namespace {

constexpr char kMagic[5] = {'S', 'K', 'I', 'X', '1'};

void put_u32(std::ostream& out, std::uint32_t v) {
    unsigned char b[4];
    for (int i = 0; i < 4; ++i) {
        b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xFF);
    }
    out.write(reinterpret_cast<const char*>(b), 4);
}

void put_u64(std::ostream& out, std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) {
        b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xFF);
    }
    out.write(reinterpret_cast<const char*>(b), 8);
}

std::uint32_t get_u32(std::istream& in) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) {
        v = (v << 8) | b[i];
    }
    return v;
}

std::uint64_t get_u64(std::istream& in) {
    unsigned char b[8];
    in.read(reinterpret_cast<char*>(b), 8);
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) {
        v = (v << 8) | b[i];
    }
    return v;
}

}  // namespace

void save_index(const InvertedIndex& index, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot write index file: " + path);
    }
    out.write(kMagic, sizeof(kMagic));
    put_u32(out, 1);  // version
    put_u64(out, index.doc_count());
    put_u64(out, index.total_length);

    std::vector<std::pair<std::uint32_t, std::uint32_t>> lengths(index.doc_length.begin(),
                                                                 index.doc_length.end());
    std::sort(lengths.begin(), lengths.end());
    for (const auto& [id, len] : lengths) {
        put_u32(out, id);
        put_u32(out, len);
    }

    std::vector<const Token*> tokens;
    tokens.reserve(index.postings.size());
    for (const auto& [token, _] : index.postings) {
        tokens.push_back(&token);
    }
    std::sort(tokens.begin(), tokens.end(), [](const Token* a, const Token* b) { return *a < *b; });

    put_u64(out, tokens.size());
    for (const Token* t : tokens) {
        put_u32(out, static_cast<std::uint32_t>(t->size()));
        out.write(t->data(), static_cast<std::streamsize>(t->size()));
        const auto& list = index.postings.at(*t);
        put_u64(out, list.size());
        for (const Posting& p : list) {
            put_u32(out, p.pair_id);
            put_u32(out, p.tf);
        }
    }
    if (!out) {
        throw std::runtime_error("failed writing index file: " + path);
    }
}

InvertedIndex load_index(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open index file: " + path);
    }
    char magic[5];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
        throw std::runtime_error("not an index file (bad magic): " + path);
    }
    const std::uint32_t version = get_u32(in);
    if (version != 1) {
        throw std::runtime_error("unsupported index version: " + std::to_string(version));
    }
    InvertedIndex index;
    const std::uint64_t doc_count = get_u64(in);
    index.total_length = get_u64(in);
    for (std::uint64_t i = 0; i < doc_count; ++i) {
        const std::uint32_t id = get_u32(in);
        const std::uint32_t len = get_u32(in);
        index.doc_length.emplace(id, len);
    }
    const std::uint64_t n_tokens = get_u64(in);
    for (std::uint64_t i = 0; i < n_tokens; ++i) {
        const std::uint32_t len = get_u32(in);
        std::string token(len, '\0');
        in.read(token.data(), len);
        const std::uint64_t n_postings = get_u64(in);
        std::vector<Posting> list;
        list.reserve(n_postings);
        for (std::uint64_t k = 0; k < n_postings; ++k) {
            const std::uint32_t id = get_u32(in);
            const std::uint32_t tf = get_u32(in);
            list.push_back(Posting{id, tf});
        }
        index.postings.emplace(std::move(token), std::move(list));
    }
    if (!in) {
        throw std::runtime_error("truncated index file: " + path);
    }
    return index;
}

std::string index_to_json(const InvertedIndex& index) {
    nlohmann::json j;
    j["doc_count"] = index.doc_count();
    j["total_length"] = index.total_length;
    std::map<std::uint32_t, std::uint32_t> lengths(index.doc_length.begin(),
                                                   index.doc_length.end());
    j["doc_length"] = nlohmann::json::object();
    for (const auto& [id, len] : lengths) {
        j["doc_length"][std::to_string(id)] = len;
    }
    std::map<Token, const std::vector<Posting>*> sorted;
    for (const auto& [token, list] : index.postings) {
        sorted.emplace(token, &list);
    }
    j["postings"] = nlohmann::json::object();
    for (const auto& [token, list] : sorted) {
        nlohmann::json arr = nlohmann::json::array();
        for (const Posting& p : *list) {
            arr.push_back({p.pair_id, p.tf});
        }
        j["postings"][token] = std::move(arr);
    }
    return j.dump(2);
}

}  // namespace skmt

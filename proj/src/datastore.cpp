#include "skmt/datastore.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>

#include "json.hpp"
#include "skmt/simd/kernels.hpp"

namespace skmt {

DynamicDatastore build_datastore(const ContextModel& model, const Vocabulary& vocab,
                                 const std::vector<SentencePair>& pairs) {
    DynamicDatastore ds;
    ds.hidden_dim = model.hidden_dim();
    std::size_t total = 0;
    for (const SentencePair& p : pairs) {
        total += p.target.size() + 1;
    }
    ds.entries.reserve(total);

    for (const SentencePair& p : pairs) {
        const ContextVector source_state = model.encode_source(p.source);
        const std::vector<TokenId> target_ids = vocab.ids_or_unk(p.target);

        std::vector<TokenId> prefix;
        prefix.reserve(target_ids.size() + 1);
        prefix.push_back(Vocabulary::kBos);
        for (std::size_t t = 0; t <= target_ids.size(); ++t) {
            DatastoreEntry e;
            e.key = model.hidden_state(source_state, prefix);
            e.value = t < target_ids.size() ? target_ids[t] : Vocabulary::kEos;
            e.origin = EntryOrigin{p.id, static_cast<std::uint32_t>(t)};
            ds.entries.push_back(std::move(e));
            if (t < target_ids.size()) {
                prefix.push_back(target_ids[t]);
            }
        }
    }
    return ds;
}

NeighborSet knn_search(const DynamicDatastore& ds, const ContextVector& query, int k) {
    if (k < 1) {
        throw std::invalid_argument("k must be >= 1");
    }
    if (ds.empty()) {
        return {};
    }
    if (query.size() != static_cast<std::size_t>(ds.hidden_dim)) {
        throw std::invalid_argument("query dimension does not match datastore");
    }
    NeighborSet all;
    all.reserve(ds.size());
    for (std::size_t i = 0; i < ds.entries.size(); ++i) {
        const DatastoreEntry& e = ds.entries[i];
        const double d2 = simd::squared_l2(e.key.data(), query.data(), query.size());
        all.push_back(Neighbor{i, d2, e.value});
    }
    const auto less = [](const Neighbor& a, const Neighbor& b) {
        if (a.squared_distance != b.squared_distance) {
            return a.squared_distance < b.squared_distance;
        }
        return a.entry_index < b.entry_index;
    };
    const std::size_t keep = std::min(static_cast<std::size_t>(k), all.size());
    std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(keep), all.end(), less);
    all.resize(keep);
    return all;
}

DatastoreFootprint datastore_footprint(const DynamicDatastore& ds) {
    DatastoreFootprint f;
    f.entry_count = ds.size();
    f.key_bytes = ds.size() * static_cast<std::size_t>(ds.hidden_dim) * 4;
    return f;
}

void dump_datastore(const DynamicDatastore& ds, const Vocabulary& vocab, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot write datastore dump: " + path);
    }
    for (const DatastoreEntry& e : ds.entries) {
        nlohmann::json j;
        j["pair_id"] = e.origin.pair_id;
        j["position"] = e.origin.position;
        j["value_id"] = e.value;
        j["value"] = vocab.token(e.value);
        j["key"] = e.key;
        out << j.dump() << '\n';
    }
}

}  // namespace skmt

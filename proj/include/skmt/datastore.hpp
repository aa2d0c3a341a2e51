#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "skmt/corpus.hpp"
#include "skmt/model.hpp"

namespace skmt {

struct EntryOrigin {
    std::uint32_t pair_id = 0;
    std::uint32_t position = 0;  // 0-based index of the predicted token; |target| for end-of-sentence
};

struct DatastoreEntry {
    ContextVector key;   // hidden state of the teacher-forced context
    TokenId value = 0;   // token the context predicts (may be end-of-sentence)
    EntryOrigin origin;
};

// Per-input key/value store built by teacher-forcing retrieved pairs
// through the model. Built once per sentence, then read-only.
struct DynamicDatastore {
    std::vector<DatastoreEntry> entries;
    int hidden_dim = 0;

    bool empty() const { return entries.empty(); }
    std::size_t size() const { return entries.size(); }
};

struct Neighbor {
    std::size_t entry_index = 0;
    double squared_distance = 0.0;
    TokenId value = 0;
};

// Sorted by (squared distance asc, entry index asc); length <= k.
using NeighborSet = std::vector<Neighbor>;

// One entry per target position plus one predicting end-of-sentence:
// |entries| = sum over pairs of (|target| + 1). Entry order is pair
// order, then position. Unknown target tokens map to the unknown id.
DynamicDatastore build_datastore(const ContextModel& model, const Vocabulary& vocab,
                                 const std::vector<SentencePair>& pairs);

// Exact top-k by squared Euclidean distance with a stable index
// tie-break. Returns fewer than k when the store is smaller; empty on
// an empty store. Throws on a dimension mismatch.
NeighborSet knn_search(const DynamicDatastore& ds, const ContextVector& query, int k);

struct DatastoreFootprint {
    std::size_t entry_count = 0;
    std::size_t key_bytes = 0;  // entry_count * hidden_dim * 4 (float-32 serialization)
};

DatastoreFootprint datastore_footprint(const DynamicDatastore& ds);

// Debug dump: one JSON object per entry (origin, value token, key).
void dump_datastore(const DynamicDatastore& ds, const Vocabulary& vocab, const std::string& path);

}  // namespace skmt

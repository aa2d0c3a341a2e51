#pragma once

#include <optional>
#include <string>
#include <vector>

#include "skmt/corpus.hpp"
#include "skmt/datastore.hpp"
#include "skmt/model.hpp"
#include "skmt/retrieval.hpp"

namespace skmt {

enum class DecodeMode { base, skmt };

struct FusionConfig {
    int k = 1;           // neighbors per step
    int m = 2;           // reference pairs per sentence
    double tau = 100.0;  // distance temperature; also gates the mixing weight
    DecodeMode mode = DecodeMode::skmt;
};

struct DecoderConfig {
    int beam = 4;
    double length_penalty = 0.6;
    int max_len = 0;  // 0 = auto: 2 * |source| + 16
};

struct StepTrace {
    int step = 0;                     // 1-based decoding step
    std::optional<double> d0 = {};    // nearest squared distance; absent when the store is empty
    double lambda = 0.0;              // retrieval mixing weight in [0, 1]
    TokenId chosen = 0;               // token taken on this hypothesis
    std::vector<Neighbor> neighbors;  // values and distances consulted
};

struct Hypothesis {
    std::vector<TokenId> tokens;  // begins with begin-of-sentence
    double logprob = 0.0;         // sum of per-step log probabilities (fused)
    bool finished = false;        // last token is end-of-sentence
    std::vector<StepTrace> trace;

    std::size_t generated_length() const { return tokens.empty() ? 0 : tokens.size() - 1; }
};

struct BeamResult {
    Hypothesis best;
    std::vector<ScoredCandidate> references;  // retrieval picks (skmt mode)
    DatastoreFootprint footprint;
};

// Distribution over the vocabulary where p(v) is proportional to the
// sum over neighbors carrying v of exp(-d^2 / tau). Tokens with no
// neighbor get probability 0. Throws on an empty neighbor set; callers
// skip fusion instead.
Distribution knn_distribution(const NeighborSet& neighbors, double tau, std::size_t vocab_size);

// Mixing weight: max(0, 1 - d0_sq / tau). Zero at or past the
// temperature, one on an exact match.
double compute_lambda(double d0_sq, double tau);

// lambda * p_knn + (1 - lambda) * p_nmt, elementwise. Throws on a
// length mismatch.
Distribution fuse(const Distribution& p_knn, const Distribution& p_nmt, double lambda);

// GNMT-style penalty ((5 + length) / 6)^alpha; final hypothesis score
// is logprob / length_penalty.
double length_penalty(std::size_t length, double alpha);

// One fused decoding step against a prebuilt datastore. This is the
// exact code path beam_search runs per beam, exposed so per-step
// distributions can be inspected.
struct FusedStep {
    ModelOutput model_out;
    Distribution fused;  // equals model_out.dist when lambda is 0 or the store is empty
    StepTrace trace;     // chosen is left unset
};

FusedStep fused_step(const ContextModel& model, const DynamicDatastore& ds,
                     const FusionConfig& cfg, const ContextVector& source_state,
                     std::span<const TokenId> prefix, int step);

// Beam search over the fused distribution. In skmt mode, retrieval and
// datastore construction happen once per source sentence and are shared
// by all beams and steps; when retrieval finds nothing the decoder
// degrades to the base model (lambda = 0 throughout). Returns the best
// finished hypothesis by logprob / length_penalty, or the best
// unfinished one at max_len.
BeamResult beam_search(const ContextModel& model, const Vocabulary& vocab,
                       const InvertedIndex& index, const ParallelCorpus& corpus,
                       const std::vector<Token>& source, const FusionConfig& fcfg,
                       const DecoderConfig& dcfg, const RetrievalConfig& rcfg = {});

// Same search against an injected datastore (no retrieval stage).
BeamResult beam_search_with_datastore(const ContextModel& model, const Vocabulary& vocab,
                                      const DynamicDatastore& ds,
                                      const std::vector<Token>& source, const FusionConfig& fcfg,
                                      const DecoderConfig& dcfg);

}  // namespace skmt

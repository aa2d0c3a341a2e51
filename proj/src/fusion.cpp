#include "skmt/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace skmt {

Distribution knn_distribution(const NeighborSet& neighbors, double tau, std::size_t vocab_size) {
    if (neighbors.empty()) {
        throw std::invalid_argument("knn_distribution requires a non-empty neighbor set");
    }
    if (!(tau > 0.0)) {
        throw std::invalid_argument("tau must be > 0");
    }
    Distribution p(vocab_size, 0.0);
    // Shift by the nearest distance so the largest weight is exactly 1;
    // the shift cancels in the normalization.
    const double d_min = neighbors.front().squared_distance;
    double sum = 0.0;
    for (const Neighbor& n : neighbors) {
        const double w = std::exp(-(n.squared_distance - d_min) / tau);
        p[static_cast<std::size_t>(n.value)] += w;
        sum += w;
    }
    for (double& x : p) {
        x /= sum;
    }
    return p;
}

double compute_lambda(double d0_sq, double tau) {
    if (d0_sq < 0.0) {
        throw std::invalid_argument("squared distance must be non-negative");
    }
    if (!(tau > 0.0)) {
        throw std::invalid_argument("tau must be > 0");
    }
    return std::max(0.0, 1.0 - d0_sq / tau);
}

Distribution fuse(const Distribution& p_knn, const Distribution& p_nmt, double lambda) {
    if (p_knn.size() != p_nmt.size()) {
        throw std::invalid_argument("distributions have different lengths");
    }
    if (lambda < 0.0 || lambda > 1.0) {
        throw std::invalid_argument("lambda must be in [0, 1]");
    }
    Distribution out(p_knn.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = lambda * p_knn[i] + (1.0 - lambda) * p_nmt[i];
    }
    return out;
}

double length_penalty(std::size_t length, double alpha) {
    if (length < 1) {
        throw std::invalid_argument("length must be >= 1");
    }
    return std::pow((5.0 + static_cast<double>(length)) / 6.0, alpha);
}

FusedStep fused_step(const ContextModel& model, const DynamicDatastore& ds,
                     const FusionConfig& cfg, const ContextVector& source_state,
                     std::span<const TokenId> prefix, int step) {
    FusedStep out;
    out.model_out = model.decode_step(source_state, prefix);
    out.trace.step = step;

    if (cfg.mode == DecodeMode::skmt && !ds.empty()) {
        NeighborSet nn = knn_search(ds, out.model_out.hidden, cfg.k);
        const double d0 = nn.front().squared_distance;
        const double lambda = compute_lambda(d0, cfg.tau);
        out.trace.d0 = d0;
        out.trace.lambda = lambda;
        out.trace.neighbors = nn;
        if (lambda > 0.0) {
            const Distribution p_knn =
                knn_distribution(nn, cfg.tau, static_cast<std::size_t>(model.vocab_size()));
            out.fused = fuse(p_knn, out.model_out.dist, lambda);
            return out;
        }
    }
    out.fused = out.model_out.dist;
    return out;
}

namespace {

struct Candidate {
    std::size_t parent = 0;
    TokenId token = 0;
    double logprob = 0.0;
    double prob = 0.0;
    StepTrace trace;
};

BeamResult run_beam(const ContextModel& model, const DynamicDatastore& ds,
                    const std::vector<Token>& source, const FusionConfig& fcfg,
                    const DecoderConfig& dcfg) {
    if (source.empty()) {
        throw std::invalid_argument("cannot translate an empty source");
    }
    if (dcfg.beam < 1) {
        throw std::invalid_argument("beam must be >= 1");
    }
    const ContextVector source_state = model.encode_source(source);
    const int max_len =
        dcfg.max_len > 0 ? dcfg.max_len : static_cast<int>(2 * source.size() + 16);
    const std::size_t beam = static_cast<std::size_t>(dcfg.beam);

    std::vector<Hypothesis> live(1);
    live[0].tokens.push_back(Vocabulary::kBos);
    std::vector<Hypothesis> finished;

    for (int step = 1; step <= max_len && !live.empty(); ++step) {
        std::vector<Candidate> candidates;
        candidates.reserve(live.size() * beam);
        for (std::size_t b = 0; b < live.size(); ++b) {
            const Hypothesis& hyp = live[b];
            FusedStep fs = fused_step(model, ds, fcfg, source_state, hyp.tokens, step);

            // Top-beam continuations with positive probability,
            // ties broken by token id.
            std::vector<TokenId> order(fs.fused.size());
            for (std::size_t i = 0; i < order.size(); ++i) {
                order[i] = static_cast<TokenId>(i);
            }
            const std::size_t take = std::min(beam, order.size());
            std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(take),
                              order.end(), [&](TokenId a, TokenId c) {
                                  if (fs.fused[a] != fs.fused[c]) return fs.fused[a] > fs.fused[c];
                                  return a < c;
                              });
            for (std::size_t i = 0; i < take; ++i) {
                const TokenId tok = order[i];
                const double p = fs.fused[static_cast<std::size_t>(tok)];
                if (p <= 0.0) {
                    break;
                }
                Candidate c;
                c.parent = b;
                c.token = tok;
                c.prob = p;
                c.logprob = hyp.logprob + std::log(p);
                c.trace = fs.trace;
                c.trace.chosen = tok;
                candidates.push_back(std::move(c));
            }
        }
        if (candidates.empty()) {
            break;
        }
        // Prune to the beam by running (unpenalized) log probability.
        std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
            if (a.logprob != b.logprob) return a.logprob > b.logprob;
            if (a.parent != b.parent) return a.parent < b.parent;
            return a.token < b.token;
        });
        if (candidates.size() > beam) {
            candidates.resize(beam);
        }

        std::vector<Hypothesis> next;
        next.reserve(candidates.size());
        for (const Candidate& c : candidates) {
            Hypothesis hyp = live[c.parent];
            hyp.tokens.push_back(c.token);
            hyp.logprob = c.logprob;
            hyp.trace.push_back(c.trace);
            if (c.token == Vocabulary::kEos) {
                hyp.finished = true;
                finished.push_back(std::move(hyp));
            } else {
                next.push_back(std::move(hyp));
            }
        }
        live = std::move(next);
    }

    // Final ranking uses the length-normalized score.
    const auto score = [&](const Hypothesis& h) {
        return h.logprob / length_penalty(std::max<std::size_t>(1, h.generated_length()),
                                          dcfg.length_penalty);
    };
    const std::vector<Hypothesis>& pool = finished.empty() ? live : finished;
    if (pool.empty()) {
        throw std::runtime_error("beam search produced no hypotheses");
    }
    std::size_t best = 0;
    for (std::size_t i = 1; i < pool.size(); ++i) {
        if (score(pool[i]) > score(pool[best])) {
            best = i;
        }
    }
    BeamResult result;
    result.best = pool[best];
    result.footprint = datastore_footprint(ds);
    return result;
}

}  // namespace

BeamResult beam_search(const ContextModel& model, const Vocabulary& vocab,
                       const InvertedIndex& index, const ParallelCorpus& corpus,
                       const std::vector<Token>& source, const FusionConfig& fcfg,
                       const DecoderConfig& dcfg, const RetrievalConfig& rcfg) {
    DynamicDatastore ds;
    ds.hidden_dim = model.hidden_dim();
    std::vector<ScoredCandidate> refs;
    if (fcfg.mode == DecodeMode::skmt) {
        RetrievalConfig rc = rcfg;
        rc.m = fcfg.m;
        refs = retrieve_references(index, source, corpus, rc);
        std::vector<SentencePair> pairs;
        pairs.reserve(refs.size());
        for (const ScoredCandidate& c : refs) {
            pairs.push_back(corpus.pair(c.pair_id));
        }
        ds = build_datastore(model, vocab, pairs);
    }
    BeamResult result = run_beam(model, ds, source, fcfg, dcfg);
    result.references = std::move(refs);
    return result;
}

BeamResult beam_search_with_datastore(const ContextModel& model, const Vocabulary& /*vocab*/,
                                      const DynamicDatastore& ds,
                                      const std::vector<Token>& source, const FusionConfig& fcfg,
                                      const DecoderConfig& dcfg) {
    return run_beam(model, ds, source, fcfg, dcfg);
}

}  // namespace skmt

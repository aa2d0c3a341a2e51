#include <cmath>

#include "doctest.h"
#include "oracles.hpp"
#include "skmt/fusion.hpp"
#include "testutil.hpp"

using namespace skmt;
using testutil::toks;

TEST_CASE("knn_distribution") {
    SUBCASE("single neighbor at distance zero is a point mass") {
        const NeighborSet nn = {Neighbor{0, 0.0, 7}};
        const Distribution p = knn_distribution(nn, 100.0, 10);
        CHECK(p[7] == 1.0);
        double sum = 0.0;
        for (double x : p) sum += x;
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
    }
    SUBCASE("equal distances, different values split mass exactly in half") {
        const NeighborSet nn = {Neighbor{0, 2.5, 3}, Neighbor{1, 2.5, 4}};
        const Distribution p = knn_distribution(nn, 10.0, 6);
        CHECK(p[3] == p[4]);
        CHECK(p[3] == doctest::Approx(0.5));
    }
    SUBCASE("worked three-neighbor case") {
        // values {a=1: d2 1 and 9, b=2: d2 4}, tau 10
        const NeighborSet nn = {Neighbor{0, 1.0, 1}, Neighbor{1, 4.0, 2}, Neighbor{2, 9.0, 1}};
        const Distribution p = knn_distribution(nn, 10.0, 4);
        const double z = std::exp(-0.1) + std::exp(-0.4) + std::exp(-0.9);
        CHECK(p[1] == doctest::Approx((std::exp(-0.1) + std::exp(-0.9)) / z).epsilon(1e-12));
        CHECK(p[2] == doctest::Approx(std::exp(-0.4) / z).epsilon(1e-12));
        CHECK(p[0] == 0.0);
        CHECK(p[3] == 0.0);
    }
    SUBCASE("empty neighbor set throws") {
        CHECK_THROWS(knn_distribution({}, 100.0, 4));
    }
    SUBCASE("matches the direct formula on random neighbor sets") {
        testutil::Rng rng(61);
        for (int trial = 0; trial < 200; ++trial) {
            const std::size_t vocab = 20;
            const std::size_t n = rng.uniform(1, 8);
            NeighborSet nn;
            std::vector<std::pair<TokenId, double>> raw;
            for (std::size_t i = 0; i < n; ++i) {
                const double d2 = 5.0 * rng.real();
                const TokenId v = static_cast<TokenId>(rng.uniform(0, vocab - 1));
                raw.emplace_back(v, d2);
            }
            std::sort(raw.begin(), raw.end(),
                      [](const auto& a, const auto& b) { return a.second < b.second; });
            for (std::size_t i = 0; i < n; ++i) {
                nn.push_back(Neighbor{i, raw[i].second, raw[i].first});
            }
            const double tau = 0.5 + 100.0 * rng.real();
            const Distribution got = knn_distribution(nn, tau, vocab);
            const std::vector<double> expect = oracle::knn_distribution_direct(raw, tau, vocab);
            for (std::size_t v = 0; v < vocab; ++v) {
                CHECK(got[v] == doctest::Approx(expect[v]).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("compute_lambda") {
    CHECK(compute_lambda(0.0, 100.0) == 1.0);
    CHECK(compute_lambda(100.0, 100.0) == 0.0);
    CHECK(compute_lambda(150.0, 100.0) == 0.0);
    CHECK(compute_lambda(25.0, 100.0) == doctest::Approx(0.75));
    CHECK_THROWS(compute_lambda(-1.0, 100.0));
    CHECK_THROWS(compute_lambda(1.0, 0.0));

    SUBCASE("monotone non-increasing in the distance, always in [0,1]") {
        testutil::Rng rng(67);
        for (int trial = 0; trial < 100; ++trial) {
            const double tau = 0.1 + 200.0 * rng.real();
            double prev = 1.0;
            for (int i = 0; i <= 50; ++i) {
                const double d = 3.0 * tau * i / 50.0;
                const double l = compute_lambda(d, tau);
                CHECK(l >= 0.0);
                CHECK(l <= 1.0);
                CHECK(l <= prev);
                prev = l;
            }
        }
    }
}

TEST_CASE("fuse") {
    const Distribution knn = {1.0, 0.0, 0.0, 0.0};
    const Distribution nmt = {0.25, 0.25, 0.25, 0.25};

    SUBCASE("degenerate mixes reproduce an input exactly") {
        CHECK(fuse(knn, nmt, 0.0) == nmt);
        CHECK(fuse(knn, nmt, 1.0) == knn);
    }
    SUBCASE("half mix of point mass and uniform") {
        const Distribution out = fuse(knn, nmt, 0.5);
        CHECK(out[0] == doctest::Approx(0.5 + 0.125));
        CHECK(out[1] == doctest::Approx(0.125));
    }
    SUBCASE("output is a distribution for random mixes") {
        testutil::Rng rng(71);
        for (int trial = 0; trial < 100; ++trial) {
            Distribution a(8), b(8);
            double za = 0.0, zb = 0.0;
            for (std::size_t i = 0; i < 8; ++i) {
                a[i] = rng.real();
                b[i] = rng.real();
                za += a[i];
                zb += b[i];
            }
            for (std::size_t i = 0; i < 8; ++i) {
                a[i] /= za;
                b[i] /= zb;
            }
            const Distribution out = fuse(a, b, rng.real());
            double sum = 0.0;
            for (double x : out) {
                CHECK(x >= 0.0);
                sum += x;
            }
            CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
        }
    }
    SUBCASE("length mismatch throws") {
        CHECK_THROWS(fuse(Distribution{0.5, 0.5}, nmt, 0.5));
    }
}

TEST_CASE("length_penalty") {
    CHECK(length_penalty(1, 0.6) == doctest::Approx(1.0));
    CHECK(length_penalty(9, 0.0) == doctest::Approx(1.0));
    CHECK(length_penalty(13, 0.6) == doctest::Approx(std::pow(3.0, 0.6)).epsilon(1e-12));
    CHECK_THROWS(length_penalty(0, 0.6));
}

namespace {

struct Engine {
    ParallelCorpus corpus;
    Vocabulary vocab;
    ToyModel model;
    InvertedIndex index;

    explicit Engine(ParallelCorpus c)
        : corpus(std::move(c)),
          vocab(build_vocabulary(corpus)),
          model(ToyModelSpec{}, vocab),
          index(build_index(corpus)) {}
};

std::vector<TokenId> surface(const Hypothesis& h) {
    std::vector<TokenId> ids(h.tokens.begin() + 1, h.tokens.end());
    if (!ids.empty() && ids.back() == Vocabulary::kEos) {
        ids.pop_back();
    }
    return ids;
}

}  // namespace

TEST_CASE("beam_search base and skmt agree when retrieval finds nothing") {
    testutil::Rng rng(73);
    Engine e(testutil::random_corpus(rng, 30, 20));
    // Query over tokens the corpus does not contain.
    const auto source = std::vector<Token>{"qqq", "rrr", "sss"};
    FusionConfig base{1, 2, 100.0, DecodeMode::base};
    FusionConfig skmt{1, 2, 100.0, DecodeMode::skmt};
    DecoderConfig dcfg;
    const BeamResult a = beam_search(e.model, e.vocab, e.index, e.corpus, source, base, dcfg);
    const BeamResult b = beam_search(e.model, e.vocab, e.index, e.corpus, source, skmt, dcfg);
    CHECK(a.best.tokens == b.best.tokens);
    CHECK(b.references.empty());
    for (const StepTrace& t : b.best.trace) {
        CHECK(t.lambda == 0.0);
        CHECK(!t.d0.has_value());
    }
}

TEST_CASE("copy property: a verbatim source reproduces its stored target") {
    testutil::Rng rng(79);
    Engine e(testutil::random_corpus(rng, 40, 60, 3, 7, true));
    FusionConfig skmt{1, 2, 100.0, DecodeMode::skmt};
    DecoderConfig dcfg;  // beam 4
    for (std::uint32_t id : {0u, 7u, 21u, 39u}) {
        const SentencePair& pair = e.corpus.pair(id);
        const BeamResult r =
            beam_search(e.model, e.vocab, e.index, e.corpus, pair.source, skmt, dcfg);
        CHECK(surface(r.best) == e.vocab.ids_or_unk(pair.target));
        // Every step rode an exact-match neighbor.
        for (const StepTrace& t : r.best.trace) {
            REQUIRE(t.d0.has_value());
            CHECK(*t.d0 == 0.0);
            CHECK(t.lambda == 1.0);
        }
    }
}

TEST_CASE("beam width 1 equals greedy argmax over the fused distribution") {
    testutil::Rng rng(83);
    Engine e(testutil::random_corpus(rng, 25, 15));
    const auto source = e.corpus.pair(3).source;
    FusionConfig fcfg{2, 4, 50.0, DecodeMode::skmt};
    DecoderConfig dcfg;
    dcfg.beam = 1;
    const BeamResult got = beam_search(e.model, e.vocab, e.index, e.corpus, source, fcfg, dcfg);

    // Manual greedy loop over the same per-step core.
    RetrievalConfig rcfg;
    rcfg.m = fcfg.m;
    const auto refs = retrieve_references(e.index, source, e.corpus, rcfg);
    std::vector<SentencePair> pairs;
    for (const auto& c : refs) pairs.push_back(e.corpus.pair(c.pair_id));
    const DynamicDatastore ds = build_datastore(e.model, e.vocab, pairs);
    const ContextVector src_state = e.model.encode_source(source);
    std::vector<TokenId> prefix = {Vocabulary::kBos};
    const int max_len = static_cast<int>(2 * source.size() + 16);
    for (int step = 1; step <= max_len; ++step) {
        const FusedStep fs = fused_step(e.model, ds, fcfg, src_state, prefix, step);
        std::size_t best = 0;
        for (std::size_t v = 1; v < fs.fused.size(); ++v) {
            if (fs.fused[v] > fs.fused[best]) best = v;
        }
        prefix.push_back(static_cast<TokenId>(best));
        if (static_cast<TokenId>(best) == Vocabulary::kEos) break;
    }
    CHECK(got.best.tokens == prefix);
}

TEST_CASE("exact-match dominance: zero-distance neighbors of one value win the step") {
    testutil::Rng rng(89);
    Engine e(testutil::random_corpus(rng, 10, 12));
    const SentencePair& pair = e.corpus.pair(2);
    const DynamicDatastore ds = build_datastore(e.model, e.vocab, {pair});
    const ContextVector src_state = e.model.encode_source(pair.source);
    const std::vector<TokenId> prefix = {Vocabulary::kBos};
    FusionConfig fcfg{1, 1, 100.0, DecodeMode::skmt};
    const FusedStep fs = fused_step(e.model, ds, fcfg, src_state, prefix, 1);
    REQUIRE(fs.trace.d0.has_value());
    CHECK(*fs.trace.d0 == 0.0);
    CHECK(fs.trace.lambda == 1.0);
    std::size_t argmax = 0;
    for (std::size_t v = 1; v < fs.fused.size(); ++v) {
        if (fs.fused[v] > fs.fused[argmax]) argmax = v;
    }
    CHECK(static_cast<TokenId>(argmax) == ds.entries[0].value);
    CHECK(fs.fused[argmax] == 1.0);
}

TEST_CASE("tiny tau reduces skmt to base decoding on non-verbatim sources") {
    testutil::Rng rng(97);
    Engine e(testutil::random_corpus(rng, 30, 25, 4, 8, true));
    // Mutate a corpus source so no exact context match exists.
    std::vector<Token> source = e.corpus.pair(5).source;
    source[0] = "mutant";
    FusionConfig base{1, 4, 100.0, DecodeMode::base};
    FusionConfig tiny{1, 4, 1e-12, DecodeMode::skmt};
    DecoderConfig dcfg;
    const BeamResult a = beam_search(e.model, e.vocab, e.index, e.corpus, source, base, dcfg);
    const BeamResult b = beam_search(e.model, e.vocab, e.index, e.corpus, source, tiny, dcfg);
    CHECK(a.best.tokens == b.best.tokens);
}

TEST_CASE("fused distributions stay normalized during decoding") {
    testutil::Rng rng(101);
    Engine e(testutil::random_corpus(rng, 15, 10));
    const auto source = e.corpus.pair(1).source;
    RetrievalConfig rcfg;
    rcfg.m = 4;
    const auto refs = retrieve_references(e.index, source, e.corpus, rcfg);
    std::vector<SentencePair> pairs;
    for (const auto& c : refs) pairs.push_back(e.corpus.pair(c.pair_id));
    const DynamicDatastore ds = build_datastore(e.model, e.vocab, pairs);
    const ContextVector src_state = e.model.encode_source(source);
    FusionConfig fcfg{3, 4, 20.0, DecodeMode::skmt};

    std::vector<TokenId> prefix = {Vocabulary::kBos};
    for (int step = 1; step <= 10; ++step) {
        const FusedStep fs = fused_step(e.model, ds, fcfg, src_state, prefix, step);
        double sum = 0.0;
        for (double p : fs.fused) {
            CHECK(p >= 0.0);
            sum += p;
        }
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(fs.trace.lambda >= 0.0);
        CHECK(fs.trace.lambda <= 1.0);
        std::size_t argmax = 0;
        for (std::size_t v = 1; v < fs.fused.size(); ++v) {
            if (fs.fused[v] > fs.fused[argmax]) argmax = v;
        }
        prefix.push_back(static_cast<TokenId>(argmax));
    }
}

TEST_CASE("a tight max_len returns the best unfinished hypothesis") {
    testutil::Rng rng(211);
    Engine e(testutil::random_corpus(rng, 10, 15));
    DecoderConfig dcfg;
    dcfg.max_len = 2;
    const BeamResult r =
        beam_search(e.model, e.vocab, e.index, e.corpus, e.corpus.pair(0).source,
                    FusionConfig{1, 2, 100.0, DecodeMode::base}, dcfg);
    CHECK_FALSE(r.best.finished);
    CHECK(r.best.generated_length() == 2);
}

TEST_CASE("hypothesis log probability is never positive") {
    testutil::Rng rng(103);
    Engine e(testutil::random_corpus(rng, 20, 15));
    FusionConfig fcfg{2, 4, 100.0, DecodeMode::skmt};
    DecoderConfig dcfg;
    for (std::uint32_t id = 0; id < 5; ++id) {
        const BeamResult r =
            beam_search(e.model, e.vocab, e.index, e.corpus, e.corpus.pair(id).source, fcfg, dcfg);
        CHECK(r.best.logprob <= 0.0);
        CHECK(r.best.tokens.front() == Vocabulary::kBos);
        if (r.best.finished) {
            CHECK(r.best.tokens.back() == Vocabulary::kEos);
        }
    }
}

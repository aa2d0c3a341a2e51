#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "skmt/config.hpp"
#include "skmt/corpus.hpp"
#include "skmt/fusion.hpp"
#include "skmt/metrics.hpp"
#include "skmt/model.hpp"
#include "skmt/retrieval.hpp"

namespace skmt {

struct TranslationResult {
    std::vector<Token> hypothesis;
    std::vector<StepTrace> trace;
    DatastoreFootprint footprint;
};

// Translates every source, fanning sentences out over `jobs` workers.
// Results are placed by sentence index, so output order and content are
// independent of the worker count.
std::vector<TranslationResult> translate_all(const ContextModel& model, const Vocabulary& vocab,
                                             const InvertedIndex& index,
                                             const ParallelCorpus& corpus,
                                             const std::vector<std::vector<Token>>& sources,
                                             const FusionConfig& fcfg, const DecoderConfig& dcfg,
                                             const RetrievalConfig& rcfg, int jobs);

struct GridCell {
    int k = 0;
    int m = 0;
    double tau = 0.0;
    double bleu = 0.0;
    double chrf = 0.0;
};

// Evaluates every (k, m, tau) cell on the dev bitext and returns rows
// sorted by BLEU (then ChrF) descending. Throws on an empty grid.
std::vector<GridCell> grid_search(const ContextModel& model, const Vocabulary& vocab,
                                  const InvertedIndex& index, const ParallelCorpus& corpus,
                                  const ParallelCorpus& dev, const std::vector<int>& k_grid,
                                  const std::vector<int>& m_grid,
                                  const std::vector<double>& tau_grid, const DecoderConfig& dcfg,
                                  const RetrievalConfig& rcfg, int jobs);

std::string grid_table(const std::vector<GridCell>& cells);

struct BenchRow {
    std::string config;       // "base", "skmt m=2 k=1", ...
    int batch_width = 0;      // concurrent sentences
    double ms_per_sentence = 0.0;  // median over repetitions
    double speed_ratio = 1.0;      // base at the same width = 1.00
    double mean_entries = 0.0;     // mean datastore entries per sentence
    double mean_key_bytes = 0.0;   // mean serialized key payload per sentence
};

struct BenchConfig {
    std::vector<int> batch_widths = {1, 4, 8, 16};
    int repetitions = 3;  // timed runs per cell; one warm-up run is excluded
};

// Times translation of the test sources under the base model and each
// fusion config. Timing covers retrieval, datastore construction and
// decoding; index loading and model setup are excluded by construction.
std::vector<BenchRow> run_bench(const ContextModel& model, const Vocabulary& vocab,
                                const InvertedIndex& index, const ParallelCorpus& corpus,
                                const std::vector<std::vector<Token>>& sources,
                                const std::vector<FusionConfig>& configs,
                                const DecoderConfig& dcfg, const RetrievalConfig& rcfg,
                                const BenchConfig& bench);

std::string bench_table(const std::vector<BenchRow>& rows);

}  // namespace skmt

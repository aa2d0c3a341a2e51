#include "skmt/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <functional>
#include <iomanip>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace skmt {

namespace {

// Runs fn(i) for i in [0, n) on up to `jobs` threads; work is handed
// out via a shared counter. The first worker exception is rethrown in
// the caller after all threads join.
void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn) {
    const int workers = std::max(1, std::min<int>(jobs, static_cast<int>(n)));
    if (workers == 1) {
        for (std::size_t i = 0; i < n; ++i) {
            fn(i);
        }
        return;
    }
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> threads;
    threads.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
        threads.emplace_back([&] {
            while (!failed.load(std::memory_order_relaxed)) {
                const std::size_t i = next.fetch_add(1);
                if (i >= n) {
                    return;
                }
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!error) {
                        error = std::current_exception();
                    }
                    failed.store(true, std::memory_order_relaxed);
                    return;
                }
            }
        });
    }
    for (std::thread& t : threads) {
        t.join();
    }
    if (error) {
        std::rethrow_exception(error);
    }
}

std::vector<Token> strip_markers(const Vocabulary& vocab, const std::vector<TokenId>& tokens) {
    std::vector<TokenId> ids(tokens.begin() + 1, tokens.end());  // drop begin-of-sentence
    if (!ids.empty() && ids.back() == Vocabulary::kEos) {
        ids.pop_back();
    }
    return vocab.tokens(ids);
}

}  // namespace

std::vector<TranslationResult> translate_all(const ContextModel& model, const Vocabulary& vocab,
                                             const InvertedIndex& index,
                                             const ParallelCorpus& corpus,
                                             const std::vector<std::vector<Token>>& sources,
                                             const FusionConfig& fcfg, const DecoderConfig& dcfg,
                                             const RetrievalConfig& rcfg, int jobs) {
    std::vector<TranslationResult> results(sources.size());
    parallel_for(sources.size(), jobs, [&](std::size_t i) {
        BeamResult br = beam_search(model, vocab, index, corpus, sources[i], fcfg, dcfg, rcfg);
        results[i].hypothesis = strip_markers(vocab, br.best.tokens);
        results[i].trace = std::move(br.best.trace);
        results[i].footprint = br.footprint;
    });
    return results;
}

std::vector<GridCell> grid_search(const ContextModel& model, const Vocabulary& vocab,
                                  const InvertedIndex& index, const ParallelCorpus& corpus,
                                  const ParallelCorpus& dev, const std::vector<int>& k_grid,
                                  const std::vector<int>& m_grid,
                                  const std::vector<double>& tau_grid, const DecoderConfig& dcfg,
                                  const RetrievalConfig& rcfg, int jobs) {
    if (k_grid.empty() || m_grid.empty() || tau_grid.empty()) {
        throw std::invalid_argument("grid is empty");
    }
    if (dev.empty()) {
        throw std::invalid_argument("dev set is empty");
    }
    std::vector<std::vector<Token>> sources;
    std::vector<std::vector<Token>> refs;
    sources.reserve(dev.size());
    refs.reserve(dev.size());
    for (const SentencePair& p : dev.pairs()) {
        sources.push_back(p.source);
        refs.push_back(p.target);
    }

    std::vector<GridCell> cells;
    for (const int k : k_grid) {
        for (const int m : m_grid) {
            for (const double tau : tau_grid) {
                FusionConfig fcfg{k, m, tau, DecodeMode::skmt};
                const auto results =
                    translate_all(model, vocab, index, corpus, sources, fcfg, dcfg, rcfg, jobs);
                std::vector<std::vector<Token>> hyps;
                hyps.reserve(results.size());
                for (const TranslationResult& r : results) {
                    hyps.push_back(r.hypothesis);
                }
                GridCell cell{k, m, tau, corpus_bleu(hyps, refs), chrf(hyps, refs)};
                cells.push_back(cell);
            }
        }
    }
    std::sort(cells.begin(), cells.end(), [](const GridCell& a, const GridCell& b) {
        if (a.bleu != b.bleu) return a.bleu > b.bleu;
        if (a.chrf != b.chrf) return a.chrf > b.chrf;
        if (a.k != b.k) return a.k < b.k;
        if (a.m != b.m) return a.m < b.m;
        return a.tau < b.tau;
    });
    return cells;
}

std::string grid_table(const std::vector<GridCell>& cells) {
    std::ostringstream os;
    os << std::fixed;
    os << std::setw(4) << "k" << std::setw(5) << "m" << std::setw(8) << "tau" << std::setw(9)
       << "BLEU" << std::setw(9) << "ChrF" << '\n';
    for (const GridCell& c : cells) {
        os << std::setw(4) << c.k << std::setw(5) << c.m << std::setw(8) << std::setprecision(1)
           << c.tau << std::setw(9) << std::setprecision(2) << c.bleu << std::setw(9)
           << std::setprecision(2) << c.chrf << '\n';
    }
    return os.str();
}

std::vector<BenchRow> run_bench(const ContextModel& model, const Vocabulary& vocab,
                                const InvertedIndex& index, const ParallelCorpus& corpus,
                                const std::vector<std::vector<Token>>& sources,
                                const std::vector<FusionConfig>& configs,
                                const DecoderConfig& dcfg, const RetrievalConfig& rcfg,
                                const BenchConfig& bench) {
    if (sources.empty()) {
        throw std::invalid_argument("benchmark needs at least one test sentence");
    }
    struct NamedConfig {
        std::string name;
        FusionConfig fcfg;
    };
    std::vector<NamedConfig> all;
    all.push_back({"base", FusionConfig{1, 1, 100.0, DecodeMode::base}});
    for (const FusionConfig& f : configs) {
        std::ostringstream name;
        name << "skmt m=" << f.m << " k=" << f.k;
        all.push_back({name.str(), f});
    }

    const int reps = std::max(1, bench.repetitions);
    std::vector<BenchRow> rows;
    std::vector<double> base_ms_by_width(bench.batch_widths.size(), 0.0);

    for (std::size_t ci = 0; ci < all.size(); ++ci) {
        const NamedConfig& nc = all[ci];
        for (std::size_t wi = 0; wi < bench.batch_widths.size(); ++wi) {
            const int width = bench.batch_widths[wi];
            const auto run_once = [&] {
                return translate_all(model, vocab, index, corpus, sources, nc.fcfg, dcfg, rcfg,
                                     width);
            };
            auto warm = run_once();  // warm-up, excluded from timing

            std::vector<double> samples;
            samples.reserve(static_cast<std::size_t>(reps));
            for (int r = 0; r < reps; ++r) {
                const auto t0 = std::chrono::steady_clock::now();
                auto results = run_once();
                const auto t1 = std::chrono::steady_clock::now();
                const double ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
                samples.push_back(ms / static_cast<double>(sources.size()));
            }
            std::sort(samples.begin(), samples.end());
            const double median = samples[samples.size() / 2];

            BenchRow row;
            row.config = nc.name;
            row.batch_width = width;
            row.ms_per_sentence = median;
            double entries = 0.0;
            double bytes = 0.0;
            for (const TranslationResult& r : warm) {
                entries += static_cast<double>(r.footprint.entry_count);
                bytes += static_cast<double>(r.footprint.key_bytes);
            }
            row.mean_entries = entries / static_cast<double>(warm.size());
            row.mean_key_bytes = bytes / static_cast<double>(warm.size());
            if (ci == 0) {
                base_ms_by_width[wi] = median;
                row.speed_ratio = 1.0;
            } else {
                row.speed_ratio = base_ms_by_width[wi] > 0.0 ? base_ms_by_width[wi] / median : 0.0;
            }
            rows.push_back(row);
        }
    }
    return rows;
}

std::string bench_table(const std::vector<BenchRow>& rows) {
    std::ostringstream os;
    os << std::fixed;
    os << std::left << std::setw(18) << "config" << std::right << std::setw(7) << "batch"
       << std::setw(12) << "ms/sent" << std::setw(9) << "speed" << std::setw(12) << "entries"
       << std::setw(12) << "key_bytes" << '\n';
    for (const BenchRow& r : rows) {
        os << std::left << std::setw(18) << r.config << std::right << std::setw(7) << r.batch_width
           << std::setw(12) << std::setprecision(3) << r.ms_per_sentence << "  x" << std::setw(5)
           << std::setprecision(2) << r.speed_ratio << std::setw(12) << std::setprecision(1)
           << r.mean_entries << std::setw(12) << std::setprecision(0) << r.mean_key_bytes << '\n';
    }
    return os.str();
}

}  // namespace skmt

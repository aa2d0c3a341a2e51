// skmt: retrieval-augmented translation engine CLI.
//
// Subcommands: index, translate, grid, bench, eval, online, analyze-sim.
// Exit codes: 0 success, 1 usage or I/O error, 2 validation error.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "skmt/config.hpp"
#include "skmt/corpus.hpp"
#include "skmt/datastore.hpp"
#include "skmt/experiments.hpp"
#include "skmt/fusion.hpp"
#include "skmt/metrics.hpp"
#include "skmt/online.hpp"
#include "skmt/retrieval.hpp"
#include "skmt/simd/kernels.hpp"

namespace {

using namespace skmt;

CorpusFormat detect_format(const std::string& path, const std::string& explicit_format) {
    if (explicit_format == "tsv") return CorpusFormat::tsv;
    if (explicit_format == "jsonl") return CorpusFormat::jsonl;
    const std::string ext = std::filesystem::path(path).extension().string();
    if (ext == ".jsonl" || ext == ".json") return CorpusFormat::jsonl;
    return CorpusFormat::tsv;
}

std::vector<std::vector<Token>> load_lines_tokenized(const std::string& path, bool lowercase) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open file: " + path);
    }
    std::vector<std::vector<Token>> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        std::vector<Token> tokens = tokenize(line, lowercase);
        if (tokens.empty()) {
            throw std::runtime_error(path + ":" + std::to_string(line_no) + ": empty sentence");
        }
        out.push_back(std::move(tokens));
    }
    return out;
}

// Writes via a temp file and renames, so outputs appear atomically.
void write_file_atomic(const std::string& path, const std::string& contents) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) {
            throw std::runtime_error("cannot write file: " + path);
        }
        out << contents;
        if (!out) {
            throw std::runtime_error("failed writing file: " + path);
        }
    }
    std::filesystem::rename(tmp, path);
}

std::string join_tokens(const std::vector<Token>& tokens) {
    std::string out;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (i > 0) out.push_back(' ');
        out += tokens[i];
    }
    return out;
}

nlohmann::json trace_record(std::size_t sentence, const StepTrace& t, const Vocabulary& vocab) {
    nlohmann::json j;
    j["sentence"] = sentence;
    j["step"] = t.step;
    if (t.d0.has_value()) {
        j["d0"] = *t.d0;
    } else {
        j["d0"] = nullptr;
    }
    j["lambda"] = t.lambda;
    j["chosen"] = vocab.token(t.chosen);
    nlohmann::json neighbors = nlohmann::json::array();
    for (const Neighbor& n : t.neighbors) {
        neighbors.push_back({{"value", vocab.token(n.value)}, {"d2", n.squared_distance}});
    }
    j["neighbors"] = std::move(neighbors);
    return j;
}

nlohmann::json r_report_json(const RIndicatorReport& r) {
    nlohmann::json j = nlohmann::json::array();
    for (const RecallBucket& b : r.buckets) {
        nlohmann::json e;
        e["bucket"] = b.label;
        e["matched"] = b.matched;
        e["total"] = b.total;
        if (b.defined()) {
            e["recall"] = b.recall();
        } else {
            e["recall"] = nullptr;  // undefined: no tokens in this bucket
        }
        j.push_back(std::move(e));
    }
    return j;
}

std::vector<int> parse_int_csv(const std::string& csv) {
    std::vector<int> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) {
            out.push_back(std::stoi(item));
        }
    }
    return out;
}

std::vector<double> parse_double_csv(const std::string& csv) {
    std::vector<double> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) {
            out.push_back(std::stod(item));
        }
    }
    return out;
}

std::vector<std::uint64_t> parse_u64_csv(const std::string& csv) {
    std::vector<std::uint64_t> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) {
            out.push_back(std::stoull(item));
        }
    }
    return out;
}

// Shared option block: --config file first, then explicit flags on top.
struct CommonOpts {
    std::string config_path;
    CLI::App* cmd = nullptr;

    std::string mode = "skmt";
    bool skmt1 = false;
    bool skmt2 = false;
    int k = -1;
    int m = -1;
    double tau = -1.0;
    int top_n = -1;
    int beam = -1;
    double lp = -1.0;
    int max_len = -1;
    int hidden_dim = -1;
    std::int64_t seed = -1;
    bool lowercase = false;
    int jobs = -1;

    void attach(CLI::App* app, bool with_fusion = true) {
        cmd = app;
        app->add_option("--config", config_path, "JSON config file");
        app->add_flag("--lowercase", lowercase, "lowercase (ASCII) during tokenization");
        app->add_option("--jobs", jobs, "worker threads for sentence-parallel work");
        app->add_option("--seed", seed, "seed for the model embedding table");
        app->add_option("--hidden-dim", hidden_dim, "model hidden dimension");
        if (with_fusion) {
            app->add_option("--mode", mode, "decoding mode: base or skmt")
                ->check(CLI::IsMember({"base", "skmt"}));
            app->add_flag("--skmt1", skmt1, "preset: m=2, k=1, tau=100");
            app->add_flag("--skmt2", skmt2, "preset: m=16, k=2, tau=100");
            app->add_option("--k", k, "neighbors per decoding step");
            app->add_option("--m", m, "reference pairs per sentence");
            app->add_option("--tau", tau, "distance temperature");
            app->add_option("--top-n", top_n, "full-text candidates before re-ranking");
            app->add_option("--beam", beam, "beam width");
            app->add_option("--length-penalty", lp, "length penalty exponent");
            app->add_option("--max-len", max_len, "max decode length (0 = auto)");
        }
    }

    RunConfig resolve() const {
        RunConfig cfg;
        if (!config_path.empty()) {
            cfg = load_run_config(config_path);
        }
        if (skmt1 && skmt2) {
            throw ConfigError("preset", "--skmt1 and --skmt2 are mutually exclusive");
        }
        if (skmt1) {
            cfg.fusion = FusionConfig{1, 2, 100.0, DecodeMode::skmt};
        }
        if (skmt2) {
            cfg.fusion = FusionConfig{2, 16, 100.0, DecodeMode::skmt};
        }
        if (cmd->count("--mode")) {
            cfg.fusion.mode = mode == "base" ? DecodeMode::base : DecodeMode::skmt;
        } else if (skmt1 || skmt2) {
            cfg.fusion.mode = DecodeMode::skmt;
        }
        if (k >= 0) cfg.fusion.k = k;
        if (m >= 0) cfg.fusion.m = m;
        if (tau >= 0.0) cfg.fusion.tau = tau;
        if (top_n >= 0) cfg.retrieval.top_n = top_n;
        if (beam >= 0) cfg.decoder.beam = beam;
        if (lp >= 0.0) cfg.decoder.length_penalty = lp;
        if (max_len >= 0) cfg.decoder.max_len = max_len;
        if (hidden_dim >= 0) cfg.model.hidden_dim = hidden_dim;
        if (seed >= 0) cfg.model.seed = static_cast<std::uint64_t>(seed);
        if (cmd->count("--lowercase")) cfg.lowercase = lowercase;
        if (jobs >= 1) cfg.jobs = jobs;
        cfg.validate();
        return cfg;
    }
};

int cmd_index(const std::string& corpus_path, const std::string& format,
              const std::string& out_path, const std::string& json_out,
              const std::string& vocab_out, bool lowercase) {
    const ParallelCorpus corpus =
        load_corpus(corpus_path, detect_format(corpus_path, format), lowercase);
    if (corpus.empty()) {
        std::cerr << "warning: corpus is empty, writing an empty index\n";
    }
    const InvertedIndex index = build_index(corpus);
    save_index(index, out_path);
    if (!json_out.empty()) {
        write_file_atomic(json_out, index_to_json(index));
    }
    if (!vocab_out.empty()) {
        build_vocabulary(corpus).save(vocab_out);
    }
    std::uint64_t target_tokens = 0;
    for (const auto& [token, count] : corpus.token_counts()) {
        target_tokens += count;
    }
    std::cout << "doc_count: " << index.doc_count() << "\n"
              << "source_tokens: " << index.total_length << "\n"
              << "target_tokens: " << target_tokens << "\n"
              << "distinct_source_tokens: " << index.postings.size() << "\n"
              << "index_file: " << out_path << "\n";
    return 0;
}

int cmd_translate(const CommonOpts& opts, const std::string& input_path,
                  const std::string& corpus_path, const std::string& format,
                  const std::string& index_path, const std::string& weights_path,
                  const std::string& out_path, const std::string& trace_path) {
    const RunConfig cfg = opts.resolve();
    const auto sources = load_lines_tokenized(input_path, cfg.lowercase);

    ParallelCorpus corpus;
    InvertedIndex index;
    Vocabulary vocab;
    if (cfg.fusion.mode == DecodeMode::skmt) {
        if (corpus_path.empty()) {
            throw std::runtime_error("skmt mode requires --corpus");
        }
        if (index_path.empty()) {
            throw std::runtime_error("skmt mode requires --index");
        }
        corpus = load_corpus(corpus_path, detect_format(corpus_path, format), cfg.lowercase);
        index = load_index(index_path);
        vocab = build_vocabulary(corpus);
    } else {
        // Base decoding ignores corpus/index; the vocabulary comes from
        // the input itself.
        for (const auto& sent : sources) {
            for (const Token& t : sent) {
                vocab.add(t);
            }
        }
    }
    ToyModel model(cfg.model, vocab);
    if (!weights_path.empty()) {
        model.load_weights(weights_path);
    }
    const auto results = translate_all(model, vocab, index, corpus, sources, cfg.fusion,
                                       cfg.decoder, cfg.retrieval, cfg.jobs);

    std::ostringstream hyp_text;
    for (const TranslationResult& r : results) {
        hyp_text << join_tokens(r.hypothesis) << '\n';
    }
    write_file_atomic(out_path, hyp_text.str());

    if (!trace_path.empty()) {
        std::ostringstream trace;
        for (std::size_t i = 0; i < results.size(); ++i) {
            for (const StepTrace& t : results[i].trace) {
                trace << trace_record(i, t, vocab).dump() << '\n';
            }
        }
        write_file_atomic(trace_path, trace.str());
    }
    std::cout << "translated " << results.size() << " sentences -> " << out_path << "\n";
    return 0;
}

int cmd_grid(const CommonOpts& opts, const std::string& dev_path, const std::string& dev_format,
             const std::string& corpus_path, const std::string& format,
             const std::string& index_path, const std::string& k_csv, const std::string& m_csv,
             const std::string& tau_csv, const std::string& out_path,
             const std::string& json_out) {
    const RunConfig cfg = opts.resolve();
    const ParallelCorpus corpus =
        load_corpus(corpus_path, detect_format(corpus_path, format), cfg.lowercase);
    const InvertedIndex index = load_index(index_path);
    const ParallelCorpus dev = load_corpus(dev_path, detect_format(dev_path, dev_format),
                                           cfg.lowercase);
    const Vocabulary vocab = build_vocabulary(corpus);
    const ToyModel model(cfg.model, vocab);

    const std::vector<int> k_grid = parse_int_csv(k_csv);
    const std::vector<int> m_grid = parse_int_csv(m_csv);
    const std::vector<double> tau_grid = parse_double_csv(tau_csv);
    if (k_grid.empty() || m_grid.empty() || tau_grid.empty()) {
        throw ConfigError("grid", "k/m/tau grids must be non-empty");
    }
    for (const int m : m_grid) {
        if (m < 1 || m > cfg.retrieval.top_n) {
            throw ConfigError("grid.m", "grid values must be in [1, top_n]");
        }
    }
    for (const double t : tau_grid) {
        if (!(t > 0.0)) {
            throw ConfigError("grid.tau", "grid values must be > 0");
        }
    }
    for (const int k : k_grid) {
        if (k < 1) {
            throw ConfigError("grid.k", "grid values must be >= 1");
        }
    }

    const auto cells = grid_search(model, vocab, index, corpus, dev, k_grid, m_grid, tau_grid,
                                   cfg.decoder, cfg.retrieval, cfg.jobs);
    const std::string table = grid_table(cells);
    if (out_path.empty()) {
        std::cout << table;
    } else {
        write_file_atomic(out_path, table);
        std::cout << "wrote " << cells.size() << " grid rows -> " << out_path << "\n";
    }
    if (!json_out.empty()) {
        nlohmann::json rows = nlohmann::json::array();
        for (const GridCell& c : cells) {
            rows.push_back(
                {{"k", c.k}, {"m", c.m}, {"tau", c.tau}, {"bleu", c.bleu}, {"chrf", c.chrf}});
        }
        write_file_atomic(json_out, rows.dump(2) + "\n");
    }
    return 0;
}

int cmd_bench(const CommonOpts& opts, const std::string& test_path,
              const std::string& corpus_path, const std::string& format,
              const std::string& index_path, const std::string& widths_csv,
              const std::string& configs_csv, int reps, const std::string& out_path) {
    const RunConfig cfg = opts.resolve();
    const ParallelCorpus corpus =
        load_corpus(corpus_path, detect_format(corpus_path, format), cfg.lowercase);
    const InvertedIndex index = load_index(index_path);
    const Vocabulary vocab = build_vocabulary(corpus);
    const ToyModel model(cfg.model, vocab);
    const auto sources = load_lines_tokenized(test_path, cfg.lowercase);

    BenchConfig bench;
    bench.batch_widths = parse_int_csv(widths_csv);
    if (bench.batch_widths.empty()) {
        throw ConfigError("bench.widths", "must name at least one batch width");
    }
    bench.repetitions = reps;

    // The base model always runs as the unit-speed row; --configs picks
    // the retrieval-backed rows next to it.
    std::vector<FusionConfig> configs;
    std::stringstream ss(configs_csv);
    std::string name;
    while (std::getline(ss, name, ',')) {
        if (name == "skmt1") {
            configs.push_back(FusionConfig{1, 2, 100.0, DecodeMode::skmt});
        } else if (name == "skmt2") {
            configs.push_back(FusionConfig{2, 16, 100.0, DecodeMode::skmt});
        } else if (name == "custom") {
            FusionConfig custom = cfg.fusion;
            custom.mode = DecodeMode::skmt;
            configs.push_back(custom);
        } else if (!name.empty()) {
            throw ConfigError("bench.configs", "unknown config \"" + name +
                                                   "\" (expected skmt1, skmt2 or custom)");
        }
    }
    if (configs.empty()) {
        throw ConfigError("bench.configs", "must name at least one config");
    }
    const auto rows = run_bench(model, vocab, index, corpus, sources, configs, cfg.decoder,
                                cfg.retrieval, bench);
    const std::string table = bench_table(rows);
    std::cout << table;
    if (!out_path.empty()) {
        nlohmann::json jrows = nlohmann::json::array();
        for (const BenchRow& r : rows) {
            jrows.push_back({{"config", r.config},
                             {"batch", r.batch_width},
                             {"ms_per_sentence", r.ms_per_sentence},
                             {"speed_ratio", r.speed_ratio},
                             {"mean_entries", r.mean_entries},
                             {"mean_key_bytes", r.mean_key_bytes}});
        }
        write_file_atomic(out_path, jrows.dump(2) + "\n");
    }
    return 0;
}

int cmd_eval(const std::string& hyp_path, const std::string& ref_path,
             const std::string& train_path, const std::string& train_format,
             const std::string& edges_csv, const std::string& json_out, bool lowercase) {
    const auto hyps = load_lines_tokenized(hyp_path, lowercase);
    const auto refs = load_lines_tokenized(ref_path, lowercase);
    if (hyps.size() != refs.size()) {
        throw std::runtime_error("line counts differ: " + std::to_string(hyps.size()) + " vs " +
                                 std::to_string(refs.size()));
    }
    const double bleu = corpus_bleu(hyps, refs);
    const double chrf_score = chrf(hyps, refs);
    std::cout << "BLEU: " << bleu << "\n" << "ChrF: " << chrf_score << "\n";

    nlohmann::json j;
    j["bleu"] = bleu;
    j["chrf"] = chrf_score;
    if (!train_path.empty()) {
        const ParallelCorpus train =
            load_corpus(train_path, detect_format(train_path, train_format), lowercase);
        const std::vector<std::uint64_t> edges = parse_u64_csv(edges_csv);
        const FrequencyBucketTable table = word_accuracy_by_frequency(hyps, refs, train, edges);
        nlohmann::json buckets = nlohmann::json::array();
        std::cout << "word accuracy by training frequency:\n";
        for (const FrequencyBucket& b : table) {
            std::cout << "  " << b.label() << ": " << b.matched << "/" << b.total << " = "
                      << b.accuracy() << "\n";
            buckets.push_back({{"range", b.label()},
                               {"matched", b.matched},
                               {"total", b.total},
                               {"accuracy", b.accuracy()}});
        }
        j["frequency_buckets"] = std::move(buckets);
    }
    if (!json_out.empty()) {
        write_file_atomic(json_out, j.dump(2) + "\n");
    }
    return 0;
}

int cmd_online(const CommonOpts& opts, const std::string& doc_path, const std::string& out_path,
               const std::string& trace_path) {
    const RunConfig cfg = opts.resolve();
    const std::vector<Document> docs = load_documents(doc_path, cfg.lowercase);
    if (docs.empty()) {
        throw std::runtime_error("document file is empty: " + doc_path);
    }
    // One vocabulary over the whole file keeps a single model for all
    // documents; each run still starts from an empty corpus.
    ParallelCorpus vocab_corpus;
    for (const Document& d : docs) {
        for (const SentencePair& p : d.pairs) {
            vocab_corpus.add_pair(p.source, p.target);
        }
    }
    const Vocabulary vocab = build_vocabulary(vocab_corpus);
    const ToyModel model(cfg.model, vocab);

    nlohmann::json report = nlohmann::json::array();
    std::ostringstream trace;
    for (const Document& doc : docs) {
        const OnlineRunResult result =
            run_online(doc, model, vocab, cfg.fusion, cfg.decoder, cfg.retrieval);
        nlohmann::json jd;
        jd["doc_id"] = doc.doc_id;
        jd["bucket"] = doc.bucket();
        jd["sentences"] = doc.pairs.size();
        nlohmann::json hyps = nlohmann::json::array();
        for (const OnlineSentence& s : result.sentences) {
            hyps.push_back(join_tokens(s.hypothesis));
        }
        jd["hypotheses"] = std::move(hyps);
        jd["r_indicator"] = r_report_json(result.r_report);
        jd["bleu"] = result.metrics.bleu;
        jd["chrf"] = result.metrics.chrf;
        report.push_back(std::move(jd));
        if (!trace_path.empty()) {
            for (std::size_t i = 0; i < result.sentences.size(); ++i) {
                for (const StepTrace& t : result.sentences[i].trace) {
                    nlohmann::json rec = trace_record(i, t, vocab);
                    rec["doc_id"] = doc.doc_id;
                    trace << rec.dump() << '\n';
                }
            }
        }
        std::cout << "doc " << (doc.doc_id.empty() ? "<default>" : doc.doc_id) << " ["
                  << doc.bucket() << "]: " << doc.pairs.size() << " sentences, BLEU "
                  << result.metrics.bleu << ", ChrF " << result.metrics.chrf << "\n";
    }
    if (!out_path.empty()) {
        write_file_atomic(out_path, report.dump(2) + "\n");
    }
    if (!trace_path.empty()) {
        write_file_atomic(trace_path, trace.str());
    }
    return 0;
}

int cmd_analyze_sim(const std::string& corpus_path, const std::string& format,
                    const std::string& test_path, int top_n, bool exact,
                    const std::string& out_path, bool lowercase) {
    const ParallelCorpus corpus =
        load_corpus(corpus_path, detect_format(corpus_path, format), lowercase);
    const InvertedIndex index = build_index(corpus);
    const auto sources = load_lines_tokenized(test_path, lowercase);
    const SimilarityHistogram hist =
        corpus_similarity_histogram(index, corpus, sources, top_n, exact);

    std::ostringstream os;
    os << "similarity  sentences  percent\n";
    os << std::fixed;
    for (std::size_t bin = 0; bin < hist.counts.size(); ++bin) {
        const double lo = 0.1 * static_cast<double>(bin);
        const double hi = lo + 0.1;
        os << "[" << std::setprecision(1) << lo << "," << std::setprecision(1) << hi
           << (bin == 9 ? "]" : ")") << "   " << std::setw(9) << hist.counts[bin] << "  "
           << std::setw(6) << std::setprecision(1) << hist.percent(bin) << "%\n";
    }
    std::cout << os.str();
    if (!out_path.empty()) {
        write_file_atomic(out_path, os.str());
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"skmt: translation decoding with per-sentence retrieval datastores"};
    app.require_subcommand(1);

    // index
    auto* index_cmd = app.add_subcommand("index", "build and persist a full-text index");
    std::string idx_corpus, idx_format = "auto", idx_out, idx_json, idx_vocab;
    bool idx_lower = false;
    index_cmd->add_option("--corpus", idx_corpus, "bilingual corpus file")->required();
    index_cmd->add_option("--format", idx_format, "corpus format: auto, tsv, jsonl");
    index_cmd->add_option("--out", idx_out, "output index file")->required();
    index_cmd->add_option("--json-out", idx_json, "also export the index as JSON");
    index_cmd->add_option("--vocab-out", idx_vocab, "persist the vocabulary as JSON");
    index_cmd->add_flag("--lowercase", idx_lower, "lowercase (ASCII) during tokenization");

    // translate
    auto* tr_cmd = app.add_subcommand("translate", "translate a file of source sentences");
    CommonOpts tr_opts;
    tr_opts.attach(tr_cmd);
    std::string tr_input, tr_corpus, tr_format = "auto", tr_index, tr_weights, tr_out, tr_trace;
    tr_cmd->add_option("--input", tr_input, "source sentences, one per line")->required();
    tr_cmd->add_option("--corpus", tr_corpus, "reference corpus (skmt mode)");
    tr_cmd->add_option("--format", tr_format, "corpus format: auto, tsv, jsonl");
    tr_cmd->add_option("--index", tr_index, "index file built by `skmt index` (skmt mode)");
    tr_cmd->add_option("--weights", tr_weights, "external embedding table (float-32 tensor file)");
    tr_cmd->add_option("--out", tr_out, "hypothesis output file")->required();
    tr_cmd->add_option("--trace", tr_trace, "per-step fusion trace (JSONL)");

    // grid
    auto* grid_cmd = app.add_subcommand("grid", "grid search over k, m and tau");
    CommonOpts grid_opts;
    grid_opts.attach(grid_cmd);
    std::string g_dev, g_dev_format = "auto", g_corpus, g_format = "auto", g_index;
    std::string g_k = "1,2,3,4", g_m = "1,2,4,8,16", g_tau = "5,10,20,50,100,150,200";
    std::string g_out, g_json;
    grid_cmd->add_option("--dev", g_dev, "dev bitext with references")->required();
    grid_cmd->add_option("--dev-format", g_dev_format, "dev format: auto, tsv, jsonl");
    grid_cmd->add_option("--corpus", g_corpus, "reference corpus")->required();
    grid_cmd->add_option("--format", g_format, "corpus format: auto, tsv, jsonl");
    grid_cmd->add_option("--index", g_index, "index file")->required();
    grid_cmd->add_option("--k-grid", g_k, "comma-separated k values");
    grid_cmd->add_option("--m-grid", g_m, "comma-separated m values");
    grid_cmd->add_option("--tau-grid", g_tau, "comma-separated tau values");
    grid_cmd->add_option("--out", g_out, "write the ranked table here");
    grid_cmd->add_option("--json-out", g_json, "write rows as JSON");

    // bench
    auto* bench_cmd = app.add_subcommand("bench", "decoding speed and storage benchmark");
    CommonOpts bench_opts;
    bench_opts.attach(bench_cmd);
    std::string b_test, b_corpus, b_format = "auto", b_index, b_widths = "1,4,8,16", b_out;
    std::string b_configs = "skmt1,skmt2";
    int b_reps = 3;
    bench_cmd->add_option("--test", b_test, "test sources, one per line")->required();
    bench_cmd->add_option("--corpus", b_corpus, "reference corpus")->required();
    bench_cmd->add_option("--format", b_format, "corpus format: auto, tsv, jsonl");
    bench_cmd->add_option("--index", b_index, "index file")->required();
    bench_cmd->add_option("--widths", b_widths, "comma-separated batch widths");
    bench_cmd->add_option("--configs", b_configs,
                          "comma-separated rows: skmt1, skmt2, custom (uses --m/--k/--tau)");
    bench_cmd->add_option("--reps", b_reps, "timed repetitions per cell (median reported)");
    bench_cmd->add_option("--out", b_out, "write rows as JSON");

    // eval
    auto* eval_cmd = app.add_subcommand("eval", "score hypotheses against references");
    std::string e_hyp, e_ref, e_train, e_train_format = "auto";
    std::string e_edges = "1,2,5,10,100,1000", e_json;
    bool e_lower = false;
    eval_cmd->add_option("--hyp", e_hyp, "hypothesis file")->required();
    eval_cmd->add_option("--ref", e_ref, "reference file")->required();
    eval_cmd->add_option("--train-corpus", e_train, "training corpus for frequency buckets");
    eval_cmd->add_option("--train-format", e_train_format, "training corpus format");
    eval_cmd->add_option("--bucket-edges", e_edges, "comma-separated frequency cut points");
    eval_cmd->add_option("--json-out", e_json, "write the report as JSON");
    eval_cmd->add_flag("--lowercase", e_lower, "lowercase (ASCII) during tokenization");

    // online
    auto* online_cmd = app.add_subcommand("online", "sentence-by-sentence feedback simulation");
    CommonOpts online_opts;
    online_opts.attach(online_cmd);
    std::string o_doc, o_out, o_trace;
    online_cmd->add_option("--doc", o_doc, "document JSONL with src/tgt and optional doc_id")
        ->required();
    online_cmd->add_option("--out", o_out, "report JSON");
    online_cmd->add_option("--trace", o_trace, "per-step fusion trace (JSONL)");

    // analyze-sim
    auto* sim_cmd = app.add_subcommand("analyze-sim", "test-to-corpus similarity histogram");
    std::string s_corpus, s_format = "auto", s_test, s_out;
    int s_top_n = 64;
    bool s_exact = false, s_lower = false;
    sim_cmd->add_option("--corpus", s_corpus, "reference corpus")->required();
    sim_cmd->add_option("--format", s_format, "corpus format: auto, tsv, jsonl");
    sim_cmd->add_option("--test", s_test, "test sources, one per line")->required();
    sim_cmd->add_option("--top-n", s_top_n, "full-text candidates per sentence");
    sim_cmd->add_flag("--exact", s_exact, "scan every pair instead of the top-n proxy");
    sim_cmd->add_option("--out", s_out, "write the histogram here");
    sim_cmd->add_flag("--lowercase", s_lower, "lowercase (ASCII) during tokenization");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    try {
        if (index_cmd->parsed()) {
            return cmd_index(idx_corpus, idx_format, idx_out, idx_json, idx_vocab, idx_lower);
        }
        if (tr_cmd->parsed()) {
            return cmd_translate(tr_opts, tr_input, tr_corpus, tr_format, tr_index, tr_weights,
                                 tr_out, tr_trace);
        }
        if (grid_cmd->parsed()) {
            return cmd_grid(grid_opts, g_dev, g_dev_format, g_corpus, g_format, g_index, g_k, g_m,
                            g_tau, g_out, g_json);
        }
        if (bench_cmd->parsed()) {
            return cmd_bench(bench_opts, b_test, b_corpus, b_format, b_index, b_widths, b_configs,
                             b_reps, b_out);
        }
        if (eval_cmd->parsed()) {
            return cmd_eval(e_hyp, e_ref, e_train, e_train_format, e_edges, e_json, e_lower);
        }
        if (online_cmd->parsed()) {
            return cmd_online(online_opts, o_doc, o_out, o_trace);
        }
        if (sim_cmd->parsed()) {
            return cmd_analyze_sim(s_corpus, s_format, s_test, s_top_n, s_exact, s_out, s_lower);
        }
    } catch (const ConfigError& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}

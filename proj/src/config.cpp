#include "skmt/config.hpp"

#include <fstream>

#include "json.hpp"

namespace skmt {

void RunConfig::validate() const {
    if (retrieval.top_n < 1) {
        throw ConfigError("retrieval.top_n", "must be >= 1");
    }
    if (fusion.m < 1) {
        throw ConfigError("fusion.m", "must be >= 1");
    }
    if (fusion.m > retrieval.top_n) {
        throw ConfigError("fusion.m", "must be <= retrieval.top_n");
    }
    if (fusion.k < 1) {
        throw ConfigError("fusion.k", "must be >= 1");
    }
    if (!(fusion.tau > 0.0)) {
        throw ConfigError("fusion.tau", "must be > 0");
    }
    if (!(retrieval.bm25_k1 > 0.0)) {
        throw ConfigError("retrieval.bm25_k1", "must be > 0");
    }
    if (retrieval.bm25_b < 0.0 || retrieval.bm25_b > 1.0) {
        throw ConfigError("retrieval.bm25_b", "must be in [0, 1]");
    }
    if (decoder.beam < 1) {
        throw ConfigError("decoder.beam", "must be >= 1");
    }
    if (decoder.max_len < 0) {
        throw ConfigError("decoder.max_len", "must be >= 0 (0 = auto)");
    }
    if (model.hidden_dim < 8) {
        throw ConfigError("model.hidden_dim", "must be >= 8");
    }
    if (!(model.gamma > 0.0 && model.gamma < 1.0)) {
        throw ConfigError("model.gamma", "must be in (0, 1)");
    }
    if (!(model.beta > 0.0)) {
        throw ConfigError("model.beta", "must be > 0");
    }
    if (jobs < 1) {
        throw ConfigError("jobs", "must be >= 1");
    }
}

namespace {

template <typename T>
void get_if(const nlohmann::json& j, const char* key, T& out) {
    if (j.contains(key)) {
        out = j.at(key).get<T>();
    }
}

}  // namespace

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open config file: " + path);
    }
    nlohmann::json j;
    in >> j;
    RunConfig cfg;
    if (j.contains("retrieval")) {
        const auto& r = j["retrieval"];
        get_if(r, "top_n", cfg.retrieval.top_n);
        get_if(r, "bm25_k1", cfg.retrieval.bm25_k1);
        get_if(r, "bm25_b", cfg.retrieval.bm25_b);
    }
    if (j.contains("fusion")) {
        const auto& f = j["fusion"];
        get_if(f, "k", cfg.fusion.k);
        get_if(f, "m", cfg.fusion.m);
        get_if(f, "tau", cfg.fusion.tau);
        if (f.contains("mode")) {
            const std::string mode = f.at("mode").get<std::string>();
            if (mode == "base") {
                cfg.fusion.mode = DecodeMode::base;
            } else if (mode == "skmt") {
                cfg.fusion.mode = DecodeMode::skmt;
            } else {
                throw ConfigError("fusion.mode", "must be \"base\" or \"skmt\"");
            }
        }
    }
    if (j.contains("decoder")) {
        const auto& d = j["decoder"];
        get_if(d, "beam", cfg.decoder.beam);
        get_if(d, "length_penalty", cfg.decoder.length_penalty);
        get_if(d, "max_len", cfg.decoder.max_len);
    }
    if (j.contains("model")) {
        const auto& m = j["model"];
        get_if(m, "hidden_dim", cfg.model.hidden_dim);
        get_if(m, "seed", cfg.model.seed);
        get_if(m, "gamma", cfg.model.gamma);
        get_if(m, "alpha", cfg.model.alpha);
        get_if(m, "beta", cfg.model.beta);
    }
    get_if(j, "lowercase", cfg.lowercase);
    get_if(j, "jobs", cfg.jobs);
    return cfg;
}

std::string run_config_to_json(const RunConfig& cfg) {
    nlohmann::json j;
    j["retrieval"] = {{"top_n", cfg.retrieval.top_n},
                      {"bm25_k1", cfg.retrieval.bm25_k1},
                      {"bm25_b", cfg.retrieval.bm25_b}};
    j["fusion"] = {{"k", cfg.fusion.k},
                   {"m", cfg.fusion.m},
                   {"tau", cfg.fusion.tau},
                   {"mode", cfg.fusion.mode == DecodeMode::base ? "base" : "skmt"}};
    j["decoder"] = {{"beam", cfg.decoder.beam},
                    {"length_penalty", cfg.decoder.length_penalty},
                    {"max_len", cfg.decoder.max_len}};
    j["model"] = {{"hidden_dim", cfg.model.hidden_dim},
                  {"seed", cfg.model.seed},
                  {"gamma", cfg.model.gamma},
                  {"alpha", cfg.model.alpha},
                  {"beta", cfg.model.beta}};
    j["lowercase"] = cfg.lowercase;
    j["jobs"] = cfg.jobs;
    return j.dump(2);
}

}  // namespace skmt

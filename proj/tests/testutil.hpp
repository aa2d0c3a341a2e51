#pragma once

#include <unistd.h>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "skmt/corpus.hpp"

namespace testutil {

// Deterministic generator (splitmix64) so fixtures are identical on
// every platform and run.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t x = (state_ += 0x9e3779b97f4a7c15ULL);
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
        return x ^ (x >> 31);
    }

    // Uniform integer in [lo, hi].
    std::uint64_t uniform(std::uint64_t lo, std::uint64_t hi) {
        return lo + next() % (hi - lo + 1);
    }

    double real() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

private:
    std::uint64_t state_;
};

inline std::vector<skmt::Token> toks(const std::string& space_separated) {
    std::vector<skmt::Token> out;
    std::istringstream ss(space_separated);
    std::string t;
    while (ss >> t) {
        out.push_back(t);
    }
    return out;
}

inline skmt::Token word(std::uint64_t i) { return "w" + std::to_string(i); }

// Random corpus over a closed token pool. Sources are deduplicated when
// unique_sources is set.
inline skmt::ParallelCorpus random_corpus(Rng& rng, std::size_t n_pairs, std::uint64_t pool,
                                          std::size_t min_len = 3, std::size_t max_len = 9,
                                          bool unique_sources = false) {
    skmt::ParallelCorpus corpus;
    std::vector<std::string> seen;
    while (corpus.size() < n_pairs) {
        std::vector<skmt::Token> src;
        const std::size_t slen = rng.uniform(min_len, max_len);
        for (std::size_t i = 0; i < slen; ++i) {
            src.push_back(word(rng.uniform(0, pool - 1)));
        }
        if (unique_sources) {
            std::string key;
            for (const auto& t : src) {
                key += t;
                key.push_back(' ');
            }
            bool dup = false;
            for (const auto& s : seen) {
                if (s == key) {
                    dup = true;
                    break;
                }
            }
            if (dup) {
                continue;
            }
            seen.push_back(key);
        }
        std::vector<skmt::Token> tgt;
        const std::size_t tlen = rng.uniform(min_len, max_len);
        for (std::size_t i = 0; i < tlen; ++i) {
            tgt.push_back(word(rng.uniform(0, pool - 1)));
        }
        corpus.add_pair(std::move(src), std::move(tgt));
    }
    return corpus;
}

// Unique scratch directory under the system temp dir; removed on
// destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static std::uint64_t counter = 0;
        path_ = std::filesystem::temp_directory_path() /
                ("skmt_test_" + tag + "_" + std::to_string(++counter) + "_" +
                 std::to_string(static_cast<std::uint64_t>(::getpid())));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    std::string file(const std::string& name) const { return (path_ / name).string(); }
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

inline void write_text(const std::string& path, const std::string& contents) {
    std::ofstream out(path, std::ios::binary);
    out << contents;
}

inline std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace testutil

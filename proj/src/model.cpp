#include "skmt/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "json.hpp"
#include "skmt/simd/kernels.hpp"

namespace skmt {

namespace {

inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Counter-based PRF over (seed, token id, component index); uniform in
// [-1, 1]. Splittable: any component is computable independently.
inline double prf_component(std::uint64_t seed, std::uint64_t token_id, std::uint64_t component) {
    std::uint64_t h = mix64(seed);
    h = mix64(h ^ token_id);
    h = mix64(h ^ component);
    const double u = static_cast<double>(h >> 11) * 0x1.0p-53;  // [0, 1)
    return 2.0 * u - 1.0;
}

void normalize(std::vector<double>& v) {
    const double norm = std::sqrt(simd::dot(v.data(), v.data(), v.size()));
    if (norm > 0.0) {
        simd::scale(v.data(), 1.0 / norm, v.size());
    }
}

}  // namespace

ToyModel::ToyModel(const ToyModelSpec& spec, const Vocabulary& vocab)
    : spec_(spec), vocab_(&vocab) {
    if (spec_.hidden_dim < 8) {
        throw std::invalid_argument("hidden_dim must be >= 8");
    }
    if (!(spec_.gamma > 0.0 && spec_.gamma < 1.0)) {
        throw std::invalid_argument("gamma must be in (0, 1)");
    }
    if (!(spec_.beta > 0.0)) {
        throw std::invalid_argument("beta must be > 0");
    }
    const std::size_t h = static_cast<std::size_t>(spec_.hidden_dim);
    table_.resize(vocab.size() * h);
    std::vector<double> row_buf(h);
    for (std::size_t id = 0; id < vocab.size(); ++id) {
        for (std::size_t c = 0; c < h; ++c) {
            row_buf[c] = prf_component(spec_.seed, id, c);
        }
        normalize(row_buf);
        std::copy(row_buf.begin(), row_buf.end(), table_.begin() + id * h);
    }
}

ContextVector ToyModel::token_embedding(TokenId id) const {
    if (id < 0 || static_cast<std::size_t>(id) >= vocab_->size()) {
        throw std::out_of_range("token id out of range: " + std::to_string(id));
    }
    const std::size_t h = static_cast<std::size_t>(spec_.hidden_dim);
    return ContextVector(row(id), row(id) + h);
}

ContextVector ToyModel::encode_source(const std::vector<Token>& source) const {
    if (source.empty()) {
        throw std::invalid_argument("cannot encode an empty source");
    }
    const std::size_t h = static_cast<std::size_t>(spec_.hidden_dim);
    ContextVector acc(h, 0.0);
    for (const Token& t : source) {
        simd::axpy(1.0, row(vocab_->id_or_unk(t)), acc.data(), h);
    }
    normalize(acc);
    return acc;
}

ContextVector ToyModel::hidden_state(const ContextVector& source_state,
                                     std::span<const TokenId> prefix) const {
    if (prefix.empty() || prefix.front() != Vocabulary::kBos) {
        throw std::invalid_argument("prefix must begin with the begin-of-sentence id");
    }
    if (source_state.size() != static_cast<std::size_t>(spec_.hidden_dim)) {
        throw std::invalid_argument("source state has wrong dimension");
    }
    const std::size_t h = static_cast<std::size_t>(spec_.hidden_dim);
    // decayed = sum_i gamma^(t-1-i) * emb(prefix[i]), folded left to right.
    ContextVector decayed(h, 0.0);
    for (const TokenId id : prefix) {
        if (id < 0 || static_cast<std::size_t>(id) >= vocab_->size()) {
            throw std::out_of_range("prefix token id out of range: " + std::to_string(id));
        }
        simd::scale(decayed.data(), spec_.gamma, h);
        simd::axpy(1.0, row(id), decayed.data(), h);
    }
    simd::axpy(spec_.alpha, source_state.data(), decayed.data(), h);
    normalize(decayed);
    return decayed;
}

ModelOutput ToyModel::decode_step(const ContextVector& source_state,
                                  std::span<const TokenId> prefix) const {
    ModelOutput out;
    out.hidden = hidden_state(source_state, prefix);
    const std::size_t h = static_cast<std::size_t>(spec_.hidden_dim);
    const std::size_t v = vocab_->size();
    std::vector<double> logits(v);
    simd::matvec(table_.data(), v, h, out.hidden.data(), logits.data());

    double max_logit = logits[0] * spec_.beta;
    for (std::size_t i = 0; i < v; ++i) {
        logits[i] *= spec_.beta;
        max_logit = std::max(max_logit, logits[i]);
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < v; ++i) {
        logits[i] = std::exp(logits[i] - max_logit);
        sum += logits[i];
    }
    simd::scale(logits.data(), 1.0 / sum, v);
    out.dist = std::move(logits);
    return out;
}

void ToyModel::load_weights(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open weight file: " + path);
    }
    unsigned char len_bytes[8];
    in.read(reinterpret_cast<char*>(len_bytes), 8);
    if (!in) {
        throw std::runtime_error("truncated weight file: " + path);
    }
    std::uint64_t header_len = 0;
    for (int i = 7; i >= 0; --i) {
        header_len = (header_len << 8) | len_bytes[i];
    }
    std::string header(header_len, '\0');
    in.read(header.data(), static_cast<std::streamsize>(header_len));
    if (!in) {
        throw std::runtime_error("truncated weight header: " + path);
    }
    const nlohmann::json j = nlohmann::json::parse(header);

    std::uint64_t offset = 0;
    std::uint64_t rows = 0;
    std::uint64_t cols = 0;
    bool found = false;
    for (const auto& t : j.at("tensors")) {
        if (t.at("name").get<std::string>() == "embedding") {
            const auto shape = t.at("shape");
            rows = shape.at(0).get<std::uint64_t>();
            cols = shape.at(1).get<std::uint64_t>();
            offset = t.value("offset", 0ULL);
            found = true;
            break;
        }
    }
    if (!found) {
        throw std::runtime_error("weight file has no \"embedding\" tensor");
    }
    if (rows != vocab_->size() || cols != static_cast<std::uint64_t>(spec_.hidden_dim)) {
        throw std::runtime_error("embedding shape mismatch: expected [" +
                                 std::to_string(vocab_->size()) + ", " +
                                 std::to_string(spec_.hidden_dim) + "]");
    }
    in.seekg(static_cast<std::streamoff>(8 + header_len + offset * 4));
    std::vector<float> payload(rows * cols);
    in.read(reinterpret_cast<char*>(payload.data()),
            static_cast<std::streamsize>(payload.size() * sizeof(float)));
    if (!in) {
        throw std::runtime_error("truncated weight payload: " + path);
    }
    table_.assign(payload.begin(), payload.end());
}

}  // namespace skmt

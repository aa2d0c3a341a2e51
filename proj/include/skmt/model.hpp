#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "skmt/corpus.hpp"

namespace skmt {

// Hidden representation of (source, target prefix); unit L2 norm.
using ContextVector = std::vector<double>;

// Probability vector over vocabulary ids; entries >= 0, sums to 1
// within 1e-9.
using Distribution = std::vector<double>;

struct ModelOutput {
    ContextVector hidden;
    Distribution dist;
};

// Contract every decoder-side component depends on. Implementations
// must be pure functions of their arguments (identical inputs yield
// bit-identical outputs) and reentrant.
class ContextModel {
public:
    virtual ~ContextModel() = default;

    virtual int hidden_dim() const = 0;
    virtual int vocab_size() const = 0;

    // Unit-norm bag encoding of the source sentence. Throws on empty
    // input. Unknown tokens map to the unknown id.
    virtual ContextVector encode_source(const std::vector<Token>& source) const = 0;

    // Hidden state for (source, prefix). The prefix must start with the
    // begin-of-sentence id.
    virtual ContextVector hidden_state(const ContextVector& source_state,
                                       std::span<const TokenId> prefix) const = 0;

    // Hidden state plus next-token distribution.
    virtual ModelOutput decode_step(const ContextVector& source_state,
                                    std::span<const TokenId> prefix) const = 0;
};

struct ToyModelSpec {
    int hidden_dim = 64;
    std::uint64_t seed = 0;
    double gamma = 0.7;  // prefix decay, in (0, 1); makes the prefix order-sensitive
    double alpha = 1.0;  // source weight
    double beta = 10.0;  // logit scale
};

// Deterministic untrained model: embeddings come from a counter-based
// pseudorandom function of (seed, token id, component), the prefix is
// folded in with geometric decay, and logits are dot products against
// the same embedding table.
class ToyModel : public ContextModel {
public:
    // The vocabulary must outlive the model.
    ToyModel(const ToyModelSpec& spec, const Vocabulary& vocab);

    int hidden_dim() const override { return spec_.hidden_dim; }
    int vocab_size() const override { return static_cast<int>(vocab_->size()); }
    const ToyModelSpec& spec() const { return spec_; }
    const Vocabulary& vocab() const { return *vocab_; }

    // Unit-norm embedding row for a token id. Throws on an invalid id.
    ContextVector token_embedding(TokenId id) const;

    ContextVector encode_source(const std::vector<Token>& source) const override;
    ContextVector hidden_state(const ContextVector& source_state,
                               std::span<const TokenId> prefix) const override;
    ModelOutput decode_step(const ContextVector& source_state,
                            std::span<const TokenId> prefix) const override;

    // Replaces the embedding table from a weight file: 8-byte
    // little-endian header length, JSON header with tensor names and
    // shapes, then the raw float-32 payload. The file must contain an
    // "embedding" tensor of shape [vocab_size, hidden_dim].
    void load_weights(const std::string& path);

private:
    const double* row(TokenId id) const {
        return table_.data() + static_cast<std::size_t>(id) * static_cast<std::size_t>(spec_.hidden_dim);
    }

    ToyModelSpec spec_;
    const Vocabulary* vocab_;
    std::vector<double> table_;  // vocab_size x hidden_dim, row-major
};

}  // namespace skmt

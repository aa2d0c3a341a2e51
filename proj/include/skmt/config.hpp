#pragma once

#include <stdexcept>
#include <string>

#include "skmt/fusion.hpp"
#include "skmt/model.hpp"
#include "skmt/retrieval.hpp"

namespace skmt {

// Raised when a configuration value is out of range; carries the field
// name so the CLI can report it and exit with the validation code.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& field, const std::string& what)
        : std::runtime_error(field + ": " + what), field_(field) {}
    const std::string& field() const { return field_; }

private:
    std::string field_;
};

struct RunConfig {
    RetrievalConfig retrieval;
    FusionConfig fusion;
    DecoderConfig decoder;
    ToyModelSpec model;
    bool lowercase = false;
    int jobs = 1;

    // Throws ConfigError naming the offending field.
    void validate() const;
};

// Loads a JSON config file; absent keys keep their defaults. Flag
// overrides are applied by the CLI after this.
RunConfig load_run_config(const std::string& path);

std::string run_config_to_json(const RunConfig& cfg);

}  // namespace skmt

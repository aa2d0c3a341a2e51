#include "doctest.h"
#include "skmt/config.hpp"
#include "testutil.hpp"

using namespace skmt;

TEST_CASE("default config validates") {
    RunConfig cfg;
    CHECK_NOTHROW(cfg.validate());
}

TEST_CASE("validation names the offending field") {
    RunConfig cfg;
    cfg.fusion.m = 100;
    cfg.retrieval.top_n = 64;
    try {
        cfg.validate();
        FAIL("expected a validation error");
    } catch (const ConfigError& e) {
        CHECK(e.field() == "fusion.m");
    }

    cfg = RunConfig{};
    cfg.fusion.tau = 0.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);

    cfg = RunConfig{};
    cfg.model.gamma = 1.5;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("config file round-trip") {
    RunConfig cfg;
    cfg.fusion = FusionConfig{2, 16, 100.0, DecodeMode::skmt};
    cfg.decoder.beam = 8;
    cfg.model.seed = 42;
    cfg.lowercase = true;

    testutil::TempDir dir("config");
    testutil::write_text(dir.file("cfg.json"), run_config_to_json(cfg));
    const RunConfig loaded = load_run_config(dir.file("cfg.json"));
    CHECK(loaded.fusion.k == 2);
    CHECK(loaded.fusion.m == 16);
    CHECK(loaded.fusion.tau == 100.0);
    CHECK(loaded.fusion.mode == DecodeMode::skmt);
    CHECK(loaded.decoder.beam == 8);
    CHECK(loaded.model.seed == 42);
    CHECK(loaded.lowercase);
}

TEST_CASE("partial config keeps defaults elsewhere") {
    testutil::TempDir dir("config_partial");
    testutil::write_text(dir.file("cfg.json"), "{\"fusion\": {\"m\": 8}}");
    const RunConfig loaded = load_run_config(dir.file("cfg.json"));
    CHECK(loaded.fusion.m == 8);
    CHECK(loaded.fusion.k == FusionConfig{}.k);
    CHECK(loaded.decoder.beam == 4);
    CHECK(loaded.retrieval.top_n == 64);
}

TEST_CASE("bad mode string is rejected") {
    testutil::TempDir dir("config_bad");
    testutil::write_text(dir.file("cfg.json"), "{\"fusion\": {\"mode\": \"turbo\"}}");
    CHECK_THROWS_AS(load_run_config(dir.file("cfg.json")), ConfigError);
}

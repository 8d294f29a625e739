#include "mesh/space.hpp"

#include <cmath>
#include <set>

#include <doctest.h>

#include "mesh/errors.hpp"
#include "mesh/rng.hpp"
#include "support/helpers.hpp"
#include "support/oracles.hpp"

using namespace mesh;

TEST_CASE("space JSON round-trip preserves the declaration") {
    const auto space = test::xgb_space();
    const auto again = HyperparamSpace::from_json(space.to_json());
    CHECK(again.size() == 4);
    CHECK(again.params()[0].name == "lambda");
    CHECK(again.params()[0].scale == ParamScale::Log);
    CHECK(again.params()[2].kind == ParamKind::Integer);
    CHECK(again.same_layout(space));
}

TEST_CASE("space declaration errors") {
    CHECK_THROWS_AS(HyperparamSpace({{"a", ParamKind::Continuous, 2.0, 1.0, ParamScale::Linear}}),
                    ConfigError);
    CHECK_THROWS_AS(HyperparamSpace({{"a", ParamKind::Continuous, 0.0, 1.0, ParamScale::Log}}),
                    ConfigError);
    CHECK_THROWS_AS(HyperparamSpace({{"a", ParamKind::Integer, 0.5, 3.0, ParamScale::Linear}}),
                    ConfigError);
    CHECK_THROWS_AS(
        HyperparamSpace({{"a", ParamKind::Continuous, 0.0, 1.0, ParamScale::Linear},
                         {"a", ParamKind::Continuous, 0.0, 1.0, ParamScale::Linear}}),
        ConfigError);
    CHECK_THROWS_AS(HyperparamSpace::from_json(nlohmann::json{{"params", 3}}), ConfigError);
}

TEST_CASE("config id string round-trip and ordering") {
    const ConfigId id{42, 7};
    CHECK(id.str() == "42:7");
    CHECK(ConfigId::parse("42:7") == id);
    CHECK(ConfigId{1, 9} < ConfigId{2, 0});
    CHECK(ConfigId{2, 1} < ConfigId{2, 3});
    CHECK_THROWS_AS(ConfigId::parse("junk"), DataError);
}

TEST_CASE("degenerate point range always samples the single value") {
    const HyperparamSpace space({{"depth", ParamKind::Integer, 3, 3, ParamScale::Linear}});
    const auto configs = sample_configurations(space, 50, 11);
    for (const auto& config : configs) {
        CHECK(config.values[0] == 3.0);
    }
}

TEST_CASE("linear sampling mean approaches the midpoint") {
    const HyperparamSpace space({{"u", ParamKind::Continuous, 0.0, 1.0, ParamScale::Linear}});
    const auto configs = sample_configurations(space, 10000, 3);
    double mean = 0.0;
    for (const auto& config : configs) mean += config.values[0];
    mean /= 10000.0;
    CHECK(std::fabs(mean - 0.5) < 0.02);
}

TEST_CASE("sampling is deterministic and prefix-stable") {
    const auto space = test::xgb_space();
    const auto a = sample_configurations(space, 32, 99);
    const auto b = sample_configurations(space, 32, 99);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].id == b[i].id);
        CHECK(a[i].values == b[i].values);
    }
    const auto prefix = sample_configurations(space, 8, 99);
    for (std::size_t i = 0; i < prefix.size(); ++i) {
        CHECK(prefix[i].values == a[i].values);
    }
}

TEST_CASE("samples satisfy the configuration invariants over random spaces") {
    Rng rng(7);
    for (int trial = 0; trial < 40; ++trial) {
        std::vector<ParamDef> defs;
        const int n_params = static_cast<int>(rng.uniform_int(1, 5));
        for (int p = 0; p < n_params; ++p) {
            ParamDef d;
            d.name = "p" + std::to_string(p);
            if (rng.uniform01() < 0.4) {
                d.kind = ParamKind::Integer;
                const auto lo = rng.uniform_int(-5, 20);
                d.lower = static_cast<double>(lo);
                d.upper = static_cast<double>(lo + rng.uniform_int(1, 30));
                d.scale = ParamScale::Linear;
                if (d.lower > 0 && rng.uniform01() < 0.3) d.scale = ParamScale::Log;
            } else {
                d.kind = ParamKind::Continuous;
                if (rng.uniform01() < 0.5) {
                    d.scale = ParamScale::Log;
                    d.lower = std::exp(rng.uniform(-6.0, 0.0));
                    d.upper = d.lower * std::exp(rng.uniform(0.5, 6.0));
                } else {
                    d.scale = ParamScale::Linear;
                    d.lower = rng.uniform(-10.0, 10.0);
                    d.upper = d.lower + rng.uniform(0.1, 20.0);
                }
            }
            defs.push_back(d);
        }
        const HyperparamSpace space(defs);
        const auto configs = sample_configurations(space, 64, rng.uniform_int(0, 1 << 20));
        for (const auto& config : configs) {
            CHECK_NOTHROW(space.check(config));
        }
    }
}

TEST_CASE("log-scale samples are uniform in the log domain") {
    const double lo = 1e-3;
    const double hi = 1e2;
    const HyperparamSpace space({{"lambda", ParamKind::Continuous, lo, hi, ParamScale::Log}});
    const auto configs = sample_configurations(space, 100000, 123);
    std::vector<double> logs;
    logs.reserve(configs.size());
    for (const auto& config : configs) logs.push_back(std::log(config.values[0]));
    CHECK(test::ks_uniform(std::move(logs), std::log(lo), std::log(hi)) < 0.02);
}

TEST_CASE("config meta-features log-transform log-scaled params") {
    const auto space = test::xgb_space();
    Configuration config;
    config.id = {0, 0};
    config.values = {10.0, 0.5, 6.0, 0.1};
    const auto mf = space.config_metafeatures(config);
    CHECK(mf[0] == doctest::Approx(std::log(10.0)));
    CHECK(mf[1] == 0.5);
    CHECK(mf[2] == 6.0);
    CHECK(mf[3] == doctest::Approx(std::log(0.1)));
}

TEST_CASE("values_json and config_from_values round-trip") {
    const auto space = test::xgb_space();
    const auto configs = sample_configurations(space, 4, 5);
    for (const auto& config : configs) {
        const auto j = space.values_json(config);
        const auto back = space.config_from_values(config.id, j);
        CHECK(back.values == config.values);
    }
    CHECK_THROWS_AS(space.config_from_values({0, 0}, nlohmann::json{{"lambda", 1.0}}),
                    DataError);
}

TEST_CASE("bounds violations are contract violations") {
    const auto space = test::xgb_space();
    Configuration config;
    config.id = {0, 0};
    config.values = {1e3, 0.5, 6.0, 0.1};  // lambda above its upper bound
    CHECK_THROWS_AS(space.check(config), ContractViolation);
    config.values = {1.0, 0.5, 6.5, 0.1};  // fractional max_depth
    CHECK_THROWS_AS(space.check(config), ContractViolation);
}

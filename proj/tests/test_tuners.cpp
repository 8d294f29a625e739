#include "mesh/tuner.hpp"

#include <algorithm>
#include <cmath>

#include <doctest.h>

#include "mesh/errors.hpp"
#include "mesh/rng.hpp"
#include "support/helpers.hpp"
#include "support/oracles.hpp"

using namespace mesh;

namespace {

// The four-config crossover table: early ranking disagrees with the final
// one, so greedy elimination discards the eventual winners.
//   losses at r_0:   .1 .2 .3 .4
//   losses at r_max: .5 .4 .1 .2
LossCurveTable crossover_table(const HyperparamSpace& space) {
    const auto sched = build_schedule(16, 32, 2.0);
    return test::make_table("crossover", sched, space,
                            {{0.1, 0.5}, {0.2, 0.4}, {0.3, 0.1}, {0.4, 0.2}});
}

std::vector<ConfigId> ids_of(const std::vector<Configuration>& configs) {
    std::vector<ConfigId> ids;
    for (const auto& c : configs) ids.push_back(c.id);
    return ids;
}

}  // namespace

TEST_CASE("top_k picks the smallest scores") {
    const auto space = test::xgb_space();
    const auto configs = sample_configurations(space, 3, 0);
    const auto kept = top_k(configs, {0.3, 0.1, 0.2}, 1);
    REQUIRE(kept.size() == 1);
    CHECK(kept.front().id == configs[1].id);
}

TEST_CASE("top_k breaks ties by lower config id") {
    const auto space = test::xgb_space();
    const auto configs = sample_configurations(space, 3, 0);
    const auto kept = top_k(configs, {0.2, 0.2, 0.5}, 1);
    REQUIRE(kept.size() == 1);
    CHECK(kept.front().id == configs[0].id);
}

TEST_CASE("top_k contract violations") {
    const auto space = test::xgb_space();
    const auto configs = sample_configurations(space, 3, 0);
    CHECK_THROWS_AS(top_k(configs, {0.1, 0.2}, 1), ContractViolation);
    CHECK_THROWS_AS(top_k(configs, {0.1, 0.2, 0.3}, 4), ContractViolation);
    CHECK_THROWS_AS(top_k(configs, {0.1, 0.2, 0.3}, 0), ContractViolation);
}

TEST_CASE("top_k matches the full-sort oracle on random inputs") {
    const auto space = test::xgb_space();
    Rng rng(17);
    for (int trial = 0; trial < 1000; ++trial) {
        const auto n = rng.uniform_int(1, 20);
        const auto configs = sample_configurations(space, n, rng.uniform_int(0, 1 << 16));
        std::vector<double> scores(static_cast<std::size_t>(n));
        for (auto& s : scores) s = rng.uniform_int(0, 5) / 5.0;  // plenty of ties
        const auto k = static_cast<std::size_t>(rng.uniform_int(1, n));
        const auto kept = top_k(configs, scores, k);

        const auto expect = test::top_k_oracle(scores, ids_of(configs), k);
        std::vector<ConfigId> kept_ids = ids_of(kept);
        std::sort(kept_ids.begin(), kept_ids.end());
        std::vector<ConfigId> expect_ids;
        for (auto i : expect) expect_ids.push_back(configs[i].id);
        std::sort(expect_ids.begin(), expect_ids.end());
        CHECK(kept_ids == expect_ids);
    }
}

TEST_CASE("random search on a replay table") {
    const auto space = test::xgb_space();
    const auto sched = build_schedule(16, 32, 2.0);
    std::vector<std::vector<double>> losses;
    for (int c = 0; c < 12; ++c) {
        losses.push_back({0.5, 0.2 + 0.02 * c});
    }
    const auto table = test::make_table("rs", sched, space, losses);

    SUBCASE("k=1 returns that config's top-resource loss") {
        ReplayEvaluator evaluator(table);
        const auto result = run_random_search(evaluator, space, 1, 32, 5);
        const auto sampled = evaluator.sample_candidates(1, 5);
        CHECK(result.best_config.id == sampled.front().id);
        CHECK(result.best_loss == table.find(sampled.front().id)->losses.at(32));
    }

    SUBCASE("k=7 equals the brute-force minimum over the sampled subset") {
        ReplayEvaluator evaluator(table);
        const auto result = run_random_search(evaluator, space, 7, 32, 9);
        const auto sampled = evaluator.sample_candidates(7, 9);
        double expect = std::numeric_limits<double>::infinity();
        for (const auto& config : sampled) {
            expect = std::min(expect, table.find(config.id)->losses.at(32));
        }
        CHECK(result.best_loss == expect);
        CHECK(result.trials.size() == 7);
    }

    SUBCASE("fixed seed reproduces the result") {
        ReplayEvaluator a(table);
        ReplayEvaluator b(table);
        const auto ra = run_random_search(a, space, 5, 32, 123);
        const auto rb = run_random_search(b, space, 5, 32, 123);
        CHECK(ra.best_loss == rb.best_loss);
        CHECK(ra.best_config.id == rb.best_config.id);
        CHECK(ra.resource_spent == rb.resource_spent);
    }
}

TEST_CASE("successive halving keeps the best when rankings agree") {
    const auto space = test::xgb_space();
    const auto sched = build_schedule(16, 64, 2.0);
    // ordering is the same at every level
    std::vector<std::vector<double>> losses;
    for (int c = 0; c < 4; ++c) {
        const double base = 0.1 + 0.1 * c;
        losses.push_back({base + 0.2, base + 0.1, base});
    }
    const auto table = test::make_table("consistent", sched, space, losses);
    ReplayEvaluator evaluator(table);
    const auto result = run_successive_halving(evaluator, space, 4, sched, 0);

    double global_best = std::numeric_limits<double>::infinity();
    for (const auto& entry : table.entries) {
        global_best = std::min(global_best, entry.losses.at(64));
    }
    CHECK(result.best_loss == global_best);
}

TEST_CASE("successive halving is fooled by the crossover table") {
    const auto space = test::xgb_space();
    const auto table = crossover_table(space);
    ReplayEvaluator evaluator(table);
    const auto result =
        run_successive_halving(evaluator, space, 4, table.schedule, 0);

    // Hand trace: round 0 keeps the two smallest early losses (configs with
    // finals .5 and .4), so the returned loss is .4, not the global best .1.
    CHECK(result.best_loss == 0.4);
    REQUIRE(result.elimination_trace.size() == 2);
    const auto& survivors = result.elimination_trace[0];
    const auto sorted_entries = table.entries;  // sorted by id
    CHECK(std::find(survivors.begin(), survivors.end(), sorted_entries[0].config.id) !=
          survivors.end());
    CHECK(std::find(survivors.begin(), survivors.end(), sorted_entries[1].config.id) !=
          survivors.end());
    CHECK(std::find(survivors.begin(), survivors.end(), sorted_entries[2].config.id) ==
          survivors.end());
    CHECK(std::find(survivors.begin(), survivors.end(), sorted_entries[3].config.id) ==
          survivors.end());
}

TEST_CASE("the oracle bundle fixes the crossover case") {
    const auto space = test::xgb_space();
    auto shared = std::make_shared<const LossCurveTable>(crossover_table(space));
    ReplayEvaluator evaluator(*shared);
    OracleBundle bundle(shared);
    const auto result =
        run_mesh(evaluator, space, 4, shared->schedule, bundle, std::nullopt, 0);
    CHECK(result.best_loss == 0.1);
    // round 0 keeps the configs with the best true finals
    const auto& survivors = result.elimination_trace[0];
    CHECK(std::find(survivors.begin(), survivors.end(),
                    shared->entries[2].config.id) != survivors.end());
    CHECK(std::find(survivors.begin(), survivors.end(),
                    shared->entries[3].config.id) != survivors.end());
}

TEST_CASE("exactly one survivor at the final round when n = eta^s_max") {
    const auto space = test::xgb_space();
    const auto sched = build_schedule(16, 64, 2.0);
    Rng rng(77);
    std::vector<std::vector<double>> losses(4, std::vector<double>(3));
    for (auto& row : losses) {
        for (auto& v : row) v = rng.uniform01();
    }
    const auto table = test::make_table("pow", sched, space, losses);
    ReplayEvaluator evaluator(table);
    const auto result = run_successive_halving(evaluator, space, 4, sched, 1);
    CHECK(result.elimination_trace.back().size() == 1);
}

TEST_CASE("passthrough bundle reproduces successive halving exactly") {
    const auto space = test::xgb_space();
    Rng rng(4242);
    for (int trial = 0; trial < 200; ++trial) {
        ResourceSchedule sched;
        const auto table = test::random_table(rng, space, &sched);
        const auto n = static_cast<std::int64_t>(table.entries.size());
        const auto seed = rng.uniform_int(0, 1 << 20);

        ReplayEvaluator sh_eval(table);
        const auto sh = run_successive_halving(sh_eval, space, n, sched, seed);

        ReplayEvaluator mesh_eval(table);
        PassthroughBundle bundle;
        const auto meshed =
            run_mesh(mesh_eval, space, n, sched, bundle, std::nullopt, seed);

        REQUIRE(sh.elimination_trace.size() == meshed.elimination_trace.size());
        for (std::size_t i = 0; i < sh.elimination_trace.size(); ++i) {
            CHECK(sh.elimination_trace[i] == meshed.elimination_trace[i]);
        }
        CHECK(sh.best_loss == meshed.best_loss);
        CHECK(sh.best_config.id == meshed.best_config.id);
        CHECK(sh.resource_spent == meshed.resource_spent);
    }
}

TEST_CASE("single-round ladder reduces to random search over n configs") {
    const auto space = test::xgb_space();
    const auto sched = build_schedule(32, 32, 2.0);
    Rng rng(5150);
    std::vector<std::vector<double>> losses(10, std::vector<double>(1));
    for (auto& row : losses) row[0] = rng.uniform01();
    const auto table = test::make_table("flat", sched, space, losses);

    ReplayEvaluator evaluator(table);
    PassthroughBundle bundle;
    const auto result = run_mesh(evaluator, space, 10, sched, bundle, std::nullopt, 3);
    double expect = std::numeric_limits<double>::infinity();
    for (const auto& entry : table.entries) {
        expect = std::min(expect, entry.losses.at(32));
    }
    CHECK(result.best_loss == expect);
}

TEST_CASE("budget parity between halving and the meta-driven variant") {
    const auto space = test::xgb_space();
    for (std::int64_t n : {4, 8, 16, 32, 64, 128, 256}) {
        const auto sched = build_schedule(2, 2 * n, 2.0);
        REQUIRE((1LL << sched.s_max) == n);
        std::vector<std::vector<double>> losses(static_cast<std::size_t>(n));
        Rng rng(static_cast<std::uint64_t>(n));
        for (auto& row : losses) {
            row.resize(sched.resources.size());
            for (auto& v : row) v = rng.uniform01();
        }
        const auto table = test::make_table("parity", sched, space, losses);

        std::int64_t expect = 0;
        const auto sizes = cohort_sizes(n, sched);
        for (std::size_t i = 0; i < sizes.size(); ++i) {
            expect += sizes[i] * sched.resources[i];
        }

        ReplayEvaluator sh_eval(table);
        const auto sh = run_successive_halving(sh_eval, space, n, sched, 0);
        CHECK(sh.resource_spent == expect);

        ReplayEvaluator mesh_eval(table);
        PassthroughBundle bundle;
        const auto meshed = run_mesh(mesh_eval, space, n, sched, bundle, std::nullopt, 0);
        CHECK(meshed.resource_spent == expect);

        ReplayEvaluator rs_eval(table);
        const auto k = equivalent_rs_budget(n, sched);
        const auto rs = run_random_search(rs_eval, space, k, sched.top_resource(), 0);
        CHECK(rs.resource_spent <= expect);
    }
}

TEST_CASE("survivor counts follow the cohort sizes") {
    const auto space = test::xgb_space();
    Rng rng(8888);
    for (int trial = 0; trial < 100; ++trial) {
        ResourceSchedule sched;
        const auto table = test::random_table(rng, space, &sched);
        const auto n = static_cast<std::int64_t>(table.entries.size());
        ReplayEvaluator evaluator(table);
        const auto result = run_successive_halving(evaluator, space, n, sched, 3);
        const auto sizes = cohort_sizes(n, sched);
        for (std::size_t i = 0; i + 1 < sizes.size(); ++i) {
            CHECK(static_cast<std::int64_t>(result.elimination_trace[i].size()) ==
                  sizes[i + 1]);
        }
    }
}

TEST_CASE("best loss is the minimum top-resource loss in the trial log") {
    const auto space = test::xgb_space();
    Rng rng(1212);
    for (int trial = 0; trial < 100; ++trial) {
        ResourceSchedule sched;
        const auto table = test::random_table(rng, space, &sched);
        const auto n = static_cast<std::int64_t>(table.entries.size());
        ReplayEvaluator evaluator(table);
        const auto result = run_successive_halving(evaluator, space, n, sched, 9);
        double expect = std::numeric_limits<double>::infinity();
        for (const auto& rec : result.trials) {
            const auto it = rec.losses.find(sched.s_max);
            if (it != rec.losses.end()) expect = std::min(expect, it->second);
        }
        CHECK(result.best_loss == expect);
    }
}

TEST_CASE("tuner results are independent of the worker count") {
    Rng rng(31337);
    const auto ds = test::random_dataset(rng, "threads", 64, 3);
    const auto space = test::xgb_space();
    const auto sched = build_schedule(4, 16, 2.0);

    TuneResult results[3];
    const int workers[] = {1, 4, 8};
    for (int w = 0; w < 3; ++w) {
        GbdtEvaluator evaluator(ds, space);
        TunerOptions opts;
        opts.workers = workers[w];
        results[w] = run_successive_halving(evaluator, space, 8, sched, 555, opts);
    }
    CHECK(results[0].best_loss == results[1].best_loss);
    CHECK(results[0].best_loss == results[2].best_loss);
    CHECK(results[0].best_config.id == results[1].best_config.id);
    for (int w = 1; w < 3; ++w) {
        REQUIRE(results[0].log.size() == results[w].log.size());
        for (std::size_t i = 0; i < results[0].log.size(); ++i) {
            CHECK(results[0].log[i].observed == results[w].log[i].observed);
            CHECK(results[0].log[i].config_id == results[w].log[i].config_id);
        }
    }
}

TEST_CASE("evaluator failures carry the config id") {
    const auto space = test::xgb_space();
    const auto sched = build_schedule(16, 32, 2.0);
    auto table = test::make_table("broken", sched, space, {{0.1, 0.2}, {0.3, 0.4}});
    // sabotage the second entry after validation by dropping a level
    table.entries[1].losses.erase(32);
    ReplayEvaluator evaluator(table);
    const auto bad_id = table.entries[1].config.id;
    try {
        run_successive_halving(evaluator, space, 2, sched, 0);
        FAIL("expected a DataError");
    } catch (const DataError& e) {
        CHECK(std::string(e.what()).find(bad_id.str()) != std::string::npos);
    }
}

TEST_CASE("missing bundle round is a config error") {
    const auto space = test::xgb_space();
    const auto table = crossover_table(space);

    // A trained-style bundle that covers nothing.
    class EmptyBundle : public MetaModelBundle {
    public:
        bool covers(int) const override { return false; }
        std::vector<int> landmark_rounds(int) const override { return {}; }
        double predict(int, const DatasetMetaFeatures*, const HyperparamSpace&,
                       const Configuration&, const std::vector<double>&) const override {
            return 0.0;
        }
        std::string describe() const override { return "empty"; }
    };

    ReplayEvaluator evaluator(table);
    EmptyBundle bundle;
    CHECK_THROWS_AS(
        run_mesh(evaluator, space, 4, table.schedule, bundle, std::nullopt, 0),
        ConfigError);
}

TEST_CASE("run log is written and reconstructible") {
    const auto space = test::xgb_space();
    const auto table = crossover_table(space);
    ReplayEvaluator evaluator(table);
    const auto result = run_successive_halving(evaluator, space, 4, table.schedule, 0);

    test::TempDir dir("runlog");
    const auto path = dir.file("run.jsonl");
    result.write_log(path, nlohmann::json{{"dataset_id", "crossover"}});

    std::ifstream in(path);
    std::string line;
    REQUIRE(std::getline(in, line));  // header
    auto header = nlohmann::json::parse(line);
    CHECK(header["dataset_id"] == "crossover");

    // Rebuild the per-round survivor sets from the survived flags alone.
    std::map<int, std::vector<ConfigId>> survivors;
    while (std::getline(in, line)) {
        const auto rec = nlohmann::json::parse(line);
        if (rec["survived"].get<bool>()) {
            survivors[rec["round"].get<int>()].push_back(
                ConfigId::parse(rec["config_id"].get<std::string>()));
        }
    }
    REQUIRE(survivors.size() == result.elimination_trace.size());
    for (std::size_t i = 0; i < result.elimination_trace.size(); ++i) {
        auto ids = survivors[static_cast<int>(i)];
        std::sort(ids.begin(), ids.end());
        CHECK(ids == result.elimination_trace[i]);
    }
}

#include "mesh/evaluator.hpp"

#include <cmath>

#include <doctest.h>

#include "mesh/errors.hpp"
#include "support/helpers.hpp"

using namespace mesh;

namespace {

// val labels are the complement of what the train split teaches, so every
// boosting round makes validation strictly worse.
Dataset overfit_dataset() {
    std::vector<std::vector<double>> x;
    std::vector<int> y;
    for (int r = 0; r < 24; ++r) {
        const int cls = r % 2;
        x.push_back({cls == 1 ? 1.0 + 0.01 * r : -1.0 - 0.01 * r});
        y.push_back(r < 16 ? cls : 1 - cls);  // rows 16.. have flipped labels
    }
    std::vector<std::int32_t> train_idx, val_idx;
    for (int r = 0; r < 16; ++r) train_idx.push_back(r);
    for (int r = 16; r < 24; ++r) val_idx.push_back(r);
    return test::make_dataset("overfit", x, y, train_idx, val_idx);
}

Configuration config_of(double lambda, double colsample, int depth, double lr,
                        std::uint64_t seed = 1, std::uint64_t index = 0) {
    Configuration config;
    config.id = {seed, index};
    config.values = {lambda, colsample, static_cast<double>(depth), lr};
    return config;
}

}  // namespace

TEST_CASE("replay evaluator looks up recorded losses") {
    const auto sched = build_schedule(16, 32, 2.0);
    const auto space = test::xgb_space();
    const auto table = test::make_table("replay", sched, space, {{0.40, 0.35}});
    ReplayEvaluator evaluator(table);
    const auto config = table.entries.front().config;
    CHECK(evaluator.evaluate(config, 32) == 0.35);
    CHECK(evaluator.evaluate(config, 16) == 0.40);
    // repeated calls return identical losses
    CHECK(evaluator.evaluate(config, 32) == 0.35);
}

TEST_CASE("replay evaluator rejects unknown configs and levels") {
    const auto sched = build_schedule(16, 32, 2.0);
    const auto space = test::xgb_space();
    const auto table = test::make_table("replay", sched, space, {{0.40, 0.35}});
    ReplayEvaluator evaluator(table);
    Configuration stranger = table.entries.front().config;
    stranger.id = {9999, 4};
    CHECK_THROWS_AS(evaluator.evaluate(stranger, 32), DataError);
    CHECK_THROWS_AS(evaluator.evaluate(table.entries.front().config, 48), DataError);
}

TEST_CASE("replay sampling is deterministic, prefix-stable and bounded") {
    const auto sched = build_schedule(16, 32, 2.0);
    const auto space = test::xgb_space();
    std::vector<std::vector<double>> losses(10, {0.5, 0.4});
    for (std::size_t i = 0; i < losses.size(); ++i) losses[i][1] = 0.1 + 0.01 * i;
    const auto table = test::make_table("replay", sched, space, losses);
    ReplayEvaluator evaluator(table);

    const auto a = evaluator.sample_candidates(6, 3);
    const auto b = evaluator.sample_candidates(6, 3);
    REQUIRE(a.size() == 6);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].id == b[i].id);
    const auto prefix = evaluator.sample_candidates(3, 3);
    for (std::size_t i = 0; i < prefix.size(); ++i) CHECK(prefix[i].id == a[i].id);
    CHECK_THROWS_AS(evaluator.sample_candidates(11, 3), DataError);
}

TEST_CASE("gbdt evaluator at resource 0 returns the base loss") {
    Rng rng(5);
    const auto ds = test::random_dataset(rng, "base", 40, 2);
    GbdtEvaluator evaluator(ds, test::xgb_space());
    const auto loss = evaluator.evaluate(config_of(1.0, 1.0, 2, 0.1), 0);
    CHECK(std::isfinite(loss));
    CHECK(loss > 0.0);
}

TEST_CASE("warm ascent costs one training run: 16 then 32 is 32 fits") {
    Rng rng(31);
    const auto ds = test::random_dataset(rng, "warm", 48, 3);
    GbdtEvaluator evaluator(ds, test::xgb_space());
    const auto config = config_of(1.0, 1.0, 3, 0.1);
    evaluator.evaluate(config, 16);
    CHECK(evaluator.trees_trained() == 16);
    evaluator.evaluate(config, 32);
    CHECK(evaluator.trees_trained() == 32);
    // budget meter follows the ladder convention instead
    CHECK(evaluator.resource_charged() == 48);
}

TEST_CASE("early stopping on monotone improvement runs to r_max") {
    const auto sched = build_schedule(16, 32, 2.0);
    (void)sched;
    Rng rng(13);
    // validation == training distribution and a tiny learning rate: loss
    // keeps improving over this short horizon
    const auto ds = test::random_dataset(rng, "improve", 60, 2);
    GbdtEvaluator evaluator(ds, test::xgb_space());
    const auto result = evaluator.evaluate_early_stopped(config_of(1.0, 1.0, 2, 0.05), 20, 20);
    CHECK(result.stopped_at == 20);
}

TEST_CASE("flipped validation labels stop after patience rounds") {
    GbdtEvaluator evaluator(overfit_dataset(), test::xgb_space());
    const auto result = evaluator.evaluate_early_stopped(config_of(1.0, 1.0, 2, 0.3), 200, 10);
    // round 1 is the best; rounds 2..11 fail to improve
    CHECK(result.stopped_at == 11);

    GbdtEvaluator fresh(overfit_dataset(), test::xgb_space());
    const auto one_round = fresh.evaluate(config_of(1.0, 1.0, 2, 0.3), 1);
    CHECK(result.best_loss == doctest::Approx(one_round));
}

TEST_CASE("patience equal to the horizon never stops early") {
    GbdtEvaluator evaluator(overfit_dataset(), test::xgb_space());
    const auto result = evaluator.evaluate_early_stopped(config_of(1.0, 1.0, 2, 0.3), 30, 30);
    CHECK(result.stopped_at == 30);
}

TEST_CASE("early-stopped runs charge only the trained rounds") {
    GbdtEvaluator evaluator(overfit_dataset(), test::xgb_space());
    const auto result = evaluator.evaluate_early_stopped(config_of(1.0, 1.0, 2, 0.3), 200, 5);
    CHECK(result.stopped_at == 6);
    CHECK(evaluator.resource_charged() == result.stopped_at);
    CHECK(evaluator.trees_trained() == result.stopped_at);
}

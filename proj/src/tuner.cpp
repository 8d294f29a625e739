#include "mesh/tuner.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <thread>

#include "mesh/errors.hpp"
#include "mesh/version.hpp"

namespace mesh {

namespace {

// Runs fn(i) for i in [0, count) on up to `workers` threads. Exceptions are
// captured per index and the lowest-index one is rethrown after the barrier,
// so failures are deterministic regardless of scheduling.
template <typename Fn>
void parallel_for(std::size_t count, int workers, Fn&& fn) {
    if (count == 0) return;
    const int usable = std::max(1, std::min<int>(workers, static_cast<int>(count)));
    if (usable == 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::vector<std::exception_ptr> errors(count);
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(usable));
    for (int w = 0; w < usable; ++w) {
        pool.emplace_back([&]() {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= count) return;
                try {
                    fn(i);
                } catch (...) {
                    errors[i] = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    for (const auto& err : errors) {
        if (err) std::rethrow_exception(err);
    }
}

// Rethrows an evaluator failure with the offending config id attached,
// preserving the exception type.
[[noreturn]] void rethrow_with_config(const ConfigId& id, std::exception_ptr err) {
    const std::string prefix = "config " + id.str() + ": ";
    try {
        std::rethrow_exception(err);
    } catch (const ConfigError& e) {
        throw ConfigError(prefix + e.what());
    } catch (const DataError& e) {
        throw DataError(prefix + e.what());
    } catch (const NumericalError& e) {
        throw NumericalError(prefix + e.what());
    } catch (const ContractViolation& e) {
        throw ContractViolation(prefix + e.what());
    } catch (const std::exception& e) {
        throw std::runtime_error(prefix + e.what());
    }
}

std::vector<std::size_t> select_top_k(const std::vector<double>& scores,
                                      const std::vector<ConfigId>& ids, std::size_t k) {
    if (scores.size() != ids.size()) {
        throw ContractViolation("top_k: " + std::to_string(scores.size()) + " scores vs " +
                                std::to_string(ids.size()) + " configs");
    }
    if (k < 1 || k > scores.size()) {
        throw ContractViolation("top_k: k=" + std::to_string(k) + " out of range for " +
                                std::to_string(scores.size()) + " configs");
    }
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (scores[a] != scores[b]) return scores[a] < scores[b];
        return ids[a] < ids[b];
    });
    order.resize(k);
    return order;
}

struct RunState {
    std::vector<Configuration> candidates;
    std::vector<TrialRecord> trials;              // parallel to candidates
    std::vector<std::vector<double>> round_loss;  // [round][candidate], NaN = not evaluated
};

TuneResult finalize(Evaluator& evaluator, RunState&& state, std::int64_t charged_before,
                    std::vector<std::vector<ConfigId>> trace, std::vector<RoundLogRecord> log,
                    int final_round) {
    TuneResult result;
    result.trials = std::move(state.trials);
    result.elimination_trace = std::move(trace);
    result.log = std::move(log);
    result.resource_spent = evaluator.resource_charged() - charged_before;

    // The reported result is the best top-resource loss; ties go to the
    // lower config id.
    result.best_loss = std::numeric_limits<double>::infinity();
    bool found = false;
    for (std::size_t c = 0; c < state.candidates.size(); ++c) {
        const auto it = result.trials[c].losses.find(final_round);
        if (it == result.trials[c].losses.end()) continue;
        if (!found || it->second < result.best_loss ||
            (it->second == result.best_loss &&
             state.candidates[c].id < result.best_config.id)) {
            result.best_loss = it->second;
            result.best_config = state.candidates[c];
            found = true;
        }
    }
    if (!found) {
        throw ContractViolation("no configuration reached the maximal resource");
    }
    return result;
}

std::vector<ConfigId> sorted_ids(const std::vector<Configuration>& configs,
                                 const std::vector<std::size_t>& selected) {
    std::vector<ConfigId> ids;
    ids.reserve(selected.size());
    for (auto i : selected) ids.push_back(configs[i].id);
    std::sort(ids.begin(), ids.end());
    return ids;
}

// Shared ladder for SH and the meta-driven variant: identical evaluation,
// bookkeeping, and elimination mechanics; only the ranking scores differ.
TuneResult run_ladder(Evaluator& evaluator, const HyperparamSpace& space, std::int64_t n,
                      const ResourceSchedule& sched, const MetaModelBundle* bundle,
                      const std::optional<DatasetMetaFeatures>& dataset_mf, std::uint64_t seed,
                      const TunerOptions& opts) {
    if (!space.same_layout(evaluator.space())) {
        throw ContractViolation("tuner space does not match the evaluator's space");
    }
    const auto sizes = cohort_sizes(n, sched);
    if (bundle != nullptr) {
        for (int i = 0; i <= sched.s_max; ++i) {
            if (!bundle->covers(i)) {
                throw ConfigError("bundle has no meta-model for round " + std::to_string(i));
            }
        }
    }

    const std::int64_t charged_before = evaluator.resource_charged();
    RunState state;
    state.candidates = evaluator.sample_candidates(n, seed);
    state.trials.resize(state.candidates.size());
    for (std::size_t c = 0; c < state.candidates.size(); ++c) {
        state.trials[c].dataset_id = evaluator.dataset_id();
        state.trials[c].config = state.candidates[c];
    }
    state.round_loss.assign(static_cast<std::size_t>(sched.num_rounds()),
                            std::vector<double>(state.candidates.size(),
                                                std::numeric_limits<double>::quiet_NaN()));

    std::vector<std::size_t> survivors(state.candidates.size());
    std::iota(survivors.begin(), survivors.end(), 0);

    std::vector<std::vector<ConfigId>> trace;
    std::vector<RoundLogRecord> log;

    for (int i = 0; i <= sched.s_max; ++i) {
        const std::int64_t r_i = sched.resources[static_cast<std::size_t>(i)];

        std::vector<double> observed(survivors.size());
        std::vector<std::exception_ptr> pending(survivors.size());
        parallel_for(survivors.size(), opts.workers, [&](std::size_t s) {
            try {
                observed[s] = evaluator.evaluate(state.candidates[survivors[s]], r_i);
            } catch (...) {
                pending[s] = std::current_exception();
            }
        });
        for (std::size_t s = 0; s < survivors.size(); ++s) {
            if (pending[s]) rethrow_with_config(state.candidates[survivors[s]].id, pending[s]);
        }

        for (std::size_t s = 0; s < survivors.size(); ++s) {
            state.round_loss[static_cast<std::size_t>(i)][survivors[s]] = observed[s];
            state.trials[survivors[s]].losses[i] = observed[s];
        }

        // Ranking scores: observed losses for SH, predicted final losses
        // for the meta-driven variant.
        std::vector<double> scores(survivors.size());
        std::vector<std::optional<double>> predicted(survivors.size());
        if (bundle == nullptr) {
            scores = observed;
        } else {
            const auto rounds_used = bundle->landmark_rounds(i);
            for (int j : rounds_used) {
                if (j < 0 || j > i) {
                    throw ContractViolation("bundle for round " + std::to_string(i) +
                                            " asks for landmark round " + std::to_string(j));
                }
            }
            const DatasetMetaFeatures* mf = dataset_mf.has_value() ? &*dataset_mf : nullptr;
            for (std::size_t s = 0; s < survivors.size(); ++s) {
                std::vector<double> landmarks;
                landmarks.reserve(rounds_used.size());
                for (int j : rounds_used) {
                    landmarks.push_back(
                        state.round_loss[static_cast<std::size_t>(j)][survivors[s]]);
                }
                try {
                    scores[s] = bundle->predict(i, mf, space, state.candidates[survivors[s]],
                                                landmarks);
                } catch (...) {
                    rethrow_with_config(state.candidates[survivors[s]].id,
                                        std::current_exception());
                }
                predicted[s] = scores[s];
            }
        }

        // Keep top floor(n_i / eta), never fewer than one; the returned
        // result is decided by the best top-resource loss regardless.
        const auto n_i = sizes[static_cast<std::size_t>(i)];
        const auto keep = static_cast<std::size_t>(std::clamp<std::int64_t>(
            static_cast<std::int64_t>(std::floor(static_cast<double>(n_i) / sched.eta + 1e-9)),
            1, static_cast<std::int64_t>(survivors.size())));

        std::vector<ConfigId> survivor_ids(survivors.size());
        for (std::size_t s = 0; s < survivors.size(); ++s) {
            survivor_ids[s] = state.candidates[survivors[s]].id;
        }
        const auto kept_local = select_top_k(scores, survivor_ids, keep);
        std::vector<bool> kept_mask(survivors.size(), false);
        for (auto s : kept_local) kept_mask[s] = true;

        for (std::size_t s = 0; s < survivors.size(); ++s) {
            RoundLogRecord rec;
            rec.round = i;
            rec.config_id = survivor_ids[s];
            rec.resource = r_i;
            rec.observed = observed[s];
            rec.predicted = predicted[s];
            rec.survived = kept_mask[s];
            log.push_back(rec);
        }

        std::vector<std::size_t> next;
        next.reserve(keep);
        for (std::size_t s = 0; s < survivors.size(); ++s) {
            if (kept_mask[s]) next.push_back(survivors[s]);
        }
        trace.push_back(sorted_ids(state.candidates, next));
        survivors = std::move(next);
    }

    return finalize(evaluator, std::move(state), charged_before, std::move(trace),
                    std::move(log), sched.s_max);
}

}  // namespace

std::vector<Configuration> top_k(const std::vector<Configuration>& configs,
                                 const std::vector<double>& scores, std::size_t k) {
    std::vector<ConfigId> ids(configs.size());
    for (std::size_t i = 0; i < configs.size(); ++i) ids[i] = configs[i].id;
    const auto selected = select_top_k(scores, ids, k);
    std::vector<Configuration> out;
    out.reserve(k);
    for (auto i : selected) out.push_back(configs[i]);
    return out;
}

TuneResult run_random_search(Evaluator& evaluator, const HyperparamSpace& space, std::int64_t k,
                             std::int64_t r_max, std::uint64_t seed, const TunerOptions& opts) {
    if (k < 1) throw ContractViolation("random search requires k >= 1");
    if (!space.same_layout(evaluator.space())) {
        throw ContractViolation("tuner space does not match the evaluator's space");
    }

    const std::int64_t charged_before = evaluator.resource_charged();
    RunState state;
    state.candidates = evaluator.sample_candidates(k, seed);
    state.trials.resize(state.candidates.size());

    std::vector<EarlyStopResult> results(state.candidates.size());
    std::vector<std::exception_ptr> pending(state.candidates.size());
    parallel_for(state.candidates.size(), opts.workers, [&](std::size_t c) {
        try {
            if (opts.rs_early_stopping) {
                results[c] =
                    evaluator.evaluate_early_stopped(state.candidates[c], r_max, opts.patience);
            } else {
                const double loss = evaluator.evaluate(state.candidates[c], r_max);
                results[c] = EarlyStopResult{loss, r_max};
            }
        } catch (...) {
            pending[c] = std::current_exception();
        }
    });
    for (std::size_t c = 0; c < state.candidates.size(); ++c) {
        if (pending[c]) rethrow_with_config(state.candidates[c].id, pending[c]);
    }

    std::vector<RoundLogRecord> log;
    for (std::size_t c = 0; c < state.candidates.size(); ++c) {
        state.trials[c].dataset_id = evaluator.dataset_id();
        state.trials[c].config = state.candidates[c];
        state.trials[c].losses[0] = results[c].best_loss;
        if (results[c].stopped_at < r_max) {
            state.trials[c].stopped_early_at = results[c].stopped_at;
        }
        RoundLogRecord rec;
        rec.round = 0;
        rec.config_id = state.candidates[c].id;
        rec.resource = r_max;
        rec.observed = results[c].best_loss;
        rec.survived = true;
        log.push_back(rec);
    }

    return finalize(evaluator, std::move(state), charged_before, {}, std::move(log), 0);
}

TuneResult run_successive_halving(Evaluator& evaluator, const HyperparamSpace& space,
                                  std::int64_t n, const ResourceSchedule& sched,
                                  std::uint64_t seed, const TunerOptions& opts) {
    return run_ladder(evaluator, space, n, sched, nullptr, std::nullopt, seed, opts);
}

TuneResult run_mesh(Evaluator& evaluator, const HyperparamSpace& space, std::int64_t n,
                    const ResourceSchedule& sched, const MetaModelBundle& bundle,
                    const std::optional<DatasetMetaFeatures>& dataset_mf, std::uint64_t seed,
                    const TunerOptions& opts) {
    return run_ladder(evaluator, space, n, sched, &bundle, dataset_mf, seed, opts);
}

void TuneResult::write_log(const std::string& path, const nlohmann::json& header) const {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write run log '" + path + "'");
    nlohmann::json h = header.is_null() ? nlohmann::json::object() : header;
    h["tool_version"] = kToolVersion;
    out << h.dump() << "\n";
    for (const auto& rec : log) {
        nlohmann::json line{{"round", rec.round},
                            {"config_id", rec.config_id.str()},
                            {"r", rec.resource},
                            {"loss", rec.observed},
                            {"survived", rec.survived}};
        if (rec.predicted.has_value()) line["predicted"] = *rec.predicted;
        out << line.dump() << "\n";
    }
}

}  // namespace mesh

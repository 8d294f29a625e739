#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace mesh {

enum class ParamKind { Continuous, Integer };
enum class ParamScale { Linear, Log };

struct ParamDef {
    std::string name;
    ParamKind kind = ParamKind::Continuous;
    double lower = 0.0;
    double upper = 1.0;
    ParamScale scale = ParamScale::Linear;

    void validate() const;  // throws ConfigError naming the offending field
};

// Identifies a sampled configuration as (sampling seed, sample index), which
// makes every trial reproducible and joinable across logs.
struct ConfigId {
    std::uint64_t seed = 0;
    std::uint64_t index = 0;

    auto operator<=>(const ConfigId&) const = default;

    std::string str() const;                    // "seed:index"
    static ConfigId parse(std::string_view s);  // throws DataError
};

struct Configuration {
    ConfigId id;
    std::vector<double> values;  // aligned with HyperparamSpace param order
};

class HyperparamSpace {
public:
    HyperparamSpace() = default;
    explicit HyperparamSpace(std::vector<ParamDef> params);  // validates

    const std::vector<ParamDef>& params() const { return params_; }
    std::size_t size() const { return params_.size(); }
    int index_of(std::string_view name) const;  // -1 when absent

    static HyperparamSpace from_json(const nlohmann::json& j);
    static HyperparamSpace load(const std::string& path);
    nlohmann::json to_json() const;

    // name -> value object for serialization, and its inverse.
    nlohmann::json values_json(const Configuration& config) const;
    Configuration config_from_values(ConfigId id, const nlohmann::json& values) const;

    // Bounds and integrality check; throws ContractViolation.
    void check(const Configuration& config) const;

    // Per-parameter regressor inputs: log-scaled parameters enter as ln(value).
    std::vector<double> config_metafeatures(const Configuration& config) const;

    bool same_layout(const HyperparamSpace& other) const;

private:
    std::vector<ParamDef> params_;
};

// n configurations drawn independently and uniformly on each parameter's
// scale (uniform in the log domain for log-scaled parameters, uniform over
// integers for integer parameters). Deterministic for a fixed seed, and
// prefix-stable: the first m of n samples equal a sample of m.
std::vector<Configuration> sample_configurations(const HyperparamSpace& space,
                                                 std::int64_t n, std::uint64_t seed);

}  // namespace mesh

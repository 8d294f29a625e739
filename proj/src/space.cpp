#include "mesh/space.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include "mesh/errors.hpp"
#include "mesh/rng.hpp"

namespace mesh {

namespace {

bool is_integer_valued(double v) { return std::floor(v) == v; }

std::string kind_str(ParamKind k) {
    return k == ParamKind::Continuous ? "continuous" : "integer";
}

std::string scale_str(ParamScale s) { return s == ParamScale::Linear ? "linear" : "log"; }

ParamKind kind_from_str(const std::string& s, const std::string& param) {
    if (s == "continuous") return ParamKind::Continuous;
    if (s == "integer") return ParamKind::Integer;
    throw ConfigError("param '" + param + "': unknown kind '" + s + "'");
}

ParamScale scale_from_str(const std::string& s, const std::string& param) {
    if (s == "linear") return ParamScale::Linear;
    if (s == "log") return ParamScale::Log;
    throw ConfigError("param '" + param + "': unknown scale '" + s + "'");
}

}  // namespace

void ParamDef::validate() const {
    if (name.empty()) throw ConfigError("param with empty name");
    // Point ranges (lower == upper) are allowed so a parameter can be pinned.
    if (!(lower <= upper)) {
        throw ConfigError("param '" + name + "': lower must be <= upper");
    }
    if (scale == ParamScale::Log && !(lower > 0.0)) {
        throw ConfigError("param '" + name + "': log scale requires lower > 0");
    }
    if (kind == ParamKind::Integer &&
        (!is_integer_valued(lower) || !is_integer_valued(upper))) {
        throw ConfigError("param '" + name + "': integer kind requires integer bounds");
    }
}

std::string ConfigId::str() const {
    return std::to_string(seed) + ":" + std::to_string(index);
}

ConfigId ConfigId::parse(std::string_view s) {
    const auto colon = s.find(':');
    if (colon == std::string_view::npos) {
        throw DataError("malformed config id '" + std::string(s) + "'");
    }
    try {
        ConfigId id;
        id.seed = std::stoull(std::string(s.substr(0, colon)));
        id.index = std::stoull(std::string(s.substr(colon + 1)));
        return id;
    } catch (const std::exception&) {
        throw DataError("malformed config id '" + std::string(s) + "'");
    }
}

HyperparamSpace::HyperparamSpace(std::vector<ParamDef> params) : params_(std::move(params)) {
    if (params_.empty()) throw ConfigError("search space has no parameters");
    std::set<std::string> names;
    for (const auto& p : params_) {
        p.validate();
        if (!names.insert(p.name).second) {
            throw ConfigError("duplicate param name '" + p.name + "'");
        }
    }
}

int HyperparamSpace::index_of(std::string_view name) const {
    for (std::size_t i = 0; i < params_.size(); ++i) {
        if (params_[i].name == name) return static_cast<int>(i);
    }
    return -1;
}

HyperparamSpace HyperparamSpace::from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("params") || !j["params"].is_array()) {
        throw ConfigError("search space JSON must be an object with a 'params' array");
    }
    std::vector<ParamDef> defs;
    for (const auto& pj : j["params"]) {
        ParamDef d;
        try {
            d.name = pj.at("name").get<std::string>();
            d.kind = kind_from_str(pj.at("kind").get<std::string>(), d.name);
            d.lower = pj.at("lower").get<double>();
            d.upper = pj.at("upper").get<double>();
            d.scale = scale_from_str(pj.at("scale").get<std::string>(), d.name);
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError(std::string("malformed param definition: ") + e.what());
        }
        defs.push_back(std::move(d));
    }
    return HyperparamSpace(std::move(defs));
}

HyperparamSpace HyperparamSpace::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open space file '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("invalid JSON in space file '" + path + "': " + e.what());
    }
    return from_json(j);
}

nlohmann::json HyperparamSpace::to_json() const {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& p : params_) {
        arr.push_back({{"name", p.name},
                       {"kind", kind_str(p.kind)},
                       {"lower", p.lower},
                       {"upper", p.upper},
                       {"scale", scale_str(p.scale)}});
    }
    return nlohmann::json{{"params", arr}};
}

nlohmann::json HyperparamSpace::values_json(const Configuration& config) const {
    check(config);
    nlohmann::json obj = nlohmann::json::object();
    for (std::size_t i = 0; i < params_.size(); ++i) {
        obj[params_[i].name] = config.values[i];
    }
    return obj;
}

Configuration HyperparamSpace::config_from_values(ConfigId id,
                                                  const nlohmann::json& values) const {
    Configuration config;
    config.id = id;
    config.values.reserve(params_.size());
    for (const auto& p : params_) {
        if (!values.contains(p.name)) {
            throw DataError("configuration " + id.str() + " is missing value for '" +
                            p.name + "'");
        }
        config.values.push_back(values[p.name].get<double>());
    }
    check(config);
    return config;
}

void HyperparamSpace::check(const Configuration& config) const {
    if (config.values.size() != params_.size()) {
        throw ContractViolation("configuration " + config.id.str() + " has " +
                                std::to_string(config.values.size()) + " values, space has " +
                                std::to_string(params_.size()) + " params");
    }
    for (std::size_t i = 0; i < params_.size(); ++i) {
        const auto& p = params_[i];
        const double v = config.values[i];
        if (!(v >= p.lower && v <= p.upper)) {
            throw ContractViolation("configuration " + config.id.str() + ": '" + p.name +
                                    "'=" + std::to_string(v) + " out of bounds");
        }
        if (p.kind == ParamKind::Integer && !is_integer_valued(v)) {
            throw ContractViolation("configuration " + config.id.str() + ": '" + p.name +
                                    "' must be integer-valued");
        }
    }
}

std::vector<double> HyperparamSpace::config_metafeatures(const Configuration& config) const {
    check(config);
    std::vector<double> out;
    out.reserve(params_.size());
    for (std::size_t i = 0; i < params_.size(); ++i) {
        const double v = config.values[i];
        out.push_back(params_[i].scale == ParamScale::Log ? std::log(v) : v);
    }
    return out;
}

bool HyperparamSpace::same_layout(const HyperparamSpace& other) const {
    if (params_.size() != other.params_.size()) return false;
    for (std::size_t i = 0; i < params_.size(); ++i) {
        const auto& a = params_[i];
        const auto& b = other.params_[i];
        if (a.name != b.name || a.kind != b.kind || a.scale != b.scale) return false;
    }
    return true;
}

std::vector<Configuration> sample_configurations(const HyperparamSpace& space,
                                                 std::int64_t n, std::uint64_t seed) {
    if (n < 1) throw ContractViolation("sample_configurations requires n >= 1");
    Rng rng(seed);
    std::vector<Configuration> configs;
    configs.reserve(static_cast<std::size_t>(n));
    for (std::int64_t i = 0; i < n; ++i) {
        Configuration config;
        config.id = ConfigId{seed, static_cast<std::uint64_t>(i)};
        config.values.reserve(space.size());
        for (const auto& p : space.params()) {
            double v = 0.0;
            if (p.kind == ParamKind::Integer && p.scale == ParamScale::Linear) {
                v = static_cast<double>(rng.uniform_int(static_cast<std::int64_t>(p.lower),
                                                        static_cast<std::int64_t>(p.upper)));
            } else {
                const bool log_scale = p.scale == ParamScale::Log;
                const double lo = log_scale ? std::log(p.lower) : p.lower;
                const double hi = log_scale ? std::log(p.upper) : p.upper;
                v = rng.uniform(lo, hi);
                if (log_scale) v = std::exp(v);
                if (p.kind == ParamKind::Integer) {
                    v = std::round(v);
                }
                v = std::min(std::max(v, p.lower), p.upper);
            }
            config.values.push_back(v);
        }
        configs.push_back(std::move(config));
    }
    return configs;
}

}  // namespace mesh

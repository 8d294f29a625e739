#pragma once

#include <stdexcept>
#include <string>

namespace mesh {

// Invalid experiment setup: bad schedule bounds, malformed search spaces,
// missing meta-models, unusable command configs. CLI exit code 2.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Problems with ingested data: malformed datasets or tables, incomplete
// loss curves, unknown configurations in replay mode. CLI exit code 3.
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

// A meta-model bundle whose training provenance overlaps the evaluation
// target. CLI exit code 4.
class LeakageError : public std::runtime_error {
public:
    explicit LeakageError(const std::string& what) : std::runtime_error(what) {}
};

// Broken caller contract: mismatched lengths, wrong feature widths,
// out-of-range k.
class ContractViolation : public std::logic_error {
public:
    explicit ContractViolation(const std::string& what) : std::logic_error(what) {}
};

// Non-finite values produced during training.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace mesh

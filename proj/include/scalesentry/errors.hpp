#pragma once

#include <stdexcept>
#include <string>

namespace scalesentry {

/// Invalid experiment or component configuration (bad condition id, out-of-range field).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A caller broke a precondition of an operation.
class ContractViolation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Training had nothing to learn from; the sentinel skips the round.
class ModelUnavailable : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace scalesentry

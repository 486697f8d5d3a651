#pragma once

#include <stdexcept>
#include <string>

namespace ltesim {

/// Out-of-domain argument passed to a model or builder.
class InvalidParameter : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Pilot/data split with zero pilot power.
class DegenerateSplit : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class OutOfRange : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

/// Stacked channel rows are rank deficient; the caller has to shrink the set.
class SingularSet : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// All-zero channel where a direction is required.
class DegenerateChannel : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class UndefinedFairness : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
public:
    IoError(const std::string& what, std::string path)
        : std::runtime_error(what + ": " + path), path_(std::move(path)) {}

    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

} // namespace ltesim

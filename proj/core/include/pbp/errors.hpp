#pragma once

#include <stdexcept>
#include <string>

namespace pbp {

/// Input that violates a documented precondition (bad action index, malformed row, ...).
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A Bayes update whose normalizer is zero.
class EmptyBeliefError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Unknown observation ID in a perception table.
class LookupError : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

/// A vision class with no examples in a dataset.
class CoverageError : public std::runtime_error {
public:
    CoverageError(std::size_t vision_class, const std::string& what)
        : std::runtime_error(what), vision_class_(vision_class) {}
    std::size_t vision_class() const noexcept { return vision_class_; }

private:
    std::size_t vision_class_;
};

/// Experiment configuration that fails validation; carries the offending field.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string field, const std::string& what)
        : std::runtime_error(field + ": " + what), field_(std::move(field)) {}
    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

/// Calling an operation in a state where it is not defined (e.g. stepping a terminal state).
class ContractError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

}  // namespace pbp

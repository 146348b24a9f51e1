#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace fsse {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Zero-based sensor index. External documents use 1-based labels (S1..Sp).
using SensorIndex = std::size_t;

/// Sorted, duplicate-free list of sensor indices.
using SensorSet = std::vector<SensorIndex>;

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
public:
    using Error::Error;
};

class ObservabilityError : public Error {
public:
    using Error::Error;
};

/// No candidate in the search space passed the residual test.
class ExhaustionError : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    ParseError(std::string field, const std::string& what)
        : Error(field + ": " + what), field_(std::move(field)) {}

    const std::string& field() const { return field_; }

private:
    std::string field_;
};

} // namespace fsse

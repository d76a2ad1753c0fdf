#pragma once

#include <stdexcept>

namespace riskdiff {

// Argument outside the mathematical domain of an operation (counts out of
// range, probabilities outside [0,1], |delta| >= 1, alpha outside (0,1)...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// The exact-corrected anchor is undefined because the exact p-value sits at
// 0 or 1, where the normal quantile diverges.
class DegenerateCalibration : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A caller combined otherwise valid arguments in an unsupported way (e.g.
// requesting the EC interval without a margin).
class UsageError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

}  // namespace riskdiff

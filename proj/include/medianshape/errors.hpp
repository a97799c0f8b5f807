#pragma once

#include <stdexcept>
#include <string>

namespace medianshape {

/// Malformed or out-of-contract input (bad dimension, eps out of range, unsorted data, ...).
class InputError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Member or rank index outside the valid range.
class IndexError : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

/// A value violates a bound that the caller promised to respect.
class ValidationError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

} // namespace medianshape

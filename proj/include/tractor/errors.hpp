#pragma once
#include <stdexcept>
#include <string>

namespace tractor {

// Bad input: wrong shapes, violated preconditions, unknown names.
class ValidationError : public std::invalid_argument {
public:
    explicit ValidationError(const std::string& what) : std::invalid_argument(what) {}
};

// Runtime numerical failure: singular metric, transport divergence, log out of range.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace tractor

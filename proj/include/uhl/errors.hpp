#pragma once

#include <stdexcept>
#include <string>

namespace uhl {

// Bad user-facing input: parameters, path files, CLI flags. CLI maps this to exit 2.
struct InvalidInput : std::invalid_argument {
    explicit InvalidInput(const std::string& what) : std::invalid_argument(what) {}
};

// Step-doubling did not stabilize within the doubling cap. CLI maps this to exit 3.
struct IntegratorFailure : std::runtime_error {
    explicit IntegratorFailure(const std::string& what) : std::runtime_error(what) {}
};

// An internal self-check failed (e.g. a generator leaked outside the state's
// support, or a cross-check between pipelines broke). CLI maps this to exit 3.
struct NumericalInconsistency : std::runtime_error {
    explicit NumericalInconsistency(const std::string& what) : std::runtime_error(what) {}
};

} // namespace uhl

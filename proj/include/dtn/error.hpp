#pragma once

#include <stdexcept>
#include <string>

namespace dtn {

// Shape/precondition violations on tensor operations.
struct shape_error : std::invalid_argument {
    explicit shape_error(const std::string& msg) : std::invalid_argument(msg) {}
};

// Invalid argument values other than shapes (bad permutation, bad site, ...).
struct value_error : std::invalid_argument {
    explicit value_error(const std::string& msg) : std::invalid_argument(msg) {}
};

// Numerical failures: decomposition did not converge, zero-norm state, ...
struct numeric_error : std::runtime_error {
    explicit numeric_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Memory guard exceeded (dense exact-diagonalization bridge).
struct resource_error : std::runtime_error {
    explicit resource_error(const std::string& msg) : std::runtime_error(msg) {}
};

// File I/O and on-disk format problems.
struct io_error : std::runtime_error {
    explicit io_error(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace dtn

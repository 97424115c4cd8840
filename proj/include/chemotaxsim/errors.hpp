#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace chemotaxsim {

// Invalid argument supplied by the caller (bad exponent, negative spacing, ...).
class parameter_error : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// A field contains NaN/Inf or an otherwise impossible value.
class data_integrity_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A field that must stay positive (v) or nonnegative (u, w) violated its bound.
class positivity_error : public std::runtime_error {
public:
    positivity_error(const std::string& what, std::size_t cell)
        : std::runtime_error(what), cell_index(cell) {}
    std::size_t cell_index;
};

// Iterative linear solve failed to reach tolerance.
class solver_error : public std::runtime_error {
public:
    solver_error(const std::string& what, int iters)
        : std::runtime_error(what), iterations(iters) {}
    int iterations;
};

// Requested time step exceeds the stability bound.
class step_size_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// An operation's precondition on its input data was violated (e.g. nonzero
// boundary flux handed to the divergence).
class contract_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// File I/O failure, carries the offending path.
class io_error : public std::runtime_error {
public:
    io_error(const std::string& what, std::string p)
        : std::runtime_error(what + ": " + p), path(std::move(p)) {}
    std::string path;
};

// Configuration file rejected; message lists every violation found.
class config_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace chemotaxsim

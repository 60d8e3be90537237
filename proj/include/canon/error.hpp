#pragma once

#include <stdexcept>
#include <string>

namespace canon {

enum class ErrorKind {
    parse,
    validation,
    invalid_spec,
    cap_exceeded,
    invalid_hamiltonian,
    invalid_jacobi,
    ill_conditioned_moments,
    domain,
    precondition,
    invalid_target_order,
    weight_overflow,
    insufficient_data,
    numeric,
    inapplicable,
    io,
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message);
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

const char* kind_name(ErrorKind kind) noexcept;

// Process exit code used by the CLI for an error of this kind.
int exit_code(ErrorKind kind) noexcept;

[[noreturn]] void fail(ErrorKind kind, const std::string& message);

}  // namespace canon

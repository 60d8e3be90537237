#include "canon/error.hpp"

namespace canon {

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(kind_name(kind)) + ": " + message), kind_(kind) {}

const char* kind_name(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::parse: return "parse-error";
        case ErrorKind::validation: return "validation-error";
        case ErrorKind::invalid_spec: return "invalid-spec";
        case ErrorKind::cap_exceeded: return "cap-exceeded";
        case ErrorKind::invalid_hamiltonian: return "invalid-hamiltonian";
        case ErrorKind::invalid_jacobi: return "invalid-jacobi";
        case ErrorKind::ill_conditioned_moments: return "ill-conditioned-moments";
        case ErrorKind::domain: return "domain-error";
        case ErrorKind::precondition: return "precondition-error";
        case ErrorKind::invalid_target_order: return "invalid-target-order";
        case ErrorKind::weight_overflow: return "weight-overflow";
        case ErrorKind::insufficient_data: return "insufficient-data";
        case ErrorKind::numeric: return "numeric-failure";
        case ErrorKind::inapplicable: return "inapplicable";
        case ErrorKind::io: return "io-error";
    }
    return "error";
}

int exit_code(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::parse:
            return 2;
        case ErrorKind::validation:
        case ErrorKind::invalid_spec:
        case ErrorKind::cap_exceeded:
        case ErrorKind::invalid_hamiltonian:
        case ErrorKind::invalid_jacobi:
        case ErrorKind::domain:
        case ErrorKind::precondition:
        case ErrorKind::invalid_target_order:
            return 3;
        case ErrorKind::ill_conditioned_moments:
        case ErrorKind::weight_overflow:
        case ErrorKind::insufficient_data:
        case ErrorKind::numeric:
        case ErrorKind::io:
            return 4;
        case ErrorKind::inapplicable:
            return 5;
    }
    return 1;
}

void fail(ErrorKind kind, const std::string& message) { throw Error(kind, message); }

}  // namespace canon

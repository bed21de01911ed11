#pragma once

#include <stdexcept>
#include <string>

namespace wqf {

enum class ErrorCode {
    spec_error,
    singular,
    conjugate_point,
    negative_determinant,
    non_finite,
    grid_mismatch,
    no_convergence,
    precondition_violated,
    not_positive_definite,
    parameter_out_of_range,
    admissibility_fail,
    z_threshold,
};

// Single exception type for the whole library; the code drives CLI exit codes.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
    ErrorCode code() const { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

} // namespace wqf

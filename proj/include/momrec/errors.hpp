#pragma once

#include <stdexcept>
#include <string>

namespace momrec {

/// Error categories surfaced by the solvers. The CLI maps these onto
/// process exit codes (see tools/).
enum class errc {
    zero_polynomial,
    singular_hankel,
    ill_conditioned,
    zero_at_origin,
    vanishing_fhat,
    length_mismatch,
    off_circle_node,
    node_at_zero,
    insufficient_moments,
    empty_nullspace,
    jump_count_mismatch,
    singular_leading_coefficient,
    quadrature_failure,
    rank_deficient_basis,
    unsupported_piece,
    schema_error,
    io_error,
};

const char* errc_name(errc c);

class Error : public std::runtime_error {
public:
    Error(errc code, const std::string& what)
        : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

    errc code() const noexcept { return code_; }

private:
    errc code_;
};

[[noreturn]] inline void fail(errc code, const std::string& what) {
    throw Error(code, what);
}

} // namespace momrec

#include "momrec/errors.hpp"

namespace momrec {

const char* errc_name(errc c) {
    switch (c) {
    case errc::zero_polynomial: return "ZeroPolynomial";
    case errc::singular_hankel: return "SingularHankel";
    case errc::ill_conditioned: return "IllConditioned";
    case errc::zero_at_origin: return "ZeroAtOrigin";
    case errc::vanishing_fhat: return "VanishingFhat";
    case errc::length_mismatch: return "LengthMismatch";
    case errc::off_circle_node: return "OffCircleNode";
    case errc::node_at_zero: return "NodeAtZero";
    case errc::insufficient_moments: return "InsufficientMoments";
    case errc::empty_nullspace: return "EmptyNullspace";
    case errc::jump_count_mismatch: return "JumpCountMismatch";
    case errc::singular_leading_coefficient: return "SingularLeadingCoefficient";
    case errc::quadrature_failure: return "QuadratureFailure";
    case errc::rank_deficient_basis: return "RankDeficientBasis";
    case errc::unsupported_piece: return "UnsupportedPiece";
    case errc::schema_error: return "SchemaError";
    case errc::io_error: return "IoError";
    }
    return "UnknownError";
}

} // namespace momrec

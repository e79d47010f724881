#pragma once

// Private: extended-precision scalar types shared by the Remez iteration and
// the pole/residue extraction.

#include <boost/multiprecision/eigen.hpp>
#include <boost/multiprecision/mpfr.hpp>

#include <Eigen/Dense>

#include <vector>

#include "bura/rational.hpp"

namespace bura::detail {

/// Fixed-precision MPFR number with at least `Bits` significand bits.
/// Fixed precision keeps concurrent jobs independent of the process-wide
/// MPFR default precision.
template <int Bits>
using MpReal = boost::multiprecision::number<
    boost::multiprecision::mpfr_float_backend<(Bits * 30103 + 99999) / 100000>,
    boost::multiprecision::et_off>;

/// Storage type: the top precision tier, so every tier converts into it exactly.
using BigFloat = MpReal<512>;

template <class Real>
using MpMatrix = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic>;
template <class Real>
using MpVector = Eigen::Matrix<Real, Eigen::Dynamic, 1>;

struct ExtendedCoefficients {
    std::vector<BigFloat> numerator;    // ascending powers
    std::vector<BigFloat> denominator;  // ascending powers
};

struct RemezOutcome {
    std::vector<BigFloat> numerator;
    std::vector<BigFloat> denominator;
    double minimax_error = 0.0;
    double levelled_error = 0.0;
    double spread = 0.0;
    int iterations = 0;
    int precision_bits = 0;
    std::vector<double> alternation_points;
};

/// Runs the exchange iteration at the requested tier; `initial_reference`
/// may be empty (heuristic start) or hold m + k + 2 increasing points.
RemezOutcome run_remez(const BuraParams& params, const RemezOptions& opts,
                       const std::vector<double>& initial_reference);

struct RationalApproxAccess {
    static RationalApprox make(const BuraParams& params, RemezOutcome outcome, bool continuation);
    static RationalApprox make_plain(const BuraParams& params, std::vector<double> numerator,
                                     std::vector<double> denominator, double minimax_error);
};

template <class Real>
Real horner(const std::vector<Real>& coeffs, const Real& t) {
    Real acc = 0;
    for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = acc * t + *it;
    return acc;
}

}  // namespace bura::detail

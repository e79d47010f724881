#pragma once

// Best uniform rational approximation (BURA) of t^(beta - alpha) on [0, 1],
// its partial fraction form, and the certificates built on top of it.

#include <memory>
#include <string>
#include <vector>

namespace bura {

struct BuraParams {
    double alpha = 0.5;  // fractional power, 0 < alpha < 1
    int beta = 1;        // integer shift, approximated function is t^(beta - alpha)
    int m = 0;           // numerator degree
    int k = 0;           // denominator degree

    /// Throws Error(InvalidArgument) unless 0 < alpha < 1, beta >= 1, m, k >= 0.
    void validate() const;

    double exponent() const { return beta - alpha; }
    int reference_size() const { return m + k + 2; }
};

/// Working precision tiers available to the Remez iteration, in requested
/// significand bits. A request is rounded up to the next tier.
inline constexpr int kPrecisionTiers[] = {64, 128, 256, 512};

/// Default precision: 256 bits unless BURA_PRECISION_BITS is set.
int default_precision_bits();

struct RemezOptions {
    int precision_bits = default_precision_bits();
    int max_iterations = 60;
    /// Converged when (max |dev| - min |dev|) / max |dev| drops below this.
    double equioscillation_tol = 1e-12;
    /// Fall back to continuation from R(m-1, k-1) when the direct start fails.
    bool allow_continuation = true;
    /// Retry at the next precision tier when the working precision runs out.
    bool escalate_precision = true;
};

namespace detail {
struct ExtendedCoefficients;
struct RationalApproxAccess;
}

/// A rational function p/q in R(m, k) with its certified minimax error.
///
/// Coefficients are kept in the power basis about t = 0. For the diagonal
/// BURA all zeros and poles are negative, so both coefficient vectors are
/// sign-coherent and Horner evaluation on t >= 0 is free of cancellation.
/// Extended-precision coefficients travel with the value (shared, immutable)
/// so pole extraction happens at the precision the approximation was built in.
class RationalApprox {
public:
    RationalApprox() = default;

    const BuraParams& params() const { return params_; }
    /// Ascending power-basis coefficients rounded to double.
    const std::vector<double>& numerator() const { return numerator_; }
    const std::vector<double>& denominator() const { return denominator_; }

    /// Largest |t^(beta-alpha) - r(t)| over the located extrema.
    double minimax_error() const { return minimax_error_; }
    /// Levelled deviation of the final reference solve.
    double levelled_error() const { return levelled_error_; }
    /// Relative spread of the deviations on the final alternation set.
    double deviation_spread() const { return deviation_spread_; }
    int precision_bits() const { return precision_bits_; }
    int iterations() const { return iterations_; }
    /// Alternation points of the final reference, increasing.
    const std::vector<double>& alternation_points() const { return alternation_points_; }
    bool used_continuation() const { return used_continuation_; }

    /// True when both coefficient vectors have a single sign, i.e. the
    /// double Horner path is stable on t >= 0.
    bool sign_coherent() const;

    const detail::ExtendedCoefficients& extended() const { return *extended_; }

    /// Builds an approximation from given coefficients (tests, diagnostics).
    /// minimax_error is taken as supplied, not certified.
    static RationalApprox from_coefficients(const BuraParams& params,
                                            std::vector<double> numerator,
                                            std::vector<double> denominator,
                                            double minimax_error);

private:
    friend struct detail::RationalApproxAccess;

    BuraParams params_;
    std::vector<double> numerator_;
    std::vector<double> denominator_;
    double minimax_error_ = 0.0;
    double levelled_error_ = 0.0;
    double deviation_spread_ = 0.0;
    int precision_bits_ = 0;
    int iterations_ = 0;
    std::vector<double> alternation_points_;
    bool used_continuation_ = false;
    std::shared_ptr<const detail::ExtendedCoefficients> extended_;
};

/// Partial fraction form of t^(-beta) r(t):
///   sum_j poly[j] t^j + sum_{j=1..beta} c0[j-1] / t^j + sum_j residues[j] / (t - poles[j]).
struct PartialFractionForm {
    int beta = 1;
    std::vector<double> poly_part;     // b_0 .. b_{m-k-beta}, empty when m < k + beta
    std::vector<double> inverse_part;  // c_{0,1} .. c_{0,beta}
    std::vector<double> residues;      // c_j = c*_j / d_j^beta
    std::vector<double> poles;         // d_j, sorted decreasing (closest to 0 first)

    // Diagnostics from the extraction.
    std::vector<double> pole_residues;  // c*_j, residues of r itself
    std::vector<double> zeros;          // real zeros of the numerator, decreasing
    bool zeros_all_real = true;
    double rounding_error = 0.0;  // max relative change from rounding to double

    /// Evaluates the sum at t (t = 0 or t = pole gives an infinite result).
    double evaluate(double t) const;
    int terms() const {
        return static_cast<int>(poly_part.size() + inverse_part.size() + residues.size());
    }
};

struct ExtremaReport {
    std::vector<double> points;      // increasing in [0, 1]
    std::vector<double> deviations;  // signed t^(beta-alpha) - r(t)
    double max_deviation = 0.0;
    double min_deviation = 0.0;
    double spread = 0.0;  // (max - min) / max of |deviation|
    bool alternating = false;
    bool alternation_ok = false;  // alternating and spread within tolerance
};

struct PositivityCertificate {
    bool d_negative = false;
    bool residues_positive = false;
    bool c0_positive = false;
    bool degree_ok = false;
    bool certified = false;
};

/// Computes the BURA of t^(beta - alpha) on [0, 1] in R(m, k) by Remez exchange.
/// Throws Error(NonConvergence) or Error(PrecisionExhausted).
RationalApprox bura_compute(const BuraParams& params, const RemezOptions& opts = {});

/// Value of r(t). Stable double path when the coefficients are sign-coherent
/// and t >= 0, extended precision otherwise. Throws Error(PoleHit).
double evaluate_rational(const RationalApprox& r, double t);

/// Error function t^(beta-alpha) - r(t), with t^(beta-alpha) = 0 at t = 0.
double approximation_error(const RationalApprox& r, double t);

/// Poles and residues of t^(-beta) r(t), computed in extended precision.
/// Throws Error(ComplexPoles), Error(RepeatedPoles) or Error(PoleHit).
PartialFractionForm partial_fractions(const RationalApprox& r);

/// Independent double-precision scan for the extrema of the error function.
/// Throws Error(WrongExtremaCount) when the count differs from m + k + 2.
ExtremaReport verify_equioscillation(const RationalApprox& r, double spread_tol = 1e-6);

PositivityCertificate check_positivity_conditions(const PartialFractionForm& pf,
                                                  const BuraParams& params);

/// True when 0 > z_1 > d_1 > z_2 > d_2 > ... > z_k > d_k (requires m == k).
bool zeros_poles_interlace(const PartialFractionForm& pf);

/// 4^(2-alpha) |sin(pi (1-alpha))| exp(-2 pi sqrt((1-alpha) k)).
double stahl_bound(double alpha, int k);

/// The unit of exchange between the approximation stage and the solver:
/// parameters, certified error and the partial fraction coefficients.
struct CoefficientSet {
    BuraParams params;
    double minimax_error = 0.0;
    int precision_bits = 0;
    PartialFractionForm pf;
};

CoefficientSet make_coefficient_set(const RationalApprox& r, const PartialFractionForm& pf);

/// JSON document {alpha, beta, m, k, E, poles, residues, c0, poly, precision_bits}.
/// Doubles survive a dump/parse round trip bit-exactly.
std::string coefficients_to_json(const CoefficientSet& set, int indent = 2);
CoefficientSet coefficients_from_json(const std::string& text);

}  // namespace bura

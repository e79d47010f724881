#include "bura/rational.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>

#include <boost/math/tools/minima.hpp>

#include "bura/error.hpp"
#include "extended_precision.hpp"

namespace bura {

std::string_view to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::InvalidArgument: return "InvalidArgument";
        case ErrorKind::NonConvergence: return "NonConvergence";
        case ErrorKind::PrecisionExhausted: return "PrecisionExhausted";
        case ErrorKind::PoleHit: return "PoleHit";
        case ErrorKind::ComplexPoles: return "ComplexPoles";
        case ErrorKind::RepeatedPoles: return "RepeatedPoles";
        case ErrorKind::WrongExtremaCount: return "WrongExtremaCount";
        case ErrorKind::NotSymmetric: return "NotSymmetric";
        case ErrorKind::Singular: return "Singular";
        case ErrorKind::NotPositiveDefinite: return "NotPositiveDefinite";
        case ErrorKind::DimensionTooLarge: return "DimensionTooLarge";
        case ErrorKind::ShiftNotSpd: return "ShiftNotSpd";
        case ErrorKind::CgDivergence: return "CgDivergence";
        case ErrorKind::Io: return "Io";
    }
    return "Unknown";
}

void BuraParams::validate() const {
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw Error(ErrorKind::InvalidArgument, "alpha must lie in (0, 1)");
    }
    if (beta < 1) throw Error(ErrorKind::InvalidArgument, "beta must be a positive integer");
    if (m < 0 || k < 0) throw Error(ErrorKind::InvalidArgument, "degrees must be nonnegative");
}

int default_precision_bits() {
    if (const char* env = std::getenv("BURA_PRECISION_BITS")) {
        char* end = nullptr;
        const long bits = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && bits > 0) return static_cast<int>(bits);
    }
    return 256;
}

namespace detail {

RationalApprox RationalApproxAccess::make(const BuraParams& params, RemezOutcome outcome,
                                          bool continuation) {
    RationalApprox r;
    r.params_ = params;
    for (const auto& c : outcome.numerator) r.numerator_.push_back(static_cast<double>(c));
    for (const auto& c : outcome.denominator) r.denominator_.push_back(static_cast<double>(c));
    r.minimax_error_ = outcome.minimax_error;
    r.levelled_error_ = outcome.levelled_error;
    r.deviation_spread_ = outcome.spread;
    r.precision_bits_ = outcome.precision_bits;
    r.iterations_ = outcome.iterations;
    r.alternation_points_ = std::move(outcome.alternation_points);
    r.used_continuation_ = continuation;
    r.extended_ = std::make_shared<const ExtendedCoefficients>(
        ExtendedCoefficients{std::move(outcome.numerator), std::move(outcome.denominator)});
    return r;
}

RationalApprox RationalApproxAccess::make_plain(const BuraParams& params,
                                                std::vector<double> numerator,
                                                std::vector<double> denominator,
                                                double minimax_error) {
    if (numerator.empty() || denominator.empty()) {
        throw Error(ErrorKind::InvalidArgument, "empty coefficient vector");
    }
    RationalApprox r;
    r.params_ = params;
    r.params_.m = static_cast<int>(numerator.size()) - 1;
    r.params_.k = static_cast<int>(denominator.size()) - 1;
    ExtendedCoefficients ext;
    for (double c : numerator) ext.numerator.emplace_back(c);
    for (double c : denominator) ext.denominator.emplace_back(c);
    r.numerator_ = std::move(numerator);
    r.denominator_ = std::move(denominator);
    r.minimax_error_ = minimax_error;
    r.levelled_error_ = minimax_error;
    r.precision_bits_ = 53;
    r.extended_ = std::make_shared<const ExtendedCoefficients>(std::move(ext));
    return r;
}

}  // namespace detail

RationalApprox RationalApprox::from_coefficients(const BuraParams& params,
                                                 std::vector<double> numerator,
                                                 std::vector<double> denominator,
                                                 double minimax_error) {
    return detail::RationalApproxAccess::make_plain(params, std::move(numerator),
                                                    std::move(denominator), minimax_error);
}

namespace {

bool single_sign(const std::vector<double>& c) {
    const bool nonneg = std::all_of(c.begin(), c.end(), [](double x) { return x >= 0.0; });
    const bool nonpos = std::all_of(c.begin(), c.end(), [](double x) { return x <= 0.0; });
    return nonneg || nonpos;
}

double horner(const std::vector<double>& c, double t) {
    double acc = 0.0;
    for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * t + *it;
    return acc;
}

double abs_horner(const std::vector<double>& c, double t) {
    double acc = 0.0;
    const double at = std::abs(t);
    for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * at + std::abs(*it);
    return acc;
}

// Reference for continuation: the alternation set of R(m-1, k-1), resampled
// in u = sqrt(-ln t) to two more points and stretched by the k^(1/4) growth
// of the smallest extremum's depth.
std::vector<double> continuation_reference(const std::vector<double>& previous, int n_new,
                                           double kappa_old, double kappa_new) {
    std::vector<double> u;
    for (double t : previous) {
        if (t > 0.0) u.push_back(std::sqrt(-std::log(std::min(t, 1.0))));
    }
    std::sort(u.begin(), u.end(), std::greater<>());
    const double stretch = std::pow(kappa_new / std::max(kappa_old, 0.5), 0.25);
    const int count = n_new - 1;
    std::vector<double> ref{0.0};
    for (int j = 0; j < count; ++j) {
        const double pos = count == 1 ? 0.0
                                      : static_cast<double>(j) * (u.size() - 1) / (count - 1);
        const auto lo = static_cast<std::size_t>(std::floor(pos));
        const auto hi = std::min(lo + 1, u.size() - 1);
        const double w = pos - lo;
        const double uj = stretch * ((1.0 - w) * u[lo] + w * u[hi]);
        ref.push_back(std::exp(-uj * uj));
    }
    ref.back() = 1.0;
    return ref;
}

}  // namespace

bool RationalApprox::sign_coherent() const {
    return single_sign(numerator_) && single_sign(denominator_);
}

namespace {

RationalApprox compute_at(const BuraParams& params, const RemezOptions& opts) {
    try {
        return detail::RationalApproxAccess::make(params, detail::run_remez(params, opts, {}), false);
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::NonConvergence || !opts.allow_continuation || params.m == 0 ||
            params.k == 0) {
            throw;
        }
    }
    BuraParams lower = params;
    --lower.m;
    --lower.k;
    const RationalApprox previous = compute_at(lower, opts);
    const auto ref = continuation_reference(previous.alternation_points(), params.reference_size(),
                                            0.5 * (lower.m + lower.k), 0.5 * (params.m + params.k));
    return detail::RationalApproxAccess::make(params, detail::run_remez(params, opts, ref), true);
}

int next_tier(int bits) {
    for (int tier : kPrecisionTiers)
        if (tier > bits) return tier;
    return 0;
}

}  // namespace

RationalApprox bura_compute(const BuraParams& params, const RemezOptions& opts) {
    params.validate();
    if (opts.precision_bits < 1 || opts.precision_bits > 512) {
        throw Error(ErrorKind::InvalidArgument, "precision_bits must lie in [1, 512]");
    }
    if (opts.max_iterations < 1 || !(opts.equioscillation_tol > 0.0)) {
        throw Error(ErrorKind::InvalidArgument, "invalid Remez options");
    }
    RemezOptions current = opts;
    for (;;) {
        try {
            return compute_at(params, current);
        } catch (const Error& e) {
            const int next = next_tier(current.precision_bits);
            if (e.kind() != ErrorKind::PrecisionExhausted || !opts.escalate_precision || next == 0) throw;
            current.precision_bits = next;
        }
    }
}

double evaluate_rational(const RationalApprox& r, double t) {
    const auto& num = r.numerator();
    const auto& den = r.denominator();
    if (t >= 0.0 && r.sign_coherent()) {
        const double q = horner(den, t);
        if (std::abs(q) <= 8.0 * std::numeric_limits<double>::epsilon() * abs_horner(den, t)) {
            throw Error(ErrorKind::PoleHit, "evaluation point coincides with a pole");
        }
        return horner(num, t) / q;
    }
    using detail::BigFloat;
    const BigFloat bt(t);
    const BigFloat q = detail::horner(r.extended().denominator, bt);
    if (abs(q) <= BigFloat(8.0 * std::numeric_limits<double>::epsilon() * abs_horner(den, t))) {
        throw Error(ErrorKind::PoleHit, "evaluation point coincides with a pole");
    }
    return static_cast<double>(detail::horner(r.extended().numerator, bt) / q);
}

double approximation_error(const RationalApprox& r, double t) {
    const double f = t > 0.0 ? std::pow(t, r.params().exponent()) : 0.0;
    return f - evaluate_rational(r, t);
}

double PartialFractionForm::evaluate(double t) const {
    double acc = 0.0;
    double pw = 1.0;
    for (double b : poly_part) {
        acc += b * pw;
        pw *= t;
    }
    double inv = 1.0;
    for (double c : inverse_part) {
        inv /= t;
        acc += c * inv;
    }
    for (std::size_t j = 0; j < residues.size(); ++j) acc += residues[j] / (t - poles[j]);
    return acc;
}

ExtremaReport verify_equioscillation(const RationalApprox& r, double spread_tol) {
    const int expected = r.params().reference_size();
    auto e = [&r](double t) { return approximation_error(r, t); };

    // Logarithmic scan for the extrema clustered near 0 plus a uniform one for
    // the rest of the interval.
    std::vector<double> grid{0.0};
    constexpr int kDecades = 40;
    constexpr int kPerDecade = 40;
    for (int i = 0; i <= kDecades * kPerDecade; ++i) {
        grid.push_back(std::pow(10.0, -kDecades + static_cast<double>(i) / kPerDecade));
    }
    constexpr int kUniform = 4000;
    for (int i = 1; i < kUniform; ++i) grid.push_back(static_cast<double>(i) / kUniform);
    grid.push_back(1.0);
    std::sort(grid.begin(), grid.end());
    // The two scans overlap; points closer than a relative 1e-9 would give
    // degenerate refinement brackets.
    grid.erase(std::unique(grid.begin(), grid.end(),
                           [](double a, double b) { return b - a <= 1e-9 * b; }),
               grid.end());

    std::vector<double> val(grid.size());
    double scale = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        val[i] = e(grid[i]);
        scale = std::max(scale, std::abs(val[i]));
    }

    struct Point {
        double t;
        double e;
        bool endpoint;
    };
    std::vector<Point> raw{{0.0, val.front(), true}};
    for (std::size_t i = 1; i + 1 < grid.size(); ++i) {
        const bool is_max = val[i] > val[i - 1] && val[i] >= val[i + 1];
        const bool is_min = val[i] < val[i - 1] && val[i] <= val[i + 1];
        if (!is_max && !is_min) continue;
        const double sign = is_max ? 1.0 : -1.0;
        const double lo = grid[i - 1];
        const double hi = grid[i + 1];
        boost::uintmax_t iters = 200;
        Point pt{grid[i], val[i], false};
        if (lo > 0.0) {
            auto obj = [&](double s) { return -sign * e(std::exp(s)); };
            auto [s, v] = boost::math::tools::brent_find_minima(obj, std::log(lo), std::log(hi), 40, iters);
            if (-v > val[i] * sign) pt = {std::exp(s), -v * sign, false};
        } else {
            auto obj = [&](double t) { return -sign * e(t); };
            auto [t, v] = boost::math::tools::brent_find_minima(obj, lo, hi, 40, iters);
            if (-v > val[i] * sign) pt = {t, -v * sign, false};
        }
        raw.push_back(pt);
    }
    raw.push_back({1.0, val.back(), true});

    // Rounding noise on a flat top shows up as a max/min pair with a
    // negligible height difference; drop such pairs.
    const double noise = 1e-9 * scale;
    bool changed = true;
    while (changed) {
        changed = false;
        for (std::size_t i = 0; i + 1 < raw.size(); ++i) {
            if (std::abs(raw[i].e - raw[i + 1].e) > noise) continue;
            if (raw[i].endpoint && raw[i + 1].endpoint) continue;
            const std::size_t drop = raw[i].endpoint ? i + 1 : raw[i + 1].endpoint ? i : i + 1;
            raw.erase(raw.begin() + static_cast<std::ptrdiff_t>(drop));
            changed = true;
            break;
        }
    }

    if (static_cast<int>(raw.size()) != expected) {
        std::ostringstream msg;
        msg << "found " << raw.size() << " extrema, expected " << expected;
        throw Error(ErrorKind::WrongExtremaCount, msg.str());
    }

    ExtremaReport rep;
    rep.alternating = true;
    rep.min_deviation = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < raw.size(); ++i) {
        rep.points.push_back(raw[i].t);
        rep.deviations.push_back(raw[i].e);
        rep.max_deviation = std::max(rep.max_deviation, std::abs(raw[i].e));
        rep.min_deviation = std::min(rep.min_deviation, std::abs(raw[i].e));
        if (i > 0 && (raw[i].e > 0) == (raw[i - 1].e > 0)) rep.alternating = false;
    }
    rep.spread = rep.max_deviation > 0 ? (rep.max_deviation - rep.min_deviation) / rep.max_deviation : 0.0;
    rep.alternation_ok = rep.alternating && rep.spread <= spread_tol;
    return rep;
}

PositivityCertificate check_positivity_conditions(const PartialFractionForm& pf,
                                                  const BuraParams& params) {
    double scale = 0.0;
    for (double c : pf.inverse_part) scale = std::max(scale, std::abs(c));
    for (double c : pf.residues) scale = std::max(scale, std::abs(c));
    for (double c : pf.poly_part) scale = std::max(scale, std::abs(c));
    const double tol = 1e-12 * scale;

    PositivityCertificate cert;
    cert.d_negative = std::all_of(pf.poles.begin(), pf.poles.end(), [](double d) { return d < 0.0; });
    cert.residues_positive =
        std::all_of(pf.residues.begin(), pf.residues.end(), [tol](double c) { return c > -tol; });
    cert.c0_positive = std::all_of(pf.inverse_part.begin(), pf.inverse_part.end(),
                                   [tol](double c) { return c > -tol; });
    cert.degree_ok = params.m < params.k + params.beta;
    cert.certified = cert.d_negative && cert.residues_positive && cert.c0_positive && cert.degree_ok;
    return cert;
}

bool zeros_poles_interlace(const PartialFractionForm& pf) {
    if (!pf.zeros_all_real || pf.zeros.size() != pf.poles.size()) return false;
    double previous = 0.0;
    for (std::size_t j = 0; j < pf.poles.size(); ++j) {
        if (!(pf.zeros[j] < previous && pf.poles[j] < pf.zeros[j])) return false;
        previous = pf.poles[j];
    }
    return true;
}

double stahl_bound(double alpha, int k) {
    const double a = 1.0 - alpha;
    return std::pow(4.0, 2.0 - alpha) * std::abs(std::sin(std::numbers::pi * a)) *
           std::exp(-2.0 * std::numbers::pi * std::sqrt(a * k));
}

CoefficientSet make_coefficient_set(const RationalApprox& r, const PartialFractionForm& pf) {
    return {r.params(), r.minimax_error(), r.precision_bits(), pf};
}

}  // namespace bura

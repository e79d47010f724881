// Remez exchange for the best uniform rational approximation of t^a on [0, 1].
//
// Each iteration solves the levelled interpolation problem on the current
// reference x_0 < ... < x_{n-1}, n = m + k + 2:
//
//     p(x_i) = (f(x_i) - (-1)^i h) q(x_i),
//
// by projecting onto the orthogonal complement of the numerator space, which
// leaves a (k+1) x (k+1) eigenproblem for the levelled deviation h. The
// admissible eigenvalue is the one whose denominator keeps one sign on the
// reference. All extrema of the resulting error function then replace the
// reference, until the deviations level out.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <optional>
#include <sstream>
#include <utility>
#include <vector>

#include <boost/math/tools/minima.hpp>
#include <Eigen/Eigenvalues>

#include "bura/error.hpp"
#include "extended_precision.hpp"

namespace bura::detail {
namespace {

template <class Real>
struct Candidate {
    std::vector<Real> p;  // ascending powers, size m + 1
    std::vector<Real> q;  // ascending powers, size k + 1, q(1) = 1
    Real h = 0;           // levelled deviation
};

template <class Real>
struct Extremum {
    Real t;
    Real e;
};

/// Heuristic reference for t^a: zero, then points uniform in u = sqrt(-ln t)
/// from u_max down to 0 (t = 1). The smallest positive extremum of the
/// minimax error sits near E^(1/a), with E the asymptotic error estimate.
std::vector<double> heuristic_reference(double a, int m, int k) {
    const int n = m + k + 2;
    std::vector<double> ref{0.0};
    if (n == 2) {
        ref.push_back(1.0);
        return ref;
    }
    const double kappa = std::max(0.5 * (m + k), 0.5);
    const double sin_term = std::max(std::abs(std::sin(std::numbers::pi * a)), 1e-3);
    const double log_e = (1.0 + a) * std::log(4.0) + std::log(sin_term) -
                         2.0 * std::numbers::pi * std::sqrt(a * kappa);
    const double shrink = 1.0 - 0.6 / (kappa + 1.5);
    const double u_max = shrink * std::sqrt(std::max(-std::min(log_e, -1.0) / a, 1.0));
    for (int i = 1; i < n; ++i) {
        const double u = u_max * (1.0 - static_cast<double>(i - 1) / (n - 2));
        ref.push_back(std::exp(-u * u));
    }
    ref.back() = 1.0;
    return ref;
}

template <class Real>
class RemezSolver {
public:
    RemezSolver(const BuraParams& params, const RemezOptions& opts)
        : params_(params),
          opts_(opts),
          a_(Real(params.beta) - Real(params.alpha)),
          n_(params.m + params.k + 2) {}

    RemezOutcome run(std::vector<Real> reference) {
        Candidate<Real> cand;
        std::vector<Extremum<Real>> alternation;
        double spread = 1.0;
        double last_spread = 1.0;
        int iter = 0;
        for (; iter < opts_.max_iterations; ++iter) {
            cand = solve_reference(reference);
            check_consistency(cand, reference);
            auto extrema = locate_extrema(cand, reference);
            alternation = select_alternating(extrema);
            if (static_cast<int>(alternation.size()) < n_) {
                std::ostringstream msg;
                msg << "alternation lost at iteration " << iter << ": " << alternation.size()
                    << " of " << n_ << " points";
                throw Error(ErrorKind::NonConvergence, msg.str());
            }
            global_max_ = Real(0);
            for (const auto& x : extrema) global_max_ = std::max(global_max_, Real(abs(x.e)));
            Real lo = abs(alternation.front().e);
            Real hi = lo;
            for (const auto& x : alternation) {
                lo = std::min(lo, Real(abs(x.e)));
                hi = std::max(hi, Real(abs(x.e)));
            }
            last_spread = spread;
            spread = hi > 0 ? static_cast<double>((hi - lo) / hi) : 0.0;
            reference.clear();
            for (const auto& x : alternation) reference.push_back(x.t);
            if (spread < opts_.equioscillation_tol) break;
        }
        if (spread >= opts_.equioscillation_tol) {
            std::ostringstream msg;
            msg << "no convergence after " << opts_.max_iterations
                << " iterations, deviation spread " << spread << " (previous " << last_spread << ")";
            throw Error(ErrorKind::NonConvergence, msg.str());
        }

        RemezOutcome out;
        for (const auto& c : cand.p) out.numerator.emplace_back(c);
        for (const auto& c : cand.q) out.denominator.emplace_back(c);
        out.minimax_error = static_cast<double>(global_max_);
        out.levelled_error = static_cast<double>(abs(cand.h));
        out.spread = spread;
        out.iterations = iter + 1;
        out.precision_bits = std::numeric_limits<Real>::digits;
        for (const auto& x : alternation) out.alternation_points.push_back(static_cast<double>(x.t));
        return out;
    }

private:
    Real target(const Real& t) const { return t > 0 ? Real(pow(t, a_)) : Real(0); }

    Real error(const Candidate<Real>& c, const Real& t) const {
        return target(t) - horner(c.p, t) / horner(c.q, t);
    }

    Candidate<Real> solve_reference(const std::vector<Real>& x) const {
        const int m = params_.m;
        const int k = params_.k;
        MpVector<Real> f(n_);
        MpVector<Real> s(n_);
        MpMatrix<Real> vp(n_, m + 1);
        MpMatrix<Real> vq(n_, k + 1);
        for (int i = 0; i < n_; ++i) {
            f(i) = target(x[i]);
            s(i) = (i % 2 == 0) ? Real(1) : Real(-1);
            Real pw = 1;
            for (int j = 0; j <= std::max(m, k); ++j) {
                if (j <= m) vp(i, j) = pw;
                if (j <= k) vq(i, j) = pw;
                pw *= x[i];
            }
        }

        Candidate<Real> cand;
        if (k == 0) {
            // Polynomial case: linear in (p, h).
            MpMatrix<Real> sys(n_, n_);
            sys.leftCols(m + 1) = vp;
            sys.col(m + 1) = s;
            MpVector<Real> sol = sys.partialPivLu().solve(f);
            cand.p.assign(sol.data(), sol.data() + m + 1);
            cand.q = {Real(1)};
            cand.h = sol(m + 1);
            return cand;
        }

        Eigen::HouseholderQR<MpMatrix<Real>> qr(vp);
        MpMatrix<Real> full_q = qr.householderQ();
        MpMatrix<Real> w = full_q.rightCols(n_ - (m + 1));
        MpMatrix<Real> lhs = w.transpose() * (f.asDiagonal() * vq);
        MpMatrix<Real> rhs = w.transpose() * (s.asDiagonal() * vq);
        Eigen::PartialPivLU<MpMatrix<Real>> rhs_lu(rhs);
        MpMatrix<Real> pencil = rhs_lu.solve(lhs);
        Eigen::EigenSolver<MpMatrix<Real>> eig(pencil, true);
        if (eig.info() != Eigen::Success) {
            throw Error(ErrorKind::NonConvergence, "eigenvalue iteration failed on reference");
        }

        const auto& values = eig.eigenvalues();
        const auto vectors = eig.eigenvectors();
        const Real imag_tol = sqrt(std::numeric_limits<Real>::epsilon());
        std::optional<std::pair<Real, MpVector<Real>>> best;
        for (int idx = 0; idx < values.size(); ++idx) {
            const Real re = values(idx).real();
            const Real im = values(idx).imag();
            if (abs(im) > imag_tol * (abs(re) + 1)) continue;
            // Rotate the eigenvector to be real: divide by its largest entry.
            int pivot = 0;
            for (int j = 1; j < vectors.rows(); ++j) {
                if (abs(vectors(j, idx)) > abs(vectors(pivot, idx))) pivot = j;
            }
            const auto scale = vectors(pivot, idx);
            MpVector<Real> b(k + 1);
            for (int j = 0; j <= k; ++j) b(j) = (vectors(j, idx) / scale).real();
            MpVector<Real> qv = vq * b;
            bool pos = true;
            bool neg = true;
            for (int i = 0; i < n_; ++i) {
                pos = pos && qv(i) > 0;
                neg = neg && qv(i) < 0;
            }
            if (!pos && !neg) continue;
            if (!best || abs(re) < abs(best->first)) best.emplace(re, b);
        }
        if (!best) {
            throw Error(ErrorKind::NonConvergence,
                        "no levelled solution with a sign-constant denominator on the reference");
        }

        cand.h = best->first;
        MpVector<Real> b = best->second;
        Real q_at_one = b.sum();
        b /= q_at_one;
        MpVector<Real> qv = vq * b;
        MpVector<Real> pv(n_);
        for (int i = 0; i < n_; ++i) pv(i) = (f(i) - s(i) * cand.h) * qv(i);
        MpVector<Real> a = qr.solve(pv);
        cand.p.assign(a.data(), a.data() + m + 1);
        cand.q.assign(b.data(), b.data() + k + 1);
        return cand;
    }

    // In exact arithmetic the error equals (-1)^i h on the reference. A
    // visible mismatch means the working precision no longer resolves the
    // interpolation problem.
    void check_consistency(const Candidate<Real>& c, const std::vector<Real>& x) const {
        if (c.h == 0) return;
        Real worst = 0;
        for (int i = 0; i < n_; ++i) {
            const Real s = (i % 2 == 0) ? Real(1) : Real(-1);
            const Real q = horner(c.q, x[i]);
            if (q <= 0) {
                throw Error(ErrorKind::PrecisionExhausted,
                            "denominator lost its sign on the reference points");
            }
            worst = std::max(worst, Real(abs(error(c, x[i]) - s * c.h) / abs(c.h)));
        }
        if (worst > Real(1e-4)) {
            std::ostringstream msg;
            msg << "levelled deviation reproduced only to " << static_cast<double>(worst)
                << " relative at " << std::numeric_limits<Real>::digits << " bits";
            throw Error(ErrorKind::PrecisionExhausted, msg.str());
        }
    }

    Extremum<Real> refine(const Candidate<Real>& c, const Real& lo, const Real& hi,
                          bool maximum) const {
        const int bits = std::min(std::numeric_limits<Real>::digits / 2, 96);
        const Real sign = maximum ? Real(1) : Real(-1);
        boost::uintmax_t max_iter = 400;
        if (lo > 0) {
            auto objective = [&](const Real& s) { return Real(-sign * error(c, Real(exp(s)))); };
            auto [s, val] = boost::math::tools::brent_find_minima(objective, Real(log(lo)),
                                                                  Real(log(hi)), bits, max_iter);
            const Real t = exp(s);
            return {t, error(c, t)};
        }
        auto objective = [&](const Real& t) { return Real(-sign * error(c, t)); };
        auto [t, val] = boost::math::tools::brent_find_minima(objective, lo, hi, bits, max_iter);
        return {t, error(c, t)};
    }

    std::vector<Extremum<Real>> locate_extrema(const Candidate<Real>& c,
                                               const std::vector<Real>& reference) const {
        std::vector<Real> knots{Real(0), Real(1)};
        for (const auto& x : reference) {
            if (x > 0 && x < 1) knots.push_back(x);
        }
        std::sort(knots.begin(), knots.end());
        knots.erase(std::unique(knots.begin(), knots.end()), knots.end());

        constexpr int kPerInterval = 16;
        constexpr int kNearZero = 48;
        std::vector<Real> grid{Real(0)};
        for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
            const Real& lo = knots[i];
            const Real& hi = knots[i + 1];
            if (lo == 0) {
                const Real start = hi * Real(1e-12);
                const Real ratio = pow(hi / start, Real(1) / kNearZero);
                Real t = start;
                for (int j = 0; j < kNearZero; ++j, t *= ratio) grid.push_back(t);
            } else {
                const Real ratio = pow(hi / lo, Real(1) / kPerInterval);
                Real t = lo;
                for (int j = 0; j < kPerInterval; ++j, t *= ratio) grid.push_back(t);
            }
        }
        grid.push_back(Real(1));
        std::sort(grid.begin(), grid.end());
        grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

        std::vector<Real> e(grid.size());
        for (std::size_t i = 0; i < grid.size(); ++i) e[i] = error(c, grid[i]);

        std::vector<Extremum<Real>> out;
        out.push_back({grid.front(), e.front()});
        for (std::size_t i = 1; i + 1 < grid.size(); ++i) {
            const bool is_max = e[i] >= e[i - 1] && e[i] >= e[i + 1];
            const bool is_min = e[i] <= e[i - 1] && e[i] <= e[i + 1];
            if (!is_max && !is_min) continue;
            auto ext = refine(c, grid[i - 1], grid[i + 1], is_max);
            if (abs(ext.e) < abs(e[i])) ext = {grid[i], e[i]};
            out.push_back(ext);
        }
        out.push_back({grid.back(), e.back()});
        std::sort(out.begin(), out.end(), [](const auto& l, const auto& r) { return l.t < r.t; });
        return out;
    }

    // Merges same-sign runs (keeping the largest magnitude), then trims the
    // weaker end until exactly n points remain.
    std::vector<Extremum<Real>> select_alternating(const std::vector<Extremum<Real>>& ext) const {
        std::vector<Extremum<Real>> runs;
        for (const auto& x : ext) {
            if (x.e == 0) continue;
            if (!runs.empty() && (runs.back().e > 0) == (x.e > 0)) {
                if (abs(x.e) > abs(runs.back().e)) runs.back() = x;
            } else {
                runs.push_back(x);
            }
        }
        while (static_cast<int>(runs.size()) > n_) {
            if (abs(runs.front().e) < abs(runs.back().e)) {
                runs.erase(runs.begin());
            } else {
                runs.pop_back();
            }
        }
        return runs;
    }

    BuraParams params_;
    RemezOptions opts_;
    Real a_;
    int n_;
    Real global_max_ = 0;
};

template <int Bits>
RemezOutcome run_tier(const BuraParams& params, const RemezOptions& opts,
                      const std::vector<double>& initial_reference) {
    using Real = MpReal<Bits>;
    const auto start = initial_reference.empty()
                           ? heuristic_reference(params.exponent(), params.m, params.k)
                           : initial_reference;
    std::vector<Real> reference;
    reference.reserve(start.size());
    for (double x : start) reference.emplace_back(x);
    return RemezSolver<Real>(params, opts).run(std::move(reference));
}

}  // namespace

RemezOutcome run_remez(const BuraParams& params, const RemezOptions& opts,
                       const std::vector<double>& initial_reference) {
    if (!initial_reference.empty() &&
        static_cast<int>(initial_reference.size()) != params.reference_size()) {
        throw Error(ErrorKind::InvalidArgument, "initial reference has the wrong size");
    }
    const int bits = opts.precision_bits;
    if (bits <= 64) return run_tier<64>(params, opts, initial_reference);
    if (bits <= 128) return run_tier<128>(params, opts, initial_reference);
    if (bits <= 256) return run_tier<256>(params, opts, initial_reference);
    if (bits <= 512) return run_tier<512>(params, opts, initial_reference);
    throw Error(ErrorKind::InvalidArgument, "precision_bits above 512 is not supported");
}

}  // namespace bura::detail

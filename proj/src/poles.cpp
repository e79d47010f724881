// Partial fraction decomposition of t^(-beta) r(t) in extended precision.

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

#include <Eigen/Eigenvalues>

#include "bura/error.hpp"
#include "extended_precision.hpp"

namespace bura {
namespace {

using detail::BigFloat;
using Poly = std::vector<BigFloat>;

Poly trimmed(Poly p) {
    BigFloat scale = 0;
    for (const auto& c : p) scale = std::max(scale, BigFloat(abs(c)));
    const BigFloat tiny = scale * std::numeric_limits<BigFloat>::epsilon();
    while (p.size() > 1 && abs(p.back()) <= tiny) p.pop_back();
    return p;
}

Poly derivative(const Poly& p) {
    Poly d;
    for (std::size_t j = 1; j < p.size(); ++j) d.push_back(p[j] * static_cast<int>(j));
    if (d.empty()) d.push_back(BigFloat(0));
    return d;
}

struct Roots {
    std::vector<BigFloat> real;
    int complex_count = 0;
};

/// Roots from the companion matrix eigenvalues, real ones Newton-polished.
Roots polynomial_roots(const Poly& p) {
    Roots out;
    const int n = static_cast<int>(p.size()) - 1;
    if (n < 1) return out;
    detail::MpMatrix<BigFloat> companion = detail::MpMatrix<BigFloat>::Zero(n, n);
    for (int i = 1; i < n; ++i) companion(i, i - 1) = 1;
    for (int i = 0; i < n; ++i) companion(i, n - 1) = -p[i] / p[n];
    Eigen::EigenSolver<detail::MpMatrix<BigFloat>> eig(companion, false);
    if (eig.info() != Eigen::Success) {
        throw Error(ErrorKind::NonConvergence, "companion matrix eigenvalues did not converge");
    }
    const Poly dp = derivative(p);
    const BigFloat eps = std::numeric_limits<BigFloat>::epsilon();
    for (int i = 0; i < n; ++i) {
        const auto lambda = eig.eigenvalues()(i);
        if (abs(lambda.imag()) > BigFloat(1e-20) * abs(lambda.real())) {
            ++out.complex_count;
            continue;
        }
        BigFloat x = lambda.real();
        for (int it = 0; it < 60; ++it) {
            const BigFloat d = detail::horner(dp, x);
            if (d == 0) break;
            const BigFloat step = detail::horner(p, x) / d;
            x -= step;
            if (abs(step) <= eps * abs(x)) break;
        }
        out.real.push_back(x);
    }
    std::sort(out.real.begin(), out.real.end(), std::greater<>());
    return out;
}

double rounded(const BigFloat& x, double& worst) {
    const double d = static_cast<double>(x);
    if (x != 0) worst = std::max(worst, static_cast<double>(abs((BigFloat(d) - x) / x)));
    return d;
}

}  // namespace

PartialFractionForm partial_fractions(const RationalApprox& r) {
    const int beta = r.params().beta;
    const Poly p = trimmed(r.extended().numerator);
    const Poly q = trimmed(r.extended().denominator);

    if (q[0] == 0) throw Error(ErrorKind::PoleHit, "denominator vanishes at t = 0");

    const Roots poles = polynomial_roots(q);
    if (poles.complex_count > 0) {
        std::ostringstream msg;
        msg << poles.complex_count << " complex pole(s); the real partial fraction form does not apply";
        throw Error(ErrorKind::ComplexPoles, msg.str());
    }
    for (std::size_t j = 1; j < poles.real.size(); ++j) {
        const BigFloat gap = abs(poles.real[j - 1] - poles.real[j]);
        const BigFloat size = std::max(abs(poles.real[j - 1]), abs(poles.real[j]));
        if (gap <= BigFloat(1e-10) * size) {
            throw Error(ErrorKind::RepeatedPoles, "denominator has a multiple root");
        }
    }
    for (const auto& d : poles.real) {
        if (d == 0) throw Error(ErrorKind::PoleHit, "pole at t = 0");
    }

    PartialFractionForm pf;
    pf.beta = beta;
    double worst = 0.0;
    const Poly dq = derivative(q);
    for (const auto& d : poles.real) {
        const BigFloat pole_residue = detail::horner(p, d) / detail::horner(dq, d);
        BigFloat d_pow = 1;
        for (int j = 0; j < beta; ++j) d_pow *= d;
        pf.poles.push_back(rounded(d, worst));
        pf.pole_residues.push_back(rounded(pole_residue, worst));
        pf.residues.push_back(rounded(pole_residue / d_pow, worst));
    }

    // Taylor coefficients of r at 0: c_{0,j} multiplies t^(-j) and equals the
    // coefficient of t^(beta - j).
    std::vector<BigFloat> taylor(beta);
    for (int n = 0; n < beta; ++n) {
        BigFloat acc = n < static_cast<int>(p.size()) ? p[n] : BigFloat(0);
        for (int i = 1; i <= n && i < static_cast<int>(q.size()); ++i) acc -= q[i] * taylor[n - i];
        taylor[n] = acc / q[0];
    }
    for (int j = 1; j <= beta; ++j) pf.inverse_part.push_back(rounded(taylor[beta - j], worst));

    // Polynomial part: quotient of p by t^beta q.
    const int deg_p = static_cast<int>(p.size()) - 1;
    const int deg_den = static_cast<int>(q.size()) - 1 + beta;
    if (deg_p >= deg_den) {
        Poly den(beta, BigFloat(0));
        den.insert(den.end(), q.begin(), q.end());
        Poly rem = p;
        std::vector<BigFloat> quot(deg_p - deg_den + 1);
        for (int i = deg_p - deg_den; i >= 0; --i) {
            quot[i] = rem[i + deg_den] / den[deg_den];
            for (int j = 0; j <= deg_den; ++j) rem[i + j] -= quot[i] * den[j];
        }
        for (const auto& c : quot) pf.poly_part.push_back(rounded(c, worst));
    }

    const Roots zeros = polynomial_roots(p);
    pf.zeros_all_real = zeros.complex_count == 0;
    for (const auto& z : zeros.real) pf.zeros.push_back(static_cast<double>(z));
    pf.rounding_error = worst;
    return pf;
}

}  // namespace bura

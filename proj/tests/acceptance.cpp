// Acceptance runner: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "bura/error.hpp"
#include "bura/experiments.hpp"
#include "bura/matrix.hpp"
#include "bura/rational.hpp"
#include "bura/solver.hpp"
#include "bura/spectral.hpp"

using namespace bura;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

constexpr double kAlphas[] = {0.25, 0.5, 0.75};
constexpr int kKs[] = {5, 6, 7};

// Printed minimax errors, alpha-major.
constexpr double kTable1[3][3] = {
    {2.8676e-5, 9.2522e-6, 3.2566e-6},
    {2.6896e-4, 1.0747e-4, 4.6037e-5},
    {2.7162e-3, 1.4312e-3, 7.8966e-4},
};

// Printed l2 relative errors for f2, rows h = 2^-5 .. 2^-11, columns (alpha, k) alpha-major.
constexpr double kTable2[7][9] = {
    {6.3e-5, 1.2e-4, 7.5e-5, 1.9e-4, 3.1e-4, 1.0e-4, 8.5e-4, 3.5e-4, 2.1e-4},
    {6.8e-4, 2.1e-4, 1.2e-4, 9.3e-4, 6.2e-4, 2.6e-4, 3.0e-4, 7.3e-4, 1.9e-4},
    {4.9e-3, 9.9e-4, 2.2e-4, 3.2e-3, 1.3e-3, 5.5e-4, 1.6e-3, 1.0e-3, 6.6e-5},
    {1.2e-2, 4.9e-3, 1.0e-3, 5.0e-3, 2.4e-3, 1.0e-3, 2.7e-3, 6.7e-4, 4.4e-4},
    {3.7e-2, 9.6e-3, 4.9e-3, 5.6e-3, 1.3e-3, 1.2e-3, 8.2e-4, 1.3e-3, 1.1e-3},
    {2.1e-2, 3.6e-2, 9.5e-3, 2.4e-2, 8.8e-3, 1.4e-3, 5.8e-3, 3.0e-3, 1.5e-3},
    {1.9e-1, 2.3e-2, 3.6e-2, 4.2e-2, 1.4e-2, 8.9e-3, 1.6e-3, 9.9e-4, 4.3e-4},
};

struct Pair {
    double alpha;
    int k;
    RationalApprox r;
    PartialFractionForm pf;
    CoefficientSet set;
};

int failures = 0;

void report(int id, bool ok, const std::string& what, const std::string& detail) {
    std::printf("%s  %2d  %s  [%s]\n", ok ? "PASS" : "FAIL", id, what.c_str(), detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
}

std::string fmt(const char* f, double a, double b = 0, double c = 0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c);
    return buf;
}

std::vector<Pair> pairs;

void table1() {
    const auto t0 = Clock::now();
    for (double a : kAlphas) {
        for (int k : kKs) {
            Pair p{a, k, bura_compute({a, 1, k, k}), {}, {}};
            p.pf = partial_fractions(p.r);
            p.set = make_coefficient_set(p.r, p.pf);
            pairs.push_back(std::move(p));
        }
    }
    const double elapsed = seconds_since(t0);
    double worst = 0;
    for (int i = 0; i < 9; ++i) {
        const double printed = kTable1[i / 3][i % 3];
        worst = std::max(worst, std::abs(pairs[i].r.minimax_error() - printed) / printed);
    }
    report(1, worst <= 0.01 && elapsed <= 60, "minimax error table",
           fmt("max rel dev %.3e, %.2f s", worst, elapsed));
}

void equioscillation() {
    bool ok = true;
    double worst = 0;
    for (const auto& p : pairs) {
        try {
            const ExtremaReport e = verify_equioscillation(p.r, 1e-6);
            ok = ok && e.alternation_ok && static_cast<int>(e.points.size()) == 2 * p.k + 2;
            worst = std::max(worst, e.spread);
        } catch (const Error& err) {
            std::printf("      alpha=%g k=%d: %s\n", p.alpha, p.k, err.what());
            ok = false;
        }
    }
    report(2, ok, "2k+2 alternating extrema", fmt("max spread %.3e", worst));
}

void c0_identity() {
    double worst_c0 = 0, worst_res = 0;
    for (const auto& p : pairs) {
        const double e = p.r.minimax_error();
        worst_c0 = std::max(worst_c0, std::abs(p.pf.inverse_part[0] - e) / e);
        for (std::size_t j = 0; j < p.pf.poles.size(); ++j) {
            const double star = p.pf.pole_residues[j];
            worst_res = std::max(worst_res, std::abs(p.pf.residues[j] * p.pf.poles[j] - star) / std::abs(star));
        }
    }
    report(3, worst_c0 <= 1e-8 && worst_res <= 1e-12, "c0 = E and c_j d_j = c*_j",
           fmt("c0 %.3e, residues %.3e", worst_c0, worst_res));
}

void sign_structure() {
    bool ok = true;
    for (const auto& p : pairs) {
        const PositivityCertificate c = check_positivity_conditions(p.pf, p.r.params());
        const bool il = zeros_poles_interlace(p.pf);
        if (!c.certified || !il) std::printf("      alpha=%g k=%d: certified=%d interlace=%d\n", p.alpha, p.k, c.certified, il);
        ok = ok && c.certified && il;
    }
    report(4, ok, "negative poles, positive residues, interlacing", "9 pairs");
}

void stahl() {
    double worst = 0;
    for (const auto& p : pairs) worst = std::max(worst, p.r.minimax_error() / stahl_bound(p.alpha, p.k));
    report(5, worst <= 1.0, "E below the Stahl-type bound", fmt("max E/bound %.3f", worst));
}

void error_bound() {
    const auto t0 = Clock::now();
    std::mt19937_64 rng(2024);
    std::normal_distribution<double> normal;
    bool ok = true;
    double worst = 0;
    int checks = 0;
    for (int n : {255, 511, 1023, 2047}) {
        const NormalizedMatrix a = laplacian_1d(n);
        const EigenDecomposition eig = eigen_decomposition(a);
        std::vector<Eigen::VectorXd> data{sample_rhs(rhs_from_string("f1"), n), sample_rhs(rhs_from_string("f2"), n)};
        for (int i = 0; i < 5; ++i) {
            Eigen::VectorXd v(n);
            for (auto& x : v) x = normal(rng);
            data.push_back(v);
        }
        for (const auto& p : pairs) {
            const BuraOperator op(p.pf, a);
            for (const auto& f : data) {
                const Eigen::VectorXd ur = op.apply(f).u_r;
                for (double gamma : {0.0, 1.0}) {
                    const ErrorReport r = error_report(p.set, eig, f, ur, gamma);
                    ok = ok && r.bound_satisfied;
                    worst = std::max(worst, r.ratio / r.bound_E);
                    ++checks;
                }
            }
        }
    }
    const double elapsed = seconds_since(t0);
    report(6, ok && elapsed <= 300, "energy error ratio below E",
           fmt("%g checks, max ratio/E %.4f, %.1f s", checks, worst, elapsed));
}

void doubly_nonnegative() {
    bool ok = true;
    double worst_neg = 1, worst_sym = 0;
    for (int n : {100, 255}) {
        const NormalizedMatrix a = laplacian_1d(n);
        for (const auto& p : pairs) {
            const DoublyNonnegativeReport r = verify_doubly_nonnegative(p.pf, a);
            ok = ok && r.nonnegative && r.symmetric;
            worst_neg = std::min(worst_neg, r.min_entry / r.max_entry);
            worst_sym = std::max(worst_sym, r.symmetry_defect);
        }
    }
    report(7, ok, "operator is doubly nonnegative", fmt("min/max %.3e, symmetry %.3e", worst_neg, worst_sym));
}

void monotonicity() {
    Eigen::MatrixXd a1(2, 2);
    a1 << -1, 3, 2, -4;
    const Eigen::MatrixXd a2 = a1 + 6 * Eigen::MatrixXd::Identity(2, 2);
    const SparseSpdMatrix t = SparseSpdMatrix::tridiagonal(std::vector<double>(64, 2.0), std::vector<double>(63, -1.0));
    const bool ok = is_monotone_dense(a1) && !is_m_matrix(a1) && !is_monotone_dense(a2) &&
                    is_m_matrix(laplacian_1d(255).matrix) && is_m_matrix(t) && is_m_matrix(normalize(t).matrix);
    report(8, ok, "monotone and M-matrix verdicts", "A1 monotone not M, A2 not monotone, Laplacians M");
}

void table2_and_slopes() {
    const auto t0 = Clock::now();
    ExperimentConfig cfg;
    cfg.precision_bits = pairs.front().r.precision_bits();
    std::vector<ApproxCell> approx;
    for (const auto& p : pairs) approx.push_back({p.alpha, p.k, p.set, p.r.iterations(), p.r.deviation_spread()});
    const std::vector<Table2Cell> cells = run_table2(cfg, approx);
    bool ok = cells.size() == 63;
    double worst_factor = 0, worst_bound = 0;
    for (std::size_t i = 0; ok && i < cells.size(); ++i) {
        const double printed = kTable2[i / 9][i % 9];
        const double factor = std::max(cells[i].rel_l2 / printed, printed / cells[i].rel_l2);
        worst_factor = std::max(worst_factor, factor);
        worst_bound = std::max(worst_bound, cells[i].rel_l2 / cells[i].bound);
        if (factor > 2 || cells[i].rel_l2 > cells[i].bound) {
            std::printf("      h=2^-%d alpha=%g k=%d: %.3e vs %.1e, bound %.3e\n", cells[i].mesh_exponent,
                        cells[i].alpha, cells[i].k, cells[i].rel_l2, printed, cells[i].bound);
            ok = false;
        }
    }
    const FiguresData fig = run_figures(cfg, approx);
    double worst_slope = 0;
    std::string slopes;
    for (double a : kAlphas) {
        const double s = pooled_log2_slope(fig.fig3, a);
        const double dev = std::abs(s + 2 * (1 - a));
        worst_slope = std::max(worst_slope, dev);
        slopes += fmt(" %.3f", s);
        ok = ok && dev <= 0.2;
    }
    report(9, ok, "l2 error table and mesh slopes",
           fmt("max factor %.3f, max cell/bound %.3e", worst_factor, worst_bound) + ", slopes" + slopes +
               fmt(", %.1f s", seconds_since(t0)));
}

void oracle() {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> normal;
    double worst_semi = 0, worst_one = 0;
    for (int n : {64, 255, 512}) {
        const NormalizedMatrix a = laplacian_1d(n);
        const EigenDecomposition eig = eigen_decomposition(a);
        Eigen::VectorXd f(n);
        for (auto& x : f) x = normal(rng);
        for (const auto& [a1, a2] : {std::pair{0.25, 0.5}, std::pair{0.5, 0.5}, std::pair{0.3, 0.45}}) {
            const Eigen::VectorXd two = exact_frac_apply(eig, a1, exact_frac_apply(eig, a2, f));
            const Eigen::VectorXd one = exact_frac_apply(eig, a1 + a2, f);
            worst_semi = std::max(worst_semi, (two - one).norm() / one.norm());
        }
        const Eigen::VectorXd u = exact_frac_apply(eig, 1.0, f);
        const Eigen::VectorXd direct = shifted_solve(a, 0.0, f);
        worst_one = std::max(worst_one, (u - direct).norm() / direct.norm());
    }
    report(10, worst_semi <= 1e-10 && worst_one <= 1e-11, "oracle semigroup and alpha = 1 consistency",
           fmt("semigroup %.3e, alpha=1 %.3e", worst_semi, worst_one));
}

}  // namespace

int main() {
    try {
        table1();
        equioscillation();
        c0_identity();
        sign_structure();
        stahl();
        error_bound();
        doubly_nonnegative();
        monotonicity();
        table2_and_slopes();
        oracle();
    } catch (const std::exception& e) {
        std::printf("FAIL  aborted: %s\n", e.what());
        return 1;
    }
    std::printf("%s: %d failed\n", failures ? "FAILED" : "ALL PASSED", failures);
    return failures ? 1 : 0;
}

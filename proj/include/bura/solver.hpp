#pragma once

// u_r = A^(-beta) r(A) f evaluated term by term from the partial fraction form:
// beta plain solves, k shifted solves and (rarely) a polynomial part.

#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "bura/matrix.hpp"
#include "bura/rational.hpp"

namespace bura {

enum class LinearSolver { thomas_direct, conjugate_gradient };

std::string to_string(LinearSolver s);
/// "thomas" or "cg". Throws Error(InvalidArgument).
LinearSolver linear_solver_from_string(const std::string& name);

struct SolverConfig {
    LinearSolver linear_solver = LinearSolver::thomas_direct;
    double cg_rel_tol = 1e-12;
    int cg_max_iter = 20000;
    bool parallel_shifted_solves = false;

    /// Throws Error(InvalidArgument) unless cg_rel_tol is in (0, 1e-4] and
    /// cg_max_iter >= 1.
    void validate() const;
};

/// Thomas elimination needs a tridiagonal matrix; anything else goes to CG.
LinearSolver effective_solver(const SolverConfig& cfg, const SparseSpdMatrix& a);

struct SolveReport {
    Eigen::VectorXd u_r;
    /// Relative residual ||(A - d I) x - f|| / ||f|| of every linear solve, in
    /// term order (plain solves first, then shifted solves); polynomial terms
    /// contribute no entry.
    std::vector<double> per_term_residuals;
    std::vector<int> cg_iterations;  // empty on the direct path
    double wall_time = 0.0;          // seconds
    int terms_evaluated = 0;
    LinearSolver solver = LinearSolver::thomas_direct;
};

/// Solves (A - d I) x = f. Throws Error(ShiftNotSpd) when A - d I is not
/// positive definite (non-positive pivot or curvature), Error(CgDivergence)
/// when CG runs out of iterations or breaks down.
Eigen::VectorXd shifted_solve(const NormalizedMatrix& a, double d, const Eigen::VectorXd& f,
                              const SolverConfig& cfg = {}, double* residual = nullptr,
                              int* iterations = nullptr);

/// LDL^T factors of a shifted symmetric tridiagonal matrix, reusable across
/// right-hand sides.
class TridiagonalFactor {
public:
    TridiagonalFactor() = default;
    /// Throws Error(ShiftNotSpd) on a non-positive pivot.
    TridiagonalFactor(const SparseSpdMatrix& a, double shift);

    Eigen::VectorXd solve(const Eigen::VectorXd& f) const;
    int n() const { return static_cast<int>(pivot_.size()); }

private:
    Eigen::VectorXd pivot_;  // D
    Eigen::VectorXd lower_;  // unit lower bidiagonal L
};

/// The operator f -> A^(-beta) r(A) f with all factorizations done up front.
/// Immutable after construction; apply() may be called concurrently.
class BuraOperator {
public:
    BuraOperator(const PartialFractionForm& pf, const NormalizedMatrix& a, const SolverConfig& cfg = {});

    SolveReport apply(const Eigen::VectorXd& f) const;

    int n() const { return a_.n(); }
    int terms() const { return pf_.terms(); }
    LinearSolver solver() const { return solver_; }

private:
    Eigen::VectorXd solve_term(int index, const Eigen::VectorXd& f, double& residual, int& iterations) const;

    PartialFractionForm pf_;
    NormalizedMatrix a_;
    SolverConfig cfg_;
    LinearSolver solver_;
    std::vector<double> shifts_;  // 0 for plain solves, d_j for shifted solves
    std::vector<TridiagonalFactor> factors_;
};

/// One-shot form of BuraOperator(pf, a, cfg).apply(f).
SolveReport apply_bura_inverse(const PartialFractionForm& pf, const NormalizedMatrix& a,
                               const Eigen::VectorXd& f, const SolverConfig& cfg = {});

/// Pairwise sum of equally sized vectors in index order.
Eigen::VectorXd pairwise_sum(const std::vector<Eigen::VectorXd>& terms);

struct DoublyNonnegativeReport {
    double min_entry = 0.0;
    double max_entry = 0.0;
    double symmetry_defect = 0.0;  // max |B - B^T| / max |B|
    bool nonnegative = false;      // min_entry >= -1e-12 max_entry
    bool symmetric = false;        // symmetry_defect <= 1e-12
};

inline constexpr int kDoublyNonnegativeCap = 1024;

/// Materializes A^(-beta) r(A) column by column. Throws Error(DimensionTooLarge).
DoublyNonnegativeReport verify_doubly_nonnegative(const PartialFractionForm& pf, const NormalizedMatrix& a,
                                                  int n_cap = kDoublyNonnegativeCap,
                                                  const SolverConfig& cfg = {});

/// CSV rows "index,x,value"; x = (index + 1) h when h > 0, otherwise empty.
void write_solution_csv(std::ostream& out, const Eigen::VectorXd& u, double h = 0.0);
std::string solve_report_to_json(const SolveReport& report, int indent = 2);

}  // namespace bura

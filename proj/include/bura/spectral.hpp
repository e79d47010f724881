#pragma once

// Exact reference through the eigendecomposition A = W D W^T: fractional
// powers, A^gamma energy norms and error reports against a BURA solve.

#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "bura/matrix.hpp"
#include "bura/rational.hpp"
#include "bura/solver.hpp"

namespace bura {

enum class EigenSource { analytic_laplacian, dense_solver };

struct EigenDecomposition {
    Eigen::VectorXd values;   // increasing
    Eigen::MatrixXd vectors;  // orthonormal columns, column i pairs with values[i]
    EigenSource source = EigenSource::dense_solver;

    int n() const { return static_cast<int>(values.size()); }
    /// W^T v
    Eigen::VectorXd coefficients(const Eigen::VectorXd& v) const;
    /// W c
    Eigen::VectorXd synthesize(const Eigen::VectorXd& c) const;
};

inline constexpr int kDenseEigenCap = 4096;

/// Psi_i(j) = sqrt(2 / (N + 1)) sin(i j pi / (N + 1)), Lambda_i = sin^2(i pi / (2 (N + 1))).
EigenDecomposition analytic_laplacian_eigenpairs(int n);

/// Self-adjoint dense eigensolver. Throws Error(DimensionTooLarge).
EigenDecomposition dense_eigenpairs(const SparseSpdMatrix& a, int cap = kDenseEigenCap);

/// Analytic pairs for the model Laplacian, dense solver otherwise.
EigenDecomposition eigen_decomposition(const NormalizedMatrix& a, int cap = kDenseEigenCap);

/// sum_i Lambda_i^(-alpha) (Psi_i^T f) Psi_i
Eigen::VectorXd exact_frac_apply(const EigenDecomposition& eig, double alpha, const Eigen::VectorXd& f);
Eigen::VectorXd exact_frac_apply(const NormalizedMatrix& a, double alpha, const Eigen::VectorXd& f,
                                 int cap = kDenseEigenCap);

/// sqrt(sum_i Lambda_i^gamma (Psi_i^T v)^2)
double energy_norm(const EigenDecomposition& eig, double gamma, const Eigen::VectorXd& v);
double energy_norm(const NormalizedMatrix& a, double gamma, const Eigen::VectorXd& v, int cap = kDenseEigenCap);

struct ErrorReport {
    double alpha = 0.0;
    int beta = 1;
    int m = 0;
    int k = 0;
    int n = 0;
    double gamma = 0.0;
    double energy_error = 0.0;  // ||u_r - u||_{A^(gamma + beta)}
    double rhs_norm = 0.0;      // ||f||_{A^(gamma - beta)}
    double ratio = 0.0;         // energy_error / rhs_norm, 0 when f = 0
    double bound_E = 0.0;
    bool bound_satisfied = false;  // ratio <= bound_E (1 + 1e-10)
};

/// Compares an already computed u_r against the exact u = A^(-alpha) f.
ErrorReport error_report(const CoefficientSet& coeffs, const EigenDecomposition& eig, const Eigen::VectorXd& f,
                         const Eigen::VectorXd& u_r, double gamma);

/// Solves with the BURA operator, then compares against the oracle.
ErrorReport relative_error_report(const CoefficientSet& coeffs, const NormalizedMatrix& a,
                                  const EigenDecomposition& eig, const Eigen::VectorXd& f, double gamma,
                                  const SolverConfig& cfg = {});

std::string error_report_to_json(const ErrorReport& r);
/// Header "alpha,beta,m,k,gamma,N,ratio,bound_E,satisfied" then one row per report.
void write_error_reports_csv(std::ostream& out, const std::vector<ErrorReport>& reports);

}  // namespace bura

#include "bura/spectral.hpp"

#include <cmath>
#include <iomanip>
#include <numbers>
#include <ostream>

#include <Eigen/Eigenvalues>
#include <json.hpp>

#include "bura/error.hpp"

namespace bura {

Eigen::VectorXd EigenDecomposition::coefficients(const Eigen::VectorXd& v) const {
    if (v.size() != n()) throw Error(ErrorKind::InvalidArgument, "vector has the wrong dimension");
    return vectors.transpose() * v;
}

Eigen::VectorXd EigenDecomposition::synthesize(const Eigen::VectorXd& c) const { return vectors * c; }

EigenDecomposition analytic_laplacian_eigenpairs(int n) {
    if (n < 1) throw Error(ErrorKind::InvalidArgument, "dimension must be positive");
    EigenDecomposition out;
    out.source = EigenSource::analytic_laplacian;
    out.values.resize(n);
    out.vectors.resize(n, n);
    const long period = 2L * (n + 1);
    const double norm = std::sqrt(2.0 / (n + 1));
    // sin(pi r / (n + 1)) for every residue r of i * j modulo 2 (n + 1)
    std::vector<double> table(period);
    for (long r = 0; r < period; ++r) table[r] = std::sin(std::numbers::pi * static_cast<double>(r) / (n + 1));
    for (int i = 1; i <= n; ++i) {
        out.values[i - 1] = laplacian_1d_eigenvalue(n, i);
        for (int j = 1; j <= n; ++j) out.vectors(j - 1, i - 1) = norm * table[(static_cast<long>(i) * j) % period];
    }
    return out;
}

EigenDecomposition dense_eigenpairs(const SparseSpdMatrix& a, int cap) {
    if (a.n() > cap) {
        throw Error(ErrorKind::DimensionTooLarge,
                    "dense eigensolver capped at n = " + std::to_string(cap) + ", got " + std::to_string(a.n()));
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(a.to_dense());
    if (solver.info() != Eigen::Success) throw Error(ErrorKind::NonConvergence, "dense eigensolver failed");
    EigenDecomposition out;
    out.source = EigenSource::dense_solver;
    out.values = solver.eigenvalues();
    out.vectors = solver.eigenvectors();
    return out;
}

EigenDecomposition eigen_decomposition(const NormalizedMatrix& a, int cap) {
    if (a.model == MatrixModel::laplacian_1d) return analytic_laplacian_eigenpairs(a.n());
    return dense_eigenpairs(a.matrix, cap);
}

Eigen::VectorXd exact_frac_apply(const EigenDecomposition& eig, double alpha, const Eigen::VectorXd& f) {
    Eigen::VectorXd c = eig.coefficients(f);
    for (int i = 0; i < eig.n(); ++i) c[i] *= std::pow(eig.values[i], -alpha);
    return eig.synthesize(c);
}

Eigen::VectorXd exact_frac_apply(const NormalizedMatrix& a, double alpha, const Eigen::VectorXd& f, int cap) {
    return exact_frac_apply(eigen_decomposition(a, cap), alpha, f);
}

double energy_norm(const EigenDecomposition& eig, double gamma, const Eigen::VectorXd& v) {
    const Eigen::VectorXd c = eig.coefficients(v);
    double sum = 0.0;
    for (int i = 0; i < eig.n(); ++i) sum += std::pow(eig.values[i], gamma) * c[i] * c[i];
    return std::sqrt(sum);
}

double energy_norm(const NormalizedMatrix& a, double gamma, const Eigen::VectorXd& v, int cap) {
    return energy_norm(eigen_decomposition(a, cap), gamma, v);
}

ErrorReport error_report(const CoefficientSet& coeffs, const EigenDecomposition& eig, const Eigen::VectorXd& f,
                         const Eigen::VectorXd& u_r, double gamma) {
    const BuraParams& p = coeffs.params;
    ErrorReport out;
    out.alpha = p.alpha;
    out.beta = p.beta;
    out.m = p.m;
    out.k = p.k;
    out.n = eig.n();
    out.gamma = gamma;
    out.bound_E = coeffs.minimax_error;

    const Eigen::VectorXd u = exact_frac_apply(eig, p.alpha, f);
    out.energy_error = energy_norm(eig, gamma + p.beta, u_r - u);
    out.rhs_norm = energy_norm(eig, gamma - p.beta, f);
    out.ratio = out.rhs_norm > 0 ? out.energy_error / out.rhs_norm : 0.0;
    out.bound_satisfied = out.ratio <= out.bound_E * (1 + 1e-10);
    return out;
}

ErrorReport relative_error_report(const CoefficientSet& coeffs, const NormalizedMatrix& a,
                                  const EigenDecomposition& eig, const Eigen::VectorXd& f, double gamma,
                                  const SolverConfig& cfg) {
    if (eig.n() != a.n()) throw Error(ErrorKind::InvalidArgument, "eigendecomposition does not match the matrix");
    const SolveReport solve = apply_bura_inverse(coeffs.pf, a, f, cfg);
    return error_report(coeffs, eig, f, solve.u_r, gamma);
}

std::string error_report_to_json(const ErrorReport& r) {
    nlohmann::json doc;
    doc["alpha"] = r.alpha;
    doc["beta"] = r.beta;
    doc["m"] = r.m;
    doc["k"] = r.k;
    doc["N"] = r.n;
    doc["gamma"] = r.gamma;
    doc["energy_error"] = r.energy_error;
    doc["rhs_norm"] = r.rhs_norm;
    doc["ratio"] = r.ratio;
    doc["bound_E"] = r.bound_E;
    doc["bound_satisfied"] = r.bound_satisfied;
    return doc.dump();
}

void write_error_reports_csv(std::ostream& out, const std::vector<ErrorReport>& reports) {
    out << "alpha,beta,m,k,gamma,N,ratio,bound_E,satisfied\n" << std::setprecision(17);
    for (const auto& r : reports) {
        out << r.alpha << ',' << r.beta << ',' << r.m << ',' << r.k << ',' << r.gamma << ',' << r.n << ','
            << r.ratio << ',' << r.bound_E << ',' << (r.bound_satisfied ? "true" : "false") << '\n';
    }
}

}  // namespace bura

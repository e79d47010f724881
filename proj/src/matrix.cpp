#include "bura/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/LU>

#include "bura/error.hpp"

namespace bura {
namespace {

bool banded_by_one(const SparseSpdMatrix::Storage& s) {
    for (int i = 0; i < s.outerSize(); ++i) {
        for (SparseSpdMatrix::Storage::InnerIterator it(s, i); it; ++it) {
            if (it.value() != 0.0 && std::abs(it.row() - it.col()) > 1) return false;
        }
    }
    return true;
}

bool exactly_symmetric(const SparseSpdMatrix::Storage& s) {
    const SparseSpdMatrix::Storage t = s.transpose();
    for (int i = 0; i < s.outerSize(); ++i) {
        for (SparseSpdMatrix::Storage::InnerIterator it(s, i); it; ++it) {
            if (t.coeff(it.row(), it.col()) != it.value()) return false;
        }
    }
    return true;
}

// Number of eigenvalues of the symmetric tridiagonal (d, e) at or below x.
int sturm_count(const Eigen::VectorXd& d, const Eigen::VectorXd& e, double x) {
    constexpr double tiny = 1e-300;
    int count = 0;
    double q = d[0] - x;
    for (Eigen::Index i = 0;; ++i) {
        if (q <= 0) {
            ++count;
            if (q == 0) q = -tiny;
        }
        if (i + 1 == d.size()) break;
        q = d[i + 1] - x - e[i] * e[i] / q;
    }
    return count;
}

void require_square(const Eigen::MatrixXd& a) {
    if (a.rows() != a.cols() || a.rows() == 0) {
        throw Error(ErrorKind::InvalidArgument, "matrix must be square and non-empty");
    }
}

}  // namespace

SparseSpdMatrix SparseSpdMatrix::from_triplets(int n, const std::vector<Eigen::Triplet<double>>& entries) {
    if (n < 1) throw Error(ErrorKind::InvalidArgument, "dimension must be positive");
    for (const auto& t : entries) {
        if (t.row() < 0 || t.row() >= n || t.col() < 0 || t.col() >= n) {
            throw Error(ErrorKind::InvalidArgument, "entry index out of range");
        }
    }
    SparseSpdMatrix out;
    out.storage_.resize(n, n);
    out.storage_.setFromTriplets(entries.begin(), entries.end());
    out.storage_.prune(0.0);
    out.storage_.makeCompressed();
    if (!exactly_symmetric(out.storage_)) throw Error(ErrorKind::NotSymmetric, "matrix is not symmetric");
    out.structure_ = banded_by_one(out.storage_) ? StructureTag::tridiagonal : StructureTag::general;
    return out;
}

SparseSpdMatrix SparseSpdMatrix::tridiagonal(const std::vector<double>& diag, const std::vector<double>& off) {
    const int n = static_cast<int>(diag.size());
    if (n < 1 || static_cast<int>(off.size()) != n - 1) {
        throw Error(ErrorKind::InvalidArgument, "tridiagonal needs n diagonal and n-1 off-diagonal entries");
    }
    std::vector<Eigen::Triplet<double>> t;
    t.reserve(3 * n);
    for (int i = 0; i < n; ++i) {
        t.emplace_back(i, i, diag[i]);
        if (i + 1 < n) {
            t.emplace_back(i, i + 1, off[i]);
            t.emplace_back(i + 1, i, off[i]);
        }
    }
    return from_triplets(n, t);
}

SparseSpdMatrix SparseSpdMatrix::identity(int n) {
    return tridiagonal(std::vector<double>(std::max(n, 0), 1.0), std::vector<double>(std::max(n - 1, 0), 0.0));
}

Eigen::VectorXd SparseSpdMatrix::diagonal() const { return storage_.diagonal(); }

Eigen::VectorXd SparseSpdMatrix::sub_diagonal() const {
    Eigen::VectorXd e(std::max(n() - 1, 0));
    for (int i = 0; i + 1 < n(); ++i) e[i] = storage_.coeff(i + 1, i);
    return e;
}

SparseSpdMatrix SparseSpdMatrix::scaled(double factor) const {
    SparseSpdMatrix out = *this;
    out.storage_ *= factor;
    return out;
}

SparseSpdMatrix SparseSpdMatrix::divided_by(double divisor) const {
    SparseSpdMatrix out = *this;
    out.storage_ /= divisor;
    return out;
}

bool SparseSpdMatrix::is_positive_definite() const {
    if (n() == 0) return false;
    if (structure_ == StructureTag::tridiagonal) {
        const Eigen::VectorXd d = diagonal();
        const Eigen::VectorXd e = sub_diagonal();
        double pivot = d[0];
        if (!(pivot > 0)) return false;
        for (int i = 1; i < n(); ++i) {
            pivot = d[i] - e[i - 1] * e[i - 1] / pivot;
            if (!(pivot > 0)) return false;
        }
        return true;
    }
    Eigen::SparseMatrix<double> col = storage_;
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(col);
    if (ldlt.info() != Eigen::Success) return false;
    return (ldlt.vectorD().array() > 0).all();
}

NormalizedMatrix laplacian_1d(int n) {
    if (n < 1) throw Error(ErrorKind::InvalidArgument, "laplacian_1d needs N >= 1, got " + std::to_string(n));
    NormalizedMatrix out;
    out.matrix = SparseSpdMatrix::tridiagonal(std::vector<double>(n, 0.5), std::vector<double>(n - 1, -0.25));
    const double inv_h = n + 1.0;
    out.scale = 4.0 * inv_h * inv_h;
    out.spectral_bound_proof = SpectralBoundProof::gershgorin;
    out.model = MatrixModel::laplacian_1d;
    return out;
}

double laplacian_1d_eigenvalue(int n, int i) {
    const double s = std::sin(i * std::numbers::pi / (2.0 * (n + 1)));
    return s * s;
}

bool is_z_matrix(const Eigen::MatrixXd& a) {
    require_square(a);
    for (Eigen::Index j = 0; j < a.cols(); ++j)
        for (Eigen::Index i = 0; i < a.rows(); ++i)
            if (i != j && a(i, j) > 0) return false;
    return true;
}

bool is_z_matrix(const SparseSpdMatrix& a) {
    const auto& s = a.storage();
    for (int i = 0; i < s.outerSize(); ++i)
        for (SparseSpdMatrix::Storage::InnerIterator it(s, i); it; ++it)
            if (it.row() != it.col() && it.value() > 0) return false;
    return true;
}

bool is_m_matrix(const Eigen::MatrixXd& a) {
    if (!is_z_matrix(a)) return false;
    if (a != a.transpose()) throw Error(ErrorKind::NotSymmetric, "M-matrix test needs a symmetric matrix");
    Eigen::LLT<Eigen::MatrixXd> llt(a);
    return llt.info() == Eigen::Success;
}

bool is_m_matrix(const SparseSpdMatrix& a) {
    return is_z_matrix(a) && a.is_positive_definite();
}

Eigen::MatrixXd dense_inverse(const Eigen::MatrixXd& a, int cap) {
    require_square(a);
    if (a.rows() > cap) {
        throw Error(ErrorKind::DimensionTooLarge,
                    "dense inverse capped at n = " + std::to_string(cap) + ", got " + std::to_string(a.rows()));
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
    if (!lu.isInvertible()) throw Error(ErrorKind::Singular, "matrix is singular");
    return lu.inverse();
}

bool is_monotone_dense(const Eigen::MatrixXd& a, int cap) {
    const Eigen::MatrixXd inv = dense_inverse(a, cap);
    const double tol = -1e-13 * inv.cwiseAbs().maxCoeff();
    return (inv.array() >= tol).all();
}

bool is_monotone_dense(const SparseSpdMatrix& a, int cap) {
    if (a.n() > cap) {
        throw Error(ErrorKind::DimensionTooLarge,
                    "dense inverse capped at n = " + std::to_string(cap) + ", got " + std::to_string(a.n()));
    }
    return is_monotone_dense(a.to_dense(), cap);
}

double gershgorin_bound(const SparseSpdMatrix& a) {
    double bound = 0.0;
    const auto& s = a.storage();
    for (int i = 0; i < s.outerSize(); ++i) {
        double row = 0.0;
        for (SparseSpdMatrix::Storage::InnerIterator it(s, i); it; ++it) row += std::abs(it.value());
        bound = std::max(bound, row);
    }
    return bound;
}

double tridiagonal_max_eigenvalue(const SparseSpdMatrix& a) {
    if (a.structure() != StructureTag::tridiagonal) {
        throw Error(ErrorKind::InvalidArgument, "Sturm bisection needs a tridiagonal matrix");
    }
    const Eigen::VectorXd d = a.diagonal();
    const Eigen::VectorXd e = a.sub_diagonal();
    const int n = a.n();
    double hi = gershgorin_bound(a);
    double lo = -hi;
    while (sturm_count(d, e, hi) < n) hi = std::nextafter(hi, std::numeric_limits<double>::infinity());
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (sturm_count(d, e, mid) < n) lo = mid; else hi = mid;
    }
    return hi;
}

NormalizedMatrix normalize(const SparseSpdMatrix& a, NormalizationBound bound) {
    if (!a.is_positive_definite()) throw Error(ErrorKind::NotPositiveDefinite, "matrix is not positive definite");
    NormalizedMatrix out;
    if (bound == NormalizationBound::exact && a.structure() == StructureTag::tridiagonal) {
        out.scale = tridiagonal_max_eigenvalue(a);
        out.spectral_bound_proof = SpectralBoundProof::exact_eigen;
    } else {
        out.scale = gershgorin_bound(a);
        out.spectral_bound_proof = SpectralBoundProof::gershgorin;
    }
    out.matrix = a.divided_by(out.scale);
    out.model = MatrixModel::general;
    return out;
}

}  // namespace bura

#pragma once

// Sparse SPD matrices, M-matrix / monotonicity checks and spectral
// normalization to (0, 1].

#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace bura {

enum class StructureTag { tridiagonal, general };
enum class SpectralBoundProof { gershgorin, exact_eigen, user_asserted };
enum class MatrixModel { general, laplacian_1d };

/// Symmetric sparse matrix; both triangles are stored. Immutable once built.
class SparseSpdMatrix {
public:
    using Storage = Eigen::SparseMatrix<double, Eigen::RowMajor, int>;

    SparseSpdMatrix() = default;

    /// Duplicate entries are summed. Throws Error(NotSymmetric) unless
    /// entry(i, j) == entry(j, i) exactly.
    static SparseSpdMatrix from_triplets(int n, const std::vector<Eigen::Triplet<double>>& entries);
    /// Symmetric tridiagonal matrix; `off` holds the n - 1 off-diagonal entries.
    static SparseSpdMatrix tridiagonal(const std::vector<double>& diag, const std::vector<double>& off);
    static SparseSpdMatrix identity(int n);

    int n() const { return static_cast<int>(storage_.rows()); }
    StructureTag structure() const { return structure_; }
    const Storage& storage() const { return storage_; }

    double entry(int i, int j) const { return storage_.coeff(i, j); }
    Eigen::VectorXd diagonal() const;
    /// Sub-diagonal entries a(i+1, i), i = 0 .. n-2.
    Eigen::VectorXd sub_diagonal() const;

    Eigen::VectorXd multiply(const Eigen::VectorXd& x) const { return storage_ * x; }
    Eigen::MatrixXd to_dense() const { return Eigen::MatrixXd(storage_); }
    SparseSpdMatrix scaled(double factor) const;
    SparseSpdMatrix divided_by(double divisor) const;

    /// Cholesky (LDL^T with positive pivots) succeeds.
    bool is_positive_definite() const;

private:
    Storage storage_;
    StructureTag structure_ = StructureTag::general;
};

/// A matrix with spectrum in (0, 1] together with the scale that maps it back:
/// original = scale * matrix.
struct NormalizedMatrix {
    SparseSpdMatrix matrix;
    double scale = 1.0;
    SpectralBoundProof spectral_bound_proof = SpectralBoundProof::user_asserted;
    MatrixModel model = MatrixModel::general;

    int n() const { return matrix.n(); }
};

/// tridiag(-1/4, 1/2, -1/4) of size n with scale 4 / h^2, h = 1 / (n + 1).
NormalizedMatrix laplacian_1d(int n);

/// sin^2(i pi / (2 (n + 1))), i = 1 .. n.
double laplacian_1d_eigenvalue(int n, int i);

bool is_z_matrix(const Eigen::MatrixXd& a);
bool is_z_matrix(const SparseSpdMatrix& a);

/// Z-matrix and (symmetric case) positive definite. A Z-matrix that is not
/// symmetric throws Error(NotSymmetric).
bool is_m_matrix(const Eigen::MatrixXd& a);
bool is_m_matrix(const SparseSpdMatrix& a);

inline constexpr int kDenseInverseCap = 2000;

/// A^{-1} >= -1e-13 max|A^{-1}| entrywise. Throws Error(Singular),
/// Error(DimensionTooLarge).
bool is_monotone_dense(const Eigen::MatrixXd& a, int cap = kDenseInverseCap);
bool is_monotone_dense(const SparseSpdMatrix& a, int cap = kDenseInverseCap);

/// Dense inverse with the same checks as is_monotone_dense.
Eigen::MatrixXd dense_inverse(const Eigen::MatrixXd& a, int cap = kDenseInverseCap);

enum class NormalizationBound { gershgorin, exact };

/// Upper bound on the largest eigenvalue: max row sum of |a_ij|, or Sturm
/// bisection for tridiagonal input.
double gershgorin_bound(const SparseSpdMatrix& a);
double tridiagonal_max_eigenvalue(const SparseSpdMatrix& a);

/// A / scale with scale an upper bound on the spectrum. Exact bounds are only
/// available for tridiagonal input; general input falls back to Gershgorin.
/// Throws Error(NotPositiveDefinite).
NormalizedMatrix normalize(const SparseSpdMatrix& a,
                           NormalizationBound bound = NormalizationBound::gershgorin);

/// Matrix Market coordinate reader (real/integer, symmetric or general with
/// symmetric content). Throws Error(Io) or Error(NotSymmetric).
SparseSpdMatrix read_matrix_market(std::istream& in);
SparseSpdMatrix read_matrix_market_file(const std::string& path);
void write_matrix_market(std::ostream& out, const SparseSpdMatrix& a);

/// Row-per-line CSV dump of a dense matrix, 17 significant digits.
void write_dense_csv(std::ostream& out, const Eigen::MatrixXd& a);

}  // namespace bura

#include <doctest.h>

#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "bura/error.hpp"
#include "bura/matrix.hpp"
#include "support.hpp"

using namespace bura;

namespace {

Eigen::MatrixXd a1() {
    Eigen::MatrixXd a(2, 2);
    a << -1, 3, 2, -4;
    return a;
}

SparseSpdMatrix second_difference(int n) {
    return SparseSpdMatrix::tridiagonal(std::vector<double>(n, 2.0), std::vector<double>(n - 1, -1.0));
}

}  // namespace

TEST_SUITE("matrix") {

TEST_CASE("model Laplacian") {
    const NormalizedMatrix l = laplacian_1d(3);
    CHECK(l.n() == 3);
    CHECK(l.scale == 64.0);
    CHECK(l.model == MatrixModel::laplacian_1d);
    CHECK(l.matrix.structure() == StructureTag::tridiagonal);
    CHECK(l.matrix.entry(0, 0) == 0.5);
    CHECK(l.matrix.entry(1, 0) == -0.25);
    CHECK(l.matrix.entry(0, 1) == -0.25);
    CHECK(l.matrix.entry(0, 2) == 0.0);
    CHECK(laplacian_1d_eigenvalue(3, 1) == doctest::Approx(0.14644660940672624).epsilon(1e-15));
    CHECK_THROWS_AS(laplacian_1d(0), Error);
}

TEST_CASE("analytic eigenvalues match a dense eigensolver") {
    for (int n : {1, 2, 17, 64, 200}) {
        const NormalizedMatrix l = laplacian_1d(n);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(l.matrix.to_dense());
        for (int i = 1; i <= n; ++i) CHECK(std::abs(es.eigenvalues()[i - 1] - laplacian_1d_eigenvalue(n, i)) < 1e-12);
        CHECK(es.eigenvalues()[n - 1] <= 1.0);
        CHECK(es.eigenvalues()[0] > 0.0);
    }
}

TEST_CASE("Z- and M-matrix verdicts") {
    CHECK_FALSE(is_z_matrix(a1()));
    CHECK_FALSE(is_m_matrix(a1()));
    CHECK(is_m_matrix(laplacian_1d(50).matrix));
    CHECK(is_m_matrix(Eigen::MatrixXd::Identity(4, 4)));
    CHECK(is_m_matrix(SparseSpdMatrix::identity(4)));
    CHECK(is_m_matrix(second_difference(30)));
    CHECK(is_m_matrix(normalize(second_difference(30)).matrix));

    Eigen::MatrixXd nonsym(2, 2);
    nonsym << 2, -1, -0.5, 2;
    CHECK(is_z_matrix(nonsym));
    CHECK_THROWS_AS(is_m_matrix(nonsym), Error);

    Eigen::MatrixXd indefinite(2, 2);
    indefinite << 1, -2, -2, 1;
    CHECK(is_z_matrix(indefinite));
    CHECK_FALSE(is_m_matrix(indefinite));
}

TEST_CASE("monotone but not an M-matrix, and a non-monotone sum") {
    const Eigen::MatrixXd inv = dense_inverse(a1());
    Eigen::MatrixXd expect(2, 2);
    expect << 2, 1.5, 1, 0.5;
    CHECK((inv - expect).cwiseAbs().maxCoeff() < 1e-15);
    CHECK(is_monotone_dense(a1()));

    const Eigen::MatrixXd six = 6 * Eigen::MatrixXd::Identity(2, 2);
    CHECK(is_monotone_dense(six));
    const Eigen::MatrixXd a2 = a1() + six;
    CHECK_FALSE(is_monotone_dense(a2));
    // direct inversion of [[5, 3], [2, 2]]
    const Eigen::MatrixXd inv2 = dense_inverse(a2);
    Eigen::MatrixXd expect2(2, 2);
    expect2 << 0.5, -0.75, -0.5, 1.25;
    CHECK((inv2 - expect2).cwiseAbs().maxCoeff() < 1e-15);
    CHECK((inv2.array() < 0).count() == 2);

    CHECK(is_monotone_dense(Eigen::MatrixXd::Identity(3, 3)));
    CHECK(is_monotone_dense(laplacian_1d(40).matrix));
}

TEST_CASE("monotonicity errors") {
    Eigen::MatrixXd singular(2, 2);
    singular << 1, 2, 2, 4;
    try {
        is_monotone_dense(singular);
        FAIL("expected Singular");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Singular);
    }
    try {
        is_monotone_dense(laplacian_1d(20).matrix, 10);
        FAIL("expected DimensionTooLarge");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::DimensionTooLarge);
    }
}

TEST_CASE("symmetry is enforced on construction") {
    std::vector<Eigen::Triplet<double>> t{{0, 0, 2.0}, {1, 1, 2.0}, {0, 1, -1.0}, {1, 0, -0.5}};
    try {
        SparseSpdMatrix::from_triplets(2, t);
        FAIL("expected NotSymmetric");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::NotSymmetric);
    }
    // duplicates are summed
    t.push_back({1, 0, -0.5});
    const SparseSpdMatrix a = SparseSpdMatrix::from_triplets(2, t);
    CHECK(a.entry(1, 0) == -1.0);
    CHECK_THROWS_AS(SparseSpdMatrix::from_triplets(2, {{2, 0, 1.0}}), Error);
}

TEST_CASE("normalization") {
    const NormalizedMatrix g = normalize(second_difference(40));
    CHECK(g.scale == 4.0);
    CHECK(g.spectral_bound_proof == SpectralBoundProof::gershgorin);
    CHECK(g.matrix.entry(3, 3) == 0.5);
    CHECK(g.matrix.entry(3, 4) == -0.25);

    const NormalizedMatrix id = normalize(SparseSpdMatrix::identity(5), NormalizationBound::exact);
    CHECK(id.scale == 1.0);
    CHECK(id.spectral_bound_proof == SpectralBoundProof::exact_eigen);

    const SparseSpdMatrix two = second_difference(2);
    CHECK(normalize(two).scale == 3.0);
    CHECK(normalize(two, NormalizationBound::exact).scale == doctest::Approx(3.0).epsilon(1e-15));

    try {
        normalize(SparseSpdMatrix::tridiagonal({-1.0, 1.0}, {0.0}));
        FAIL("expected NotPositiveDefinite");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::NotPositiveDefinite);
    }
}

TEST_CASE("property: exact bound is tight, Gershgorin bounds it") {
    testing::Gen gen(5);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = gen.integer(1, 60);
        std::vector<double> d(n), e(std::max(n - 1, 0));
        for (auto& x : e) x = -gen.uniform(0.0, 1.0);
        for (int i = 0; i < n; ++i) {
            d[i] = gen.uniform(0.01, 1.0) + (i > 0 ? -e[i - 1] : 0.0) + (i + 1 < n ? -e[i] : 0.0);
        }
        const SparseSpdMatrix a = SparseSpdMatrix::tridiagonal(d, e);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a.to_dense());
        const double top = es.eigenvalues()[n - 1];
        const double exact = tridiagonal_max_eigenvalue(a);
        CHECK(exact >= top * (1 - 1e-14));
        CHECK(exact <= top * (1 + 1e-13));
        CHECK(gershgorin_bound(a) >= exact * (1 - 1e-15));
        const NormalizedMatrix na = normalize(a, NormalizationBound::exact);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es2(na.matrix.to_dense());
        CHECK(es2.eigenvalues()[n - 1] <= 1.0 + 1e-14);
    }
}

TEST_CASE("property: normalization round trip and invariance") {
    testing::Gen gen(9);
    for (int trial = 0; trial < 10; ++trial) {
        const SparseSpdMatrix a = gen.m_matrix(gen.integer(2, 40), 0.2);
        const NormalizedMatrix na = normalize(a);
        CHECK(is_m_matrix(a) == is_m_matrix(na.matrix));
        CHECK(is_m_matrix(a));
        const Eigen::MatrixXd back = na.matrix.to_dense() * na.scale;
        const Eigen::MatrixXd orig = a.to_dense();
        for (Eigen::Index i = 0; i < orig.size(); ++i) {
            const double o = orig.data()[i];
            CHECK(std::abs(back.data()[i] - o) <= std::abs(o) * std::numeric_limits<double>::epsilon());
        }
        CHECK(is_monotone_dense(a));
    }
}

TEST_CASE("Matrix Market round trip") {
    testing::Gen gen(3);
    const SparseSpdMatrix a = gen.m_matrix(25, 0.15);
    std::stringstream buf;
    write_matrix_market(buf, a);
    const SparseSpdMatrix b = read_matrix_market(buf);
    CHECK(b.n() == 25);
    CHECK((a.to_dense() - b.to_dense()).cwiseAbs().maxCoeff() == 0.0);
    CHECK(b.structure() == a.structure());
}

TEST_CASE("Matrix Market parsing") {
    std::istringstream general(
        "%%MatrixMarket matrix coordinate real general\n% comment\n\n2 2 4\n1 1 2\n1 2 -1\n2 1 -1\n2 2 2\n");
    const SparseSpdMatrix g = read_matrix_market(general);
    CHECK(g.entry(0, 1) == -1.0);
    CHECK(g.structure() == StructureTag::tridiagonal);

    std::istringstream sym("%%MatrixMarket matrix coordinate integer symmetric\n3 3 4\n1 1 4\n2 1 -1\n2 2 4\n3 3 4\n");
    const SparseSpdMatrix s = read_matrix_market(sym);
    CHECK(s.entry(0, 1) == -1.0);
    CHECK(s.entry(2, 2) == 4.0);

    const auto io_error = [](const std::string& text) {
        std::istringstream in(text);
        try {
            read_matrix_market(in);
        } catch (const Error& e) {
            return e.kind();
        }
        return ErrorKind::InvalidArgument;
    };
    CHECK(io_error("") == ErrorKind::Io);
    CHECK(io_error("%%MatrixMarket matrix array real general\n2 2\n") == ErrorKind::Io);
    CHECK(io_error("%%MatrixMarket matrix coordinate complex general\n1 1 1\n1 1 1 0\n") == ErrorKind::Io);
    CHECK(io_error("%%MatrixMarket matrix coordinate real general\n2 3 1\n1 1 1\n") == ErrorKind::Io);
    CHECK(io_error("%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1\n") == ErrorKind::Io);
    CHECK(io_error("%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 1\n") == ErrorKind::Io);
    CHECK(io_error("%%MatrixMarket matrix coordinate real symmetric\n2 2 1\n1 2 1\n") == ErrorKind::Io);
    CHECK(io_error("%%MatrixMarket matrix coordinate real general\n2 2 1\n1 2 1\n") == ErrorKind::NotSymmetric);
    CHECK_THROWS_AS(read_matrix_market_file("/nonexistent/file.mtx"), Error);
}

TEST_CASE("dense CSV dump") {
    std::ostringstream out;
    write_dense_csv(out, dense_inverse(a1()));
    CHECK(out.str() == "2,1.5\n1,0.5\n");
}

}

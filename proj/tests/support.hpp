#pragma once

#include <cstdint>
#include <map>
#include <mutex>
#include <random>
#include <tuple>
#include <vector>

#include <Eigen/Dense>

#include "bura/matrix.hpp"
#include "bura/rational.hpp"

namespace testing {

// Seeded generators for the property tests.
class Gen {
public:
    explicit Gen(std::uint64_t seed) : rng_(seed) {}

    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
    int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }

    Eigen::VectorXd normal_vector(int n) {
        std::normal_distribution<double> d;
        Eigen::VectorXd v(n);
        for (auto& x : v) x = d(rng_);
        return v;
    }

    Eigen::VectorXd nonnegative_vector(int n) {
        Eigen::VectorXd v(n);
        for (auto& x : v) x = uniform(0.0, 1.0) < 0.3 ? 0.0 : uniform(0.0, 1.0);
        return v;
    }

    // Symmetric, strictly diagonally dominant, non-positive off-diagonal:
    // an SPD M-matrix with a random sparsity pattern.
    bura::SparseSpdMatrix m_matrix(int n, double density) {
        std::vector<Eigen::Triplet<double>> t;
        std::vector<double> row(n, 0.0);
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < i; ++j) {
                if (uniform(0, 1) >= density && j != i - 1) continue;
                const double v = -uniform(0.1, 1.0);
                t.emplace_back(i, j, v);
                t.emplace_back(j, i, v);
                row[i] -= v;
                row[j] -= v;
            }
        }
        for (int i = 0; i < n; ++i) t.emplace_back(i, i, row[i] + uniform(0.01, 0.5));
        return bura::SparseSpdMatrix::from_triplets(n, t);
    }

private:
    std::mt19937_64 rng_;
};

struct Approx {
    bura::RationalApprox r;
    bura::PartialFractionForm pf;
    bura::CoefficientSet set;
};

// One computation per parameter set for the whole test binary.
inline const Approx& bura_of(double alpha, int k, int m = -1, int beta = 1) {
    static std::mutex mu;
    static std::map<std::tuple<double, int, int, int>, Approx> cache;
    if (m < 0) m = k;
    std::lock_guard<std::mutex> lock(mu);
    const auto key = std::make_tuple(alpha, k, m, beta);
    auto it = cache.find(key);
    if (it == cache.end()) {
        Approx a;
        a.r = bura::bura_compute({alpha, beta, m, k});
        a.pf = bura::partial_fractions(a.r);
        a.set = bura::make_coefficient_set(a.r, a.pf);
        it = cache.emplace(key, std::move(a)).first;
    }
    return it->second;
}

inline double rel_diff(double a, double b) { return std::abs(a - b) / std::max(std::abs(a), std::abs(b)); }

inline constexpr double kAlphas[] = {0.25, 0.5, 0.75};
inline constexpr int kKs[] = {5, 6, 7};

}  // namespace testing

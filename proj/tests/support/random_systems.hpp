#pragma once

// Random LTI systems with built-in sensor types, used by the property tests.
//
// The state is z = Q^T x with z = (z1, z2) evolving under blockdiag(A1, A2).
// A "full" sensor sees both blocks, a "block1"/"block2" sensor only one, so
// sensors of the same kind share an observable subspace and are equivalent.

#include "fsse/system_model.hpp"

#include <random>

namespace fsse::testing {

enum class SensorKind { full, block1, block2 };

inline Matrix random_orthogonal(std::mt19937_64& rng, int n) {
    std::normal_distribution<double> g(0.0, 1.0);
    Matrix m(n, n);
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) m(r, c) = g(rng);
    Eigen::HouseholderQR<Matrix> qr(m);
    return qr.householderQ() * Matrix::Identity(n, n);
}

struct RandomSystem {
    SystemModel model;
    std::vector<SensorKind> kinds;
};

/// n = n1 + n2 states, one input, tau = n. Spectra of the blocks are kept
/// apart (radius 0.9 vs 1.05) so full sensors observe the whole state.
inline RandomSystem random_block_system(std::mt19937_64& rng, int n1, int n2,
                                        std::vector<SensorKind> kinds, int s_max) {
    const int n = n1 + n2;
    std::normal_distribution<double> g(0.0, 1.0);
    Matrix blk = Matrix::Zero(n, n);
    blk.topLeftCorner(n1, n1) = 0.9 * random_orthogonal(rng, n1);
    if (n2 > 0) {
        blk.bottomRightCorner(n2, n2) = 1.05 * random_orthogonal(rng, n2);
    }
    const Matrix Q = random_orthogonal(rng, n);
    const Matrix A = Q * blk * Q.transpose();
    Matrix B(n, 1);
    for (int r = 0; r < n; ++r) B(r, 0) = g(rng);

    Matrix C(static_cast<Eigen::Index>(kinds.size()), n);
    for (std::size_t i = 0; i < kinds.size(); ++i) {
        Vector cz = Vector::Zero(n);
        for (int k = 0; k < n; ++k) {
            const bool in_block1 = k < n1;
            const bool keep = kinds[i] == SensorKind::full ||
                              (kinds[i] == SensorKind::block1 && in_block1) ||
                              (kinds[i] == SensorKind::block2 && !in_block1);
            cz(k) = keep ? g(rng) : 0.0;
        }
        C.row(static_cast<Eigen::Index>(i)) = (Q * cz).transpose();
    }
    return {SystemModel(A, B, C, n, s_max), std::move(kinds)};
}

/// Random sensor mix of size p with at least two sensors of one kind.
inline std::vector<SensorKind> random_kinds(std::mt19937_64& rng, std::size_t p) {
    std::uniform_int_distribution<int> pick(0, 2);
    while (true) {
        std::vector<SensorKind> kinds(p);
        int count[3] = {0, 0, 0};
        for (auto& k : kinds) {
            const int v = pick(rng);
            k = static_cast<SensorKind>(v);
            ++count[v];
        }
        if (count[0] >= 2 || count[1] >= 2 || count[2] >= 2) {
            return kinds;
        }
    }
}

/// Uniform draw from the ball of radius r in R^q.
inline Vector uniform_ball(std::mt19937_64& rng, int q, double r) {
    std::normal_distribution<double> g(0.0, 1.0);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Vector v(q);
    for (int k = 0; k < q; ++k) v(k) = g(rng);
    return v * (r * std::pow(u(rng), 1.0 / q) / v.norm());
}

} // namespace fsse::testing

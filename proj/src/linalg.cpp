#include "fsse/linalg.hpp"

namespace fsse::linalg {

namespace {

Eigen::VectorXd singular_values(const Matrix& m) {
    if (m.size() == 0) {
        return Eigen::VectorXd();
    }
    return Eigen::JacobiSVD<Matrix>(m).singularValues();
}

} // namespace

int numerical_rank(const Matrix& m, double rel_tol) {
    const Eigen::VectorXd sv = singular_values(m);
    if (sv.size() == 0 || sv(0) == 0.0) {
        return 0;
    }
    const double cutoff = rel_tol * sv(0);
    int rank = 0;
    for (Eigen::Index k = 0; k < sv.size(); ++k) {
        if (sv(k) > cutoff) {
            ++rank;
        }
    }
    return rank;
}

double sigma_max(const Matrix& m) {
    const Eigen::VectorXd sv = singular_values(m);
    return sv.size() == 0 ? 0.0 : sv(0);
}

double sigma_min(const Matrix& m) {
    // Smallest of the min(rows, cols) singular values; a wide matrix
    // (rows < cols) has a nontrivial null space and so sigma_min = 0.
    if (m.rows() < m.cols()) {
        return 0.0;
    }
    const Eigen::VectorXd sv = singular_values(m);
    return sv.size() == 0 ? 0.0 : sv(sv.size() - 1);
}

Matrix pseudo_inverse(const Matrix& m, double rel_tol) {
    if (m.size() == 0) {
        return Matrix::Zero(m.cols(), m.rows());
    }
    Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd& sv = svd.singularValues();
    const double cutoff = rel_tol * sv(0);
    Eigen::VectorXd inv = Eigen::VectorXd::Zero(sv.size());
    for (Eigen::Index k = 0; k < sv.size(); ++k) {
        if (sv(k) > cutoff) {
            inv(k) = 1.0 / sv(k);
        }
    }
    return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

} // namespace fsse::linalg

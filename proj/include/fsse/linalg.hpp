#pragma once

#include "fsse/types.hpp"

namespace fsse::linalg {

/// Numerical rank: singular values below rel_tol * sigma_max count as zero.
int numerical_rank(const Matrix& m, double rel_tol = 1e-10);

double sigma_max(const Matrix& m);
double sigma_min(const Matrix& m);

/// Moore-Penrose pseudo-inverse with relative singular-value cutoff.
Matrix pseudo_inverse(const Matrix& m, double rel_tol = 1e-10);

} // namespace fsse::linalg

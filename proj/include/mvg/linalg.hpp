#pragma once

#include <utility>

#include "mvg/tensor.hpp"

namespace mvg::linalg {

// Cyclic Jacobi eigendecomposition of a symmetric matrix. Returns
// (eigenvalues descending, eigenvectors as columns, aligned with values).
// Deterministic: fixed sweep order, fixed convergence rule.
std::pair<Tensor, Tensor> sym_eig(const Tensor& a);

Tensor identity(std::size_t n);
Tensor mat_vec(const Tensor& a, const Tensor& x);
double off_diag_norm(const Tensor& a);

// Largest absolute asymmetry |A - A^T|_max.
double asymmetry(const Tensor& a);

} // namespace mvg::linalg

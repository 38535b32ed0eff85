// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "denslift/density_ops.hpp"

namespace denslift {

using Matrix = std::vector<std::vector<Scalar>>;

/// Reduced row echelon form over the scalar field.
struct RowEchelon {
  Matrix rows;               // nonzero rows only
  std::vector<std::size_t> pivots;
};

RowEchelon row_reduce(Matrix m, std::size_t cols);
std::size_t rank(const Matrix& m, std::size_t cols);
/// Basis of {v : m v = 0}.
std::vector<std::vector<Scalar>> nullspace(const Matrix& m, std::size_t cols);
/// One solution of m v = rhs, or nullopt if the system is inconsistent.
std::optional<std::vector<Scalar>> solve(const Matrix& m, const std::vector<Scalar>& rhs, std::size_t cols);

/// Reads "expr = 0" for every coefficient of `op` as a linear equation in
/// `params`. Each row is [coef(param_1), ..., coef(param_k), constant].
/// Duplicate rows are dropped.
Matrix linear_equations(const DensityOperator& op, const std::vector<std::string>& params);
Matrix linear_equations(const DiffPolynomial& p, const std::vector<std::string>& params);

}  // namespace denslift

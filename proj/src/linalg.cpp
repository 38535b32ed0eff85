// SPDX-License-Identifier: Apache-2.0
#include "denslift/linalg.hpp"

#include <algorithm>

#include "denslift/errors.hpp"

namespace denslift {

RowEchelon row_reduce(Matrix m, std::size_t cols) {
  RowEchelon out;
  std::size_t row = 0;
  for (std::size_t col = 0; col < cols && row < m.size(); ++col) {
    std::size_t piv = row;
    while (piv < m.size() && m[piv][col].is_zero()) ++piv;
    if (piv == m.size()) continue;
    std::swap(m[row], m[piv]);
    const Scalar inv = m[row][col].inverse();
    for (auto& v : m[row]) v *= inv;
    for (std::size_t r = 0; r < m.size(); ++r) {
      if (r == row || m[r][col].is_zero()) continue;
      const Scalar f = m[r][col];
      for (std::size_t c = col; c < m[r].size(); ++c)
        if (!m[row][c].is_zero()) m[r][c] -= f * m[row][c];
    }
    out.pivots.push_back(col);
    ++row;
  }
  m.resize(row);
  out.rows = std::move(m);
  return out;
}

std::size_t rank(const Matrix& m, std::size_t cols) { return row_reduce(m, cols).pivots.size(); }

std::vector<std::vector<Scalar>> nullspace(const Matrix& m, std::size_t cols) {
  RowEchelon e = row_reduce(m, cols);
  std::vector<bool> is_pivot(cols, false);
  for (auto p : e.pivots) is_pivot[p] = true;
  std::vector<std::vector<Scalar>> basis;
  for (std::size_t free = 0; free < cols; ++free) {
    if (is_pivot[free]) continue;
    std::vector<Scalar> v(cols);
    v[free] = Scalar(1);
    for (std::size_t r = 0; r < e.pivots.size(); ++r) v[e.pivots[r]] = -e.rows[r][free];
    basis.push_back(std::move(v));
  }
  return basis;
}

std::optional<std::vector<Scalar>> solve(const Matrix& m, const std::vector<Scalar>& rhs, std::size_t cols) {
  Matrix aug = m;
  for (std::size_t r = 0; r < aug.size(); ++r) {
    aug[r].resize(cols);
    aug[r].push_back(rhs.at(r));
  }
  RowEchelon e = row_reduce(aug, cols + 1);
  if (!e.pivots.empty() && e.pivots.back() == cols) return std::nullopt;
  std::vector<Scalar> v(cols);
  for (std::size_t r = 0; r < e.pivots.size(); ++r) v[e.pivots[r]] = e.rows[r][cols];
  return v;
}

namespace {

void push_equation(Matrix& out, const Scalar& c, const std::vector<std::uint32_t>& ids) {
  std::vector<Scalar> row;
  std::map<std::uint32_t, Scalar> zero;
  for (auto id : ids) {
    if (c.degree_in(id) > 1) throw NotExact("equation is not linear in the parameters");
    row.push_back(c.coefficient(id, 1));
    zero.emplace(id, Scalar());
  }
  row.push_back(c.substitute(zero));
  if (std::all_of(row.begin(), row.end(), [](const Scalar& s) { return s.is_zero(); })) return;
  if (std::find(out.begin(), out.end(), row) == out.end()) out.push_back(std::move(row));
}

std::vector<std::uint32_t> ids_of(const std::vector<std::string>& params) {
  std::vector<std::uint32_t> ids;
  for (const auto& p : params) ids.push_back(ParamRegistry::instance().id(p));
  return ids;
}

}  // namespace

Matrix linear_equations(const DiffPolynomial& p, const std::vector<std::string>& params) {
  const auto ids = ids_of(params);
  Matrix out;
  for (const auto& [m, c] : p.terms()) push_equation(out, c, ids);
  return out;
}

Matrix linear_equations(const DensityOperator& op, const std::vector<std::string>& params) {
  const auto ids = ids_of(params);
  Matrix out;
  for (const auto& [k, poly] : op.terms())
    for (const auto& [m, c] : poly.terms()) push_equation(out, c, ids);
  return out;
}

}  // namespace denslift

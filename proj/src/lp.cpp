#include "perdec/lp.hpp"

#include <cmath>
#include <limits>

#include "perdec/error.hpp"

namespace perdec {

namespace {

using Row = std::vector<double>;

class Tableau {
 public:
  Tableau(std::vector<Row> rows, std::vector<std::size_t> basis, double tol)
      : rows_(std::move(rows)), basis_(std::move(basis)), tol_(tol) {}

  std::size_t num_rows() const { return rows_.size(); }
  std::size_t num_cols() const { return rows_.empty() ? 0 : rows_.front().size() - 1; }
  double rhs(std::size_t i) const { return rows_[i].back(); }
  double at(std::size_t i, std::size_t j) const { return rows_[i][j]; }
  std::size_t basic(std::size_t i) const { return basis_[i]; }

  void pivot(std::size_t r, std::size_t c) {
    const double p = rows_[r][c];
    for (double& v : rows_[r]) v /= p;
    for (std::size_t i = 0; i < rows_.size(); ++i) {
      if (i == r) continue;
      const double f = rows_[i][c];
      if (f == 0.0) continue;
      for (std::size_t j = 0; j < rows_[i].size(); ++j) rows_[i][j] -= f * rows_[r][j];
      rows_[i][c] = 0.0;
    }
    basis_[r] = c;
    ++pivots_;
  }

  // Maximizes cost.x over columns with allowed[j]; returns false if unbounded.
  bool optimize(const Row& cost, const std::vector<bool>& allowed) {
    const std::size_t n = num_cols();
    for (;;) {
      // Bland: lowest-index column with positive reduced cost enters.
      std::size_t enter = n;
      for (std::size_t j = 0; j < n && enter == n; ++j) {
        if (!allowed[j]) continue;
        double reduced = cost[j];
        for (std::size_t i = 0; i < rows_.size(); ++i) reduced -= cost[basis_[i]] * rows_[i][j];
        if (reduced > tol_) enter = j;
      }
      if (enter == n) return true;
      // Ratio test; ties go to the lowest basic index.
      std::size_t leave = rows_.size();
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < rows_.size(); ++i) {
        const double a = rows_[i][enter];
        if (a <= tol_) continue;
        const double ratio = rows_[i].back() / a;
        if (ratio < best - tol_ || (std::abs(ratio - best) <= tol_ && basis_[i] < basis_[leave])) {
          best = ratio;
          leave = i;
        }
      }
      if (leave == rows_.size()) return false;
      pivot(leave, enter);
    }
  }

  double objective(const Row& cost) const {
    double v = 0.0;
    for (std::size_t i = 0; i < rows_.size(); ++i) v += cost[basis_[i]] * rows_[i].back();
    return v;
  }

  std::size_t pivots() const { return pivots_; }

 private:
  std::vector<Row> rows_;
  std::vector<std::size_t> basis_;
  double tol_;
  std::size_t pivots_ = 0;
};

}  // namespace

LpSolution solve_lp(const LinearProgram& lp, double tol) {
  const std::size_t n = lp.objective.size();
  if (n == 0) throw Error("lp", "objective has no variables");
  if (lp.eq_rows.size() != lp.eq_rhs.size() || lp.le_rows.size() != lp.le_rhs.size() ||
      lp.ge_rows.size() != lp.ge_rhs.size())
    throw Error("lp", "row and right-hand side counts differ");

  struct Constraint {
    const Row* coeffs;
    double rhs;
    int kind;  // 0 eq, 1 le, 2 ge
  };
  std::vector<Constraint> cons;
  for (std::size_t i = 0; i < lp.eq_rows.size(); ++i) cons.push_back({&lp.eq_rows[i], lp.eq_rhs[i], 0});
  for (std::size_t i = 0; i < lp.le_rows.size(); ++i) cons.push_back({&lp.le_rows[i], lp.le_rhs[i], 1});
  for (std::size_t i = 0; i < lp.ge_rows.size(); ++i) cons.push_back({&lp.ge_rows[i], lp.ge_rhs[i], 2});
  for (const auto& c : cons)
    if (c.coeffs->size() != n) throw Error("lp", "constraint row has the wrong length");

  std::size_t slacks = 0;
  for (const auto& c : cons) slacks += c.kind != 0;
  const std::size_t m = cons.size(), art0 = n + slacks, cols = art0 + m;

  // Columns: original, slack/surplus, one artificial per row.
  std::vector<Row> rows(m, Row(cols + 1, 0.0));
  std::vector<std::size_t> basis(m);
  std::size_t s = n;
  for (std::size_t i = 0; i < m; ++i) {
    Row& r = rows[i];
    for (std::size_t j = 0; j < n; ++j) r[j] = (*cons[i].coeffs)[j];
    if (cons[i].kind == 1) r[s++] = 1.0;
    if (cons[i].kind == 2) r[s++] = -1.0;
    r[cols] = cons[i].rhs;
    if (r[cols] < 0.0)
      for (double& v : r) v = -v;
    r[art0 + i] = 1.0;
    basis[i] = art0 + i;
  }
  Tableau t(std::move(rows), std::move(basis), tol);

  LpSolution out;
  Row phase1(cols, 0.0);
  for (std::size_t j = art0; j < cols; ++j) phase1[j] = -1.0;
  t.optimize(phase1, std::vector<bool>(cols, true));
  if (t.objective(phase1) < -tol * std::max<double>(1.0, static_cast<double>(m))) {
    out.status = LpStatus::kInfeasible;
    out.pivots = t.pivots();
    return out;
  }
  // Drive zero-level artificials out of the basis where possible; rows
  // that cannot pivot are redundant and stay inert.
  for (std::size_t i = 0; i < m; ++i) {
    if (t.basic(i) < art0) continue;
    for (std::size_t j = 0; j < art0; ++j)
      if (std::abs(t.at(i, j)) > tol) {
        t.pivot(i, j);
        break;
      }
  }

  Row phase2(cols, 0.0);
  for (std::size_t j = 0; j < n; ++j) phase2[j] = lp.objective[j];
  std::vector<bool> allowed(cols, true);
  for (std::size_t j = art0; j < cols; ++j) allowed[j] = false;
  if (!t.optimize(phase2, allowed)) {
    out.status = LpStatus::kUnbounded;
    out.pivots = t.pivots();
    return out;
  }
  out.status = LpStatus::kOptimal;
  out.x.assign(n, 0.0);
  for (std::size_t i = 0; i < m; ++i)
    if (t.basic(i) < n) out.x[t.basic(i)] = t.rhs(i);
  out.value = 0.0;
  for (std::size_t j = 0; j < n; ++j) out.value += lp.objective[j] * out.x[j];
  out.pivots = t.pivots();
  return out;
}

}  // namespace perdec

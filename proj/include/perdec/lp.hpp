#pragma once

#include <cstddef>
#include <vector>

namespace perdec {

// maximize c.x subject to the listed rows and x >= 0.
struct LinearProgram {
  std::vector<double> objective;
  std::vector<std::vector<double>> eq_rows;
  std::vector<double> eq_rhs;
  std::vector<std::vector<double>> le_rows;
  std::vector<double> le_rhs;
  std::vector<std::vector<double>> ge_rows;
  std::vector<double> ge_rhs;
};

enum class LpStatus { kOptimal, kInfeasible, kUnbounded };

struct LpSolution {
  LpStatus status = LpStatus::kInfeasible;
  double value = 0.0;
  std::vector<double> x;
  std::size_t pivots = 0;
};

// Dense two-phase tableau simplex with Bland's rule.
LpSolution solve_lp(const LinearProgram& lp, double tolerance = 1e-9);

}  // namespace perdec

#pragma once

// Shared between the LP unit suite and the acceptance suite: a
// vertex-enumeration oracle for bounded-variable LPs, the strong-duality
// checker, and the seeded random-LP generator.

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "netlife/lp.hpp"
#include "netlife/rng.hpp"

namespace lporacle {

using netlife::kInf;
using netlife::LinearProgram;
using netlife::LpSolution;
using netlife::LpStatus;
using netlife::Relation;
using netlife::Stream;

// ---------------------------------------------------------------------------
// Independent oracle: enumerate every basic point of an LP whose variables
// all have finite bounds. A vertex is a solution of n active constraints
// chosen among rows (as equalities) and bounds (lower or upper). Complete for
// bounded-variable LPs, so "no feasible vertex" == infeasible.
// ---------------------------------------------------------------------------

inline bool gauss_solve(std::vector<std::vector<double>> a, std::vector<double>& b) {
  const int n = static_cast<int>(b.size());
  for (int k = 0; k < n; ++k) {
    int p = k;
    for (int i = k + 1; i < n; ++i)
      if (std::fabs(a[i][k]) > std::fabs(a[p][k])) p = i;
    if (std::fabs(a[p][k]) < 1e-11) return false;
    std::swap(a[p], a[k]);
    std::swap(b[p], b[k]);
    for (int i = k + 1; i < n; ++i) {
      const double f = a[i][k] / a[k][k];
      if (f == 0.0) continue;
      for (int j = k; j < n; ++j) a[i][j] -= f * a[k][j];
      b[i] -= f * b[k];
    }
  }
  for (int i = n - 1; i >= 0; --i) {
    for (int j = i + 1; j < n; ++j) b[i] -= a[i][j] * b[j];
    b[i] /= a[i][i];
  }
  return true;
}

inline bool feasible_point(const LinearProgram& lp, const std::vector<double>& x,
                    double tol) {
  for (int j = 0; j < lp.num_vars(); ++j)
    if (x[j] < lp.lower()[j] - tol || x[j] > lp.upper()[j] + tol) return false;
  for (int i = 0; i < lp.num_rows(); ++i) {
    double lhs = 0.0;
    for (int j = 0; j < lp.num_vars(); ++j) lhs += lp.row(i)[j] * x[j];
    const double b = lp.rhs(i);
    switch (lp.relation(i)) {
      case Relation::LessEq:
        if (lhs > b + tol) return false;
        break;
      case Relation::GreaterEq:
        if (lhs < b - tol) return false;
        break;
      case Relation::Equal:
        if (std::fabs(lhs - b) > tol) return false;
        break;
    }
  }
  return true;
}

inline std::optional<double> brute_force_optimum(const LinearProgram& lp,
                                          double tol = 1e-7) {
  const int n = lp.num_vars();
  const int m = lp.num_rows();
  std::optional<double> best;

  // rows_pick: bitmask over rows; remaining active constraints are bounds.
  for (int rows_pick = 0; rows_pick < (1 << m); ++rows_pick) {
    const int k = __builtin_popcount(static_cast<unsigned>(rows_pick));
    if (k > n) continue;
    std::vector<int> rows;
    for (int i = 0; i < m; ++i)
      if (rows_pick & (1 << i)) rows.push_back(i);
    const int nb = n - k;  // variables pinned to a bound
    for (int vars_pick = 0; vars_pick < (1 << n); ++vars_pick) {
      if (__builtin_popcount(static_cast<unsigned>(vars_pick)) != nb) continue;
      std::vector<int> pinned, free_vars;
      for (int j = 0; j < n; ++j)
        (vars_pick & (1 << j) ? pinned : free_vars).push_back(j);
      for (int sides = 0; sides < (1 << nb); ++sides) {
        std::vector<double> x(n, 0.0);
        for (int t = 0; t < nb; ++t)
          x[pinned[t]] = (sides & (1 << t)) ? lp.upper()[pinned[t]]
                                            : lp.lower()[pinned[t]];
        if (k > 0) {
          std::vector<std::vector<double>> a(k, std::vector<double>(k));
          std::vector<double> b(k);
          for (int r = 0; r < k; ++r) {
            const auto& row = lp.row(rows[r]);
            double rhs = lp.rhs(rows[r]);
            for (int t = 0; t < nb; ++t) rhs -= row[pinned[t]] * x[pinned[t]];
            for (int c = 0; c < k; ++c) a[r][c] = row[free_vars[c]];
            b[r] = rhs;
          }
          if (!gauss_solve(a, b)) continue;
          for (int c = 0; c < k; ++c) x[free_vars[c]] = b[c];
        }
        if (!feasible_point(lp, x, tol)) continue;
        double obj = 0.0;
        for (int j = 0; j < n; ++j) obj += lp.cost()[j] * x[j];
        if (!best || obj < *best) best = obj;
      }
    }
  }
  return best;
}

// Dual objective for min c'x, rows R b, l <= x <= u, from the row duals and
// reduced costs; equals the primal objective at an optimum (strong duality).
inline double dual_objective(const LinearProgram& lp, const LpSolution& sol) {
  double v = 0.0;
  for (int i = 0; i < lp.num_rows(); ++i) v += sol.duals[i] * lp.rhs(i);
  for (int j = 0; j < lp.num_vars(); ++j) {
    const double d = sol.reduced_costs[j];
    if (d > 1e-7)
      v += d * lp.lower()[j];
    else if (d < -1e-7)
      v += d * lp.upper()[j];
  }
  return v;
}

// Strong duality and complementary slackness as predicates (no test
// framework dependency). Returns true when both hold at the stated
// tolerances.
inline bool duality_holds(const LinearProgram& lp, const LpSolution& sol) {
  if (sol.status != LpStatus::Optimal) return false;
  const double dv = dual_objective(lp, sol);
  if (std::fabs(dv - sol.objective) >
      1e-6 * (1.0 + std::fabs(sol.objective)))
    return false;
  for (int i = 0; i < lp.num_rows(); ++i) {
    double lhs = 0.0;
    for (int j = 0; j < lp.num_vars(); ++j) lhs += lp.row(i)[j] * sol.x[j];
    const double slack = lhs - lp.rhs(i);
    if (std::fabs(sol.duals[i] * slack) >
        1e-6 * (1.0 + std::fabs(lp.rhs(i))) * (1.0 + std::fabs(sol.duals[i])))
      return false;
  }
  return true;
}

inline LinearProgram random_lp(Stream& rng) {
  LinearProgram lp;
  const int n = 2 + static_cast<int>(rng.below(5));  // 2..6
  const int m = 1 + static_cast<int>(rng.below(8));  // 1..8
  for (int j = 0; j < n; ++j)
    lp.add_variable("x" + std::to_string(j), 0.0, 0.5 + 9.5 * rng.uniform(),
                    -5.0 + 10.0 * rng.uniform());
  for (int i = 0; i < m; ++i) {
    std::vector<std::pair<int, double>> coeffs;
    for (int j = 0; j < n; ++j) {
      if (rng.uniform() < 0.25) continue;
      coeffs.push_back({j, -5.0 + 10.0 * rng.uniform()});
    }
    if (coeffs.empty()) coeffs.push_back({0, 1.0});
    const double r = rng.uniform();
    const Relation rel = r < 0.5    ? Relation::LessEq
                         : r < 0.8  ? Relation::GreaterEq
                                    : Relation::Equal;
    lp.add_row(coeffs, rel, -6.0 + 12.0 * rng.uniform());
  }
  return lp;
}

}  // namespace lporacle

#pragma once

#include <limits>
#include <string>
#include <vector>

#include "netlife/pwl.hpp"

namespace netlife {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Solver tolerances. Feasibility and reduced-cost tests are applied on the
// equilibrated (scaled) data.
constexpr double kFeasTol = 1e-8;
constexpr double kOptTol = 1e-9;
constexpr double kPivotTol = 1e-10;

enum class Relation { LessEq, Equal, GreaterEq };

enum class LpStatus { Optimal, Infeasible, Unbounded };

// Dense linear program, minimization form. Add all variables before rows;
// every row must have exactly one coefficient slot per variable.
class LinearProgram {
 public:
  int add_variable(std::string name, double lo, double up, double cost = 0.0);
  void set_cost(int var, double cost) { cost_[var] = cost; }
  void add_cost(int var, double cost) { cost_[var] += cost; }
  void set_bounds(int var, double lo, double up);

  // Sparse row input; coefficients on unspecified variables are zero.
  int add_row(const std::vector<std::pair<int, double>>& coeffs, Relation rel,
              double rhs);

  int num_vars() const { return static_cast<int>(cost_.size()); }
  int num_rows() const { return static_cast<int>(rhs_.size()); }

  const std::vector<double>& cost() const { return cost_; }
  const std::vector<double>& lower() const { return lo_; }
  const std::vector<double>& upper() const { return up_; }
  const std::vector<double>& row(int i) const { return rows_[i]; }
  Relation relation(int i) const { return rel_[i]; }
  double rhs(int i) const { return rhs_[i]; }
  const std::string& name(int j) const { return names_[j]; }

  // Throws ConfigError on inconsistent widths or crossed bounds.
  void validate() const;

 private:
  std::vector<std::string> names_;
  std::vector<double> lo_, up_, cost_;
  std::vector<std::vector<double>> rows_;
  std::vector<Relation> rel_;
  std::vector<double> rhs_;
};

struct LpSolution {
  LpStatus status = LpStatus::Optimal;
  std::vector<double> x;          // primal values (structural variables)
  double objective = 0.0;
  std::vector<double> duals;      // one multiplier per row
  std::vector<double> reduced_costs;  // per structural variable
  int iterations = 0;
};

// Deterministic dense two-phase simplex with native variable bounds and
// Bland's anti-cycling rule (entering: lowest eligible index; leaving: lowest
// basic index among ratio ties). Infeasible/Unbounded are reported as
// statuses; a pivot breakdown throws NumericalError.
LpSolution solve_lp(const LinearProgram& lp);

// Epigraph encoding of a concave non-decreasing piecewise-linear utility:
// adds a variable u_val and one <=-row per segment such that maximizing
// u_val yields exactly u(var) at the optimum. `cap` bounds the argument from
// above (used to give u_val a finite implied upper bound); pass the
// argument's upper bound. Returns the index of u_val.
int encode_pwl_utility(const PiecewiseLinearConcave& u, int var, double cap,
                       LinearProgram* lp);

// Human-readable dump, one constraint per line. Layout is not normative.
std::string dump_lp(const LinearProgram& lp);

}  // namespace netlife

#include "netlife/lp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "netlife/errors.hpp"

namespace netlife {

int LinearProgram::add_variable(std::string name, double lo, double up,
                                double cost) {
  if (lo > up) throw ConfigError("variable " + name + ": lower > upper");
  names_.push_back(std::move(name));
  lo_.push_back(lo);
  up_.push_back(up);
  cost_.push_back(cost);
  for (auto& row : rows_) row.push_back(0.0);  // widen existing rows
  return static_cast<int>(cost_.size()) - 1;
}

void LinearProgram::set_bounds(int var, double lo, double up) {
  if (lo > up) throw ConfigError("variable " + names_[var] + ": lower > upper");
  lo_[var] = lo;
  up_[var] = up;
}

int LinearProgram::add_row(const std::vector<std::pair<int, double>>& coeffs,
                           Relation rel, double rhs) {
  std::vector<double> row(cost_.size(), 0.0);
  for (const auto& [j, v] : coeffs) {
    if (j < 0 || j >= num_vars())
      throw ConfigError("row references unknown variable");
    row[j] += v;
  }
  rows_.push_back(std::move(row));
  rel_.push_back(rel);
  rhs_.push_back(rhs);
  return static_cast<int>(rhs_.size()) - 1;
}

void LinearProgram::validate() const {
  for (const auto& row : rows_)
    if (row.size() != cost_.size())
      throw ConfigError("row width does not match variable count");
  for (int j = 0; j < num_vars(); ++j)
    if (lo_[j] > up_[j]) throw ConfigError("crossed bounds on " + names_[j]);
}

namespace {

enum class VarState : unsigned char { Basic, AtLower, AtUpper, FreeZero, Fixed };

double pow2_round(double s) {
  if (!(s > 0.0) || !std::isfinite(s)) return 1.0;
  return std::exp2(std::round(std::log2(s)));
}

// Dense LU with partial pivoting, used to rebuild the tableau exactly from
// the current basis (periodically and at phase changes).
struct Lu {
  int m = 0;
  std::vector<double> a;  // row-major m x m
  std::vector<int> perm;

  bool factor() {
    perm.resize(m);
    for (int i = 0; i < m; ++i) perm[i] = i;
    for (int k = 0; k < m; ++k) {
      int p = k;
      double best = std::fabs(a[static_cast<std::size_t>(k) * m + k]);
      for (int i = k + 1; i < m; ++i) {
        const double v = std::fabs(a[static_cast<std::size_t>(i) * m + k]);
        if (v > best) {
          best = v;
          p = i;
        }
      }
      if (best < 1e-12) return false;
      if (p != k) {
        for (int j = 0; j < m; ++j)
          std::swap(a[static_cast<std::size_t>(k) * m + j],
                    a[static_cast<std::size_t>(p) * m + j]);
        std::swap(perm[k], perm[p]);
      }
      const double inv = 1.0 / a[static_cast<std::size_t>(k) * m + k];
      for (int i = k + 1; i < m; ++i) {
        const double f = a[static_cast<std::size_t>(i) * m + k] * inv;
        a[static_cast<std::size_t>(i) * m + k] = f;
        if (f != 0.0)
          for (int j = k + 1; j < m; ++j)
            a[static_cast<std::size_t>(i) * m + j] -=
                f * a[static_cast<std::size_t>(k) * m + j];
      }
    }
    return true;
  }

  void solve(std::vector<double>& x) const {  // A x = rhs, rhs passed in x
    std::vector<double> b(m);
    for (int i = 0; i < m; ++i) b[i] = x[perm[i]];
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < i; ++j)
        b[i] -= a[static_cast<std::size_t>(i) * m + j] * b[j];
    for (int i = m - 1; i >= 0; --i) {
      for (int j = i + 1; j < m; ++j)
        b[i] -= a[static_cast<std::size_t>(i) * m + j] * b[j];
      b[i] /= a[static_cast<std::size_t>(i) * m + i];
    }
    x = std::move(b);
  }

  void solve_transposed(std::vector<double>& x) const {  // A^T y = rhs
    std::vector<double>& b = x;
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < i; ++j)
        b[i] -= a[static_cast<std::size_t>(j) * m + i] * b[j];
      b[i] /= a[static_cast<std::size_t>(i) * m + i];
    }
    for (int i = m - 1; i >= 0; --i)
      for (int j = i + 1; j < m; ++j)
        b[i] -= a[static_cast<std::size_t>(j) * m + i] * b[j];
    std::vector<double> y(m);
    for (int i = 0; i < m; ++i) y[perm[i]] = b[i];
    x = std::move(y);
  }
};

struct Tableau {
  int m = 0;      // rows
  int ncols = 0;  // structural + slack + artificial
  int nstruct = 0;
  int nart_begin = 0;

  // Immutable scaled problem data (full matrix incl. slack/artificials).
  std::vector<double> amat;  // m x ncols
  std::vector<double> bvec;  // m

  // Working state.
  std::vector<double> t;   // m x ncols working tableau (B^-1 * amat)
  std::vector<double> xb;  // values of basic variables per row
  std::vector<int> basis;
  std::vector<VarState> state;
  std::vector<double> val;  // nonbasic resting values
  std::vector<double> lo, up;
  std::vector<double> d;  // reduced costs
  std::vector<double> duals;  // scaled row duals of the last refresh
  double z = 0.0;
  int iterations = 0;

  double* row(int i) { return t.data() + static_cast<std::size_t>(i) * ncols; }
  const double* row(int i) const {
    return t.data() + static_cast<std::size_t>(i) * ncols;
  }
  double acol(int i, int j) const {
    return amat[static_cast<std::size_t>(i) * ncols + j];
  }

  // Rebuilds the working tableau, basic values, reduced costs, and objective
  // exactly from the basis via one LU factorization. Returns false if the
  // basis matrix is numerically singular.
  bool refresh(const std::vector<double>& costs) {
    Lu lu;
    lu.m = m;
    lu.a.assign(static_cast<std::size_t>(m) * m, 0.0);
    for (int i = 0; i < m; ++i)
      for (int r2 = 0; r2 < m; ++r2)
        lu.a[static_cast<std::size_t>(i) * m + r2] = acol(i, basis[r2]);
    if (!lu.factor()) return false;

    std::vector<double> rhs(m);
    for (int i = 0; i < m; ++i) {
      double r = bvec[i];
      for (int j = 0; j < ncols; ++j)
        if (state[j] != VarState::Basic && val[j] != 0.0)
          r -= acol(i, j) * val[j];
      rhs[i] = r;
    }
    lu.solve(rhs);
    xb = rhs;

    std::vector<double> y(m);
    for (int i = 0; i < m; ++i) y[i] = costs[basis[i]];
    lu.solve_transposed(y);
    duals = y;
    d.assign(ncols, 0.0);
    for (int j = 0; j < ncols; ++j) {
      double acc = costs[j];
      for (int i = 0; i < m; ++i) acc -= y[i] * acol(i, j);
      d[j] = acc;
    }
    for (int i = 0; i < m; ++i) d[basis[i]] = 0.0;

    // T = B^-1 * amat, column by column through the factorization.
    std::vector<double> col(m);
    for (int j = 0; j < ncols; ++j) {
      for (int i = 0; i < m; ++i) col[i] = acol(i, j);
      lu.solve(col);
      for (int i = 0; i < m; ++i)
        t[static_cast<std::size_t>(i) * ncols + j] = col[i];
    }

    z = 0.0;
    for (int i = 0; i < m; ++i) z += costs[basis[i]] * xb[i];
    for (int j = 0; j < ncols; ++j)
      if (state[j] != VarState::Basic) z += costs[j] * val[j];
    return true;
  }
};

constexpr double kRatioSkip = 1e-9;   // |alpha| below this cannot block
constexpr double kHarrisStretch = kFeasTol;  // permitted bound stretch

// One simplex phase: Bland's rule for the entering variable, a two-pass
// (Harris) ratio test for the leaving one so that near-degenerate steps pick
// a numerically strong pivot, and a periodic exact refresh that resets
// accumulated tableau drift. Returns true on optimality, false on an
// unbounded ray (phase 2 only).
bool run_phase(Tableau& tb, const std::vector<double>& costs, bool phase_one,
               int max_iters) {
  const int m = tb.m;
  const int ncols = tb.ncols;
  const int refresh_every = 256;

  if (!tb.refresh(costs))
    throw NumericalError("basis factorization failed");
  int since_refresh = 0;

  while (true) {
    if (++tb.iterations > max_iters)
      throw NumericalError("simplex iteration limit reached");
    if (++since_refresh >= refresh_every) {
      if (!tb.refresh(costs))
        throw NumericalError("basis factorization failed");
      since_refresh = 0;
    }

    // Entering variable: Bland's rule, lowest eligible index.
    int enter = -1;
    int dir = 0;
    for (int j = 0; j < ncols; ++j) {
      const VarState s = tb.state[j];
      if (s == VarState::Basic || s == VarState::Fixed) continue;
      if (tb.lo[j] == tb.up[j]) continue;  // frozen after phase 1
      if (!phase_one && j >= tb.nart_begin) continue;  // artificials barred
      const double dj = tb.d[j];
      if (s == VarState::AtLower && dj < -kOptTol) {
        enter = j;
        dir = +1;
        break;
      }
      if (s == VarState::AtUpper && dj > kOptTol) {
        enter = j;
        dir = -1;
        break;
      }
      if (s == VarState::FreeZero && std::fabs(dj) > kOptTol) {
        enter = j;
        dir = dj < 0.0 ? +1 : -1;
        break;
      }
    }
    if (enter < 0) {
      // Confirm on exact data before declaring optimality.
      if (since_refresh > 1) {
        if (!tb.refresh(costs))
          throw NumericalError("basis factorization failed");
        since_refresh = 0;
        continue;
      }
      return true;
    }

    const double flip_limit =
        (std::isfinite(tb.lo[enter]) && std::isfinite(tb.up[enter]))
            ? tb.up[enter] - tb.lo[enter]
            : kInf;

    // Harris pass 1: the smallest stretched ratio bounds the step.
    double t_limit = flip_limit;
    for (int i = 0; i < m; ++i) {
      const double alpha = tb.row(i)[enter];
      if (std::fabs(alpha) <= kRatioSkip) continue;
      const int k = tb.basis[i];
      const double delta = dir * alpha;  // x_k moves by -delta * step
      double ti;
      if (delta > 0.0) {
        if (!std::isfinite(tb.lo[k])) continue;
        ti = (tb.xb[i] - tb.lo[k] + kHarrisStretch) / delta;
      } else {
        if (!std::isfinite(tb.up[k])) continue;
        ti = (tb.up[k] - tb.xb[i] + kHarrisStretch) / (-delta);
      }
      if (ti < 0.0) ti = 0.0;
      t_limit = std::min(t_limit, ti);
    }

    if (!std::isfinite(t_limit)) {
      // Confirm the ray on exact data; drifted reduced costs can fake one.
      if (since_refresh > 1) {
        if (!tb.refresh(costs))
          throw NumericalError("basis factorization failed");
        since_refresh = 0;
        continue;
      }
      if (phase_one) throw NumericalError("phase-1 ray (should be impossible)");
      return false;  // unbounded
    }

    // Harris pass 2: among rows whose exact ratio fits under the stretched
    // limit, take the numerically strongest pivot; ties break toward the
    // lowest basic variable index.
    int leave_row = -1;
    bool leave_to_upper = false;
    double best_alpha = 0.0;
    double t_exact = flip_limit;
    for (int i = 0; i < m; ++i) {
      const double alpha = tb.row(i)[enter];
      if (std::fabs(alpha) <= kRatioSkip) continue;
      const int k = tb.basis[i];
      const double delta = dir * alpha;
      double ti;
      bool to_upper;
      if (delta > 0.0) {
        if (!std::isfinite(tb.lo[k])) continue;
        ti = (tb.xb[i] - tb.lo[k]) / delta;
        to_upper = false;
      } else {
        if (!std::isfinite(tb.up[k])) continue;
        ti = (tb.up[k] - tb.xb[i]) / (-delta);
        to_upper = true;
      }
      if (ti < 0.0) ti = 0.0;
      if (ti > t_limit) continue;
      const double quality = std::fabs(alpha);
      if (leave_row < 0 || quality > best_alpha * (1.0 + 1e-12) ||
          (quality >= best_alpha * (1.0 - 1e-12) && k < tb.basis[leave_row])) {
        leave_row = i;
        leave_to_upper = to_upper;
        best_alpha = quality;
        t_exact = ti;
      }
    }

    if (leave_row >= 0 && best_alpha < 1e-6 && since_refresh > 1) {
      // A weak pivot may be tableau drift masquerading as an entry; redo the
      // iteration on exact data before committing to it.
      if (!tb.refresh(costs))
        throw NumericalError("basis factorization failed");
      since_refresh = 0;
      continue;
    }

    if (leave_row < 0) {
      // Bound flip: no basic variable blocks before the entering variable
      // reaches its other bound.
      const double step = dir * flip_limit;
      for (int i = 0; i < m; ++i) tb.xb[i] -= step * tb.row(i)[enter];
      tb.z += tb.d[enter] * step;
      tb.val[enter] = dir > 0 ? tb.up[enter] : tb.lo[enter];
      tb.state[enter] = dir > 0 ? VarState::AtUpper : VarState::AtLower;
      continue;
    }

    // Pivot (leave_row, enter) with the exact ratio of the chosen row.
    const double step = dir * t_exact;
    const double enter_value = tb.val[enter] + step;
    for (int i = 0; i < m; ++i)
      if (i != leave_row) tb.xb[i] -= step * tb.row(i)[enter];
    tb.z += tb.d[enter] * step;

    const int leaving = tb.basis[leave_row];
    tb.state[leaving] = leave_to_upper ? VarState::AtUpper : VarState::AtLower;
    tb.val[leaving] = leave_to_upper ? tb.up[leaving] : tb.lo[leaving];

    double* prow = tb.row(leave_row);
    const double piv = prow[enter];
    if (std::fabs(piv) < kPivotTol)
      throw NumericalError("pivot element below threshold");
    const double inv = 1.0 / piv;
    for (int j = 0; j < ncols; ++j) prow[j] *= inv;
    prow[enter] = 1.0;
    for (int i = 0; i < m; ++i) {
      if (i == leave_row) continue;
      double* r = tb.row(i);
      const double f = r[enter];
      if (f == 0.0) continue;
      for (int j = 0; j < ncols; ++j) r[j] -= f * prow[j];
      r[enter] = 0.0;
    }
    const double de = tb.d[enter];
    if (de != 0.0) {
      for (int j = 0; j < ncols; ++j) tb.d[j] -= de * prow[j];
      tb.d[enter] = 0.0;
    }
    tb.basis[leave_row] = enter;
    tb.xb[leave_row] = enter_value;
    tb.state[enter] = VarState::Basic;
  }
}

}  // namespace

LpSolution solve_lp(const LinearProgram& lp) {
  lp.validate();
  const int n = lp.num_vars();
  const int m = lp.num_rows();

  // --- Equilibration. Column scales come from finite bounds first (rate
  // variables span ~1e7 while epigraph variables are O(1e-4); bound-driven
  // scaling keeps their shared rows balanced), then a row max-norm pass,
  // then a column pass for columns without a usable bound. Scales are
  // rounded to powers of two so that scaling is exact in floating point.
  std::vector<double> cs(n, 1.0), rs(m, 1.0);
  std::vector<bool> cs_from_bounds(n, false);
  for (int j = 0; j < n; ++j) {
    const double l = lp.lower()[j], u = lp.upper()[j];
    if (std::isfinite(l) && std::isfinite(u)) {
      const double mag = std::max(std::fabs(l), std::fabs(u));
      if (mag > 0.0) {
        cs[j] = pow2_round(mag);
        cs_from_bounds[j] = true;
      }
    }
  }
  for (int i = 0; i < m; ++i) {
    double mx = 0.0;
    const auto& row = lp.row(i);
    for (int j = 0; j < n; ++j) mx = std::max(mx, std::fabs(row[j] * cs[j]));
    if (mx > 0.0) rs[i] = pow2_round(1.0 / mx);
  }
  for (int j = 0; j < n; ++j) {
    if (cs_from_bounds[j]) continue;
    double mx = 0.0;
    for (int i = 0; i < m; ++i)
      mx = std::max(mx, std::fabs(lp.row(i)[j]) * rs[i]);
    if (mx > 0.0) cs[j] = pow2_round(1.0 / mx);
  }

  const int nslack = m;  // one slack per row; equality slacks are fixed at 0
  const int ncols_noart = n + nslack;

  Tableau tb;
  tb.m = m;
  tb.nstruct = n;

  std::vector<double> lo(ncols_noart), up(ncols_noart);
  for (int j = 0; j < n; ++j) {
    lo[j] = lp.lower()[j] / cs[j];
    up[j] = lp.upper()[j] / cs[j];
  }
  for (int i = 0; i < m; ++i) {
    switch (lp.relation(i)) {
      case Relation::LessEq:
        lo[n + i] = 0.0;
        up[n + i] = kInf;
        break;
      case Relation::GreaterEq:
        lo[n + i] = -kInf;
        up[n + i] = 0.0;
        break;
      case Relation::Equal:
        lo[n + i] = 0.0;
        up[n + i] = 0.0;
        break;
    }
  }

  std::vector<VarState> state(ncols_noart);
  std::vector<double> val(ncols_noart, 0.0);
  for (int j = 0; j < ncols_noart; ++j) {
    if (lo[j] == up[j]) {
      state[j] = VarState::Fixed;
      val[j] = lo[j];
    } else if (std::isfinite(lo[j])) {
      state[j] = VarState::AtLower;
      val[j] = lo[j];
    } else if (std::isfinite(up[j])) {
      state[j] = VarState::AtUpper;
      val[j] = up[j];
    } else {
      state[j] = VarState::FreeZero;
      val[j] = 0.0;
    }
  }

  std::vector<double> resid(m);
  for (int i = 0; i < m; ++i) {
    double r = lp.rhs(i) * rs[i];
    const auto& row = lp.row(i);
    for (int j = 0; j < n; ++j)
      if (val[j] != 0.0) r -= rs[i] * row[j] * cs[j] * val[j];
    resid[i] = r;  // value the (+1 coefficient) slack would need
  }

  std::vector<int> art_rows;
  std::vector<double> art_sign;
  for (int i = 0; i < m; ++i) {
    if (resid[i] >= lo[n + i] - kFeasTol && resid[i] <= up[n + i] + kFeasTol)
      continue;
    art_rows.push_back(i);
    art_sign.push_back(resid[i] > 0.0 ? 1.0 : -1.0);
  }
  const int nart = static_cast<int>(art_rows.size());
  tb.ncols = ncols_noart + nart;
  tb.nart_begin = ncols_noart;

  tb.amat.assign(static_cast<std::size_t>(m) * tb.ncols, 0.0);
  for (int i = 0; i < m; ++i) {
    double* r = tb.amat.data() + static_cast<std::size_t>(i) * tb.ncols;
    const auto& row = lp.row(i);
    for (int j = 0; j < n; ++j) r[j] = rs[i] * row[j] * cs[j];
    r[n + i] = 1.0;
  }
  for (int k = 0; k < nart; ++k)
    tb.amat[static_cast<std::size_t>(art_rows[k]) * tb.ncols + ncols_noart + k] =
        art_sign[k];
  tb.bvec.assign(m, 0.0);
  for (int i = 0; i < m; ++i) tb.bvec[i] = lp.rhs(i) * rs[i];

  tb.t.assign(static_cast<std::size_t>(m) * tb.ncols, 0.0);
  tb.lo = std::move(lo);
  tb.up = std::move(up);
  tb.state = std::move(state);
  tb.val = std::move(val);
  tb.lo.resize(tb.ncols, 0.0);
  tb.up.resize(tb.ncols, kInf);
  tb.val.resize(tb.ncols, 0.0);
  tb.state.resize(tb.ncols, VarState::AtLower);

  tb.basis.assign(m, -1);
  tb.xb.assign(m, 0.0);
  {
    int k = 0;
    for (int i = 0; i < m; ++i) {
      if (k < nart && art_rows[k] == i) {
        const int col = ncols_noart + k;
        tb.basis[i] = col;
        tb.state[col] = VarState::Basic;
        ++k;
      } else {
        tb.basis[i] = n + i;
        tb.state[n + i] = VarState::Basic;
      }
    }
  }

  const int max_iters = 50000 + 200 * (m + tb.ncols);

  // Phase 1: minimize the artificial sum.
  if (nart > 0) {
    std::vector<double> c1(tb.ncols, 0.0);
    for (int k = 0; k < nart; ++k) c1[ncols_noart + k] = 1.0;
    run_phase(tb, c1, true, max_iters);
    if (tb.z > kFeasTol * 10.0) {
      LpSolution sol;
      sol.status = LpStatus::Infeasible;
      sol.iterations = tb.iterations;
      return sol;
    }
    // Pivot leftover artificials out where a usable element exists; rows
    // that admit none are redundant and keep a frozen artificial. Work on
    // exactly refreshed data so a noise entry cannot be mistaken for a
    // usable pivot (that would leave a singular basis behind).
    if (!tb.refresh(c1)) throw NumericalError("basis factorization failed");
    for (int i = 0; i < m; ++i) {
      const int b = tb.basis[i];
      if (b < ncols_noart) continue;
      int target = -1;
      double best = 1e-7;
      for (int j = 0; j < ncols_noart; ++j) {
        if (tb.state[j] == VarState::Basic || tb.state[j] == VarState::Fixed)
          continue;
        const double q = std::fabs(tb.row(i)[j]);
        if (q > best) {
          best = q;
          target = j;
        }
      }
      if (target < 0) {
        tb.lo[b] = tb.up[b] = 0.0;
        continue;
      }
      double* prow = tb.row(i);
      const double inv = 1.0 / prow[target];
      for (int j = 0; j < tb.ncols; ++j) prow[j] *= inv;
      prow[target] = 1.0;
      for (int r2 = 0; r2 < m; ++r2) {
        if (r2 == i) continue;
        double* r = tb.row(r2);
        const double f = r[target];
        if (f == 0.0) continue;
        for (int j = 0; j < tb.ncols; ++j) r[j] -= f * prow[j];
        r[target] = 0.0;
      }
      tb.basis[i] = target;
      tb.xb[i] = tb.val[target];
      tb.state[target] = VarState::Basic;
      tb.state[b] = VarState::AtLower;
      tb.val[b] = 0.0;
      tb.lo[b] = tb.up[b] = 0.0;
    }
    for (int k = 0; k < nart; ++k) {
      const int col = ncols_noart + k;
      if (tb.state[col] != VarState::Basic) {
        tb.lo[col] = tb.up[col] = 0.0;
        tb.state[col] = VarState::Fixed;
        tb.val[col] = 0.0;
      }
    }
  }

  // Phase 2 (run_phase refreshes the tableau from the basis on entry).
  std::vector<double> c2(tb.ncols, 0.0);
  for (int j = 0; j < n; ++j) c2[j] = lp.cost()[j] * cs[j];
  const bool optimal = run_phase(tb, c2, false, max_iters);

  LpSolution sol;
  sol.iterations = tb.iterations;
  if (!optimal) {
    sol.status = LpStatus::Unbounded;
    sol.objective = -kInf;
    return sol;
  }

  // Final exact refresh, then extract.
  if (!tb.refresh(c2)) throw NumericalError("basis factorization failed");

  sol.x.assign(n, 0.0);
  std::vector<double> xhat(tb.ncols, 0.0);
  for (int j = 0; j < tb.ncols; ++j)
    if (tb.state[j] != VarState::Basic) xhat[j] = tb.val[j];
  for (int i = 0; i < m; ++i) xhat[tb.basis[i]] = tb.xb[i];
  for (int j = 0; j < n; ++j) {
    double v = xhat[j];
    v = std::min(std::max(v, tb.lo[j]), tb.up[j]);
    sol.x[j] = v * cs[j];
  }
  sol.duals.assign(m, 0.0);
  for (int i = 0; i < m; ++i) sol.duals[i] = tb.duals[i] * rs[i];

  double max_resid = 0.0;
  for (int i = 0; i < m; ++i) {
    double lhs = 0.0;
    const auto& row = lp.row(i);
    for (int j = 0; j < n; ++j)
      lhs += rs[i] * row[j] * cs[j] * (sol.x[j] / cs[j]);
    const double b = lp.rhs(i) * rs[i];
    double viol = 0.0;
    switch (lp.relation(i)) {
      case Relation::LessEq: viol = lhs - b; break;
      case Relation::GreaterEq: viol = b - lhs; break;
      case Relation::Equal: viol = std::fabs(lhs - b); break;
    }
    max_resid = std::max(max_resid, viol);
  }
  if (max_resid > kFeasTol * 100.0)
    throw NumericalError("primal residual beyond tolerance after cleanup");

  sol.objective = 0.0;
  for (int j = 0; j < n; ++j) sol.objective += lp.cost()[j] * sol.x[j];

  sol.reduced_costs.assign(n, 0.0);
  for (int j = 0; j < n; ++j) {
    double dj = lp.cost()[j];
    for (int i = 0; i < m; ++i) dj -= sol.duals[i] * lp.row(i)[j];
    sol.reduced_costs[j] = dj;
  }
  sol.status = LpStatus::Optimal;
  return sol;
}

int encode_pwl_utility(const PiecewiseLinearConcave& u, int var, double cap,
                       LinearProgram* lp) {
  u.validate();
  const auto& pts = u.breakpoints();
  const double lo = std::min(0.0, pts.front().second);
  const double implied_up = u.max_on(cap);
  const int uval = lp->add_variable("u" + std::to_string(var), lo,
                                    std::max(lo, implied_up));
  if (pts.size() == 1) {
    lp->add_row({{uval, 1.0}}, Relation::LessEq, pts.front().second);
    return uval;
  }
  for (std::size_t k = 1; k < pts.size(); ++k) {
    const double dx = pts[k].first - pts[k - 1].first;
    const double slope = (pts[k].second - pts[k - 1].second) / dx;
    // u_val <= v_{k-1} + slope * (var - x_{k-1})
    lp->add_row({{uval, 1.0}, {var, -slope}}, Relation::LessEq,
                pts[k - 1].second - slope * pts[k - 1].first);
  }
  return uval;
}

std::string dump_lp(const LinearProgram& lp) {
  std::ostringstream os;
  os << "min:";
  for (int j = 0; j < lp.num_vars(); ++j)
    if (lp.cost()[j] != 0.0)
      os << " " << (lp.cost()[j] >= 0 ? "+" : "") << lp.cost()[j] << "*"
         << lp.name(j);
  os << "\n";
  for (int i = 0; i < lp.num_rows(); ++i) {
    os << "r" << i << ":";
    const auto& row = lp.row(i);
    for (int j = 0; j < lp.num_vars(); ++j)
      if (row[j] != 0.0)
        os << " " << (row[j] >= 0 ? "+" : "") << row[j] << "*" << lp.name(j);
    switch (lp.relation(i)) {
      case Relation::LessEq: os << " <= "; break;
      case Relation::Equal: os << " = "; break;
      case Relation::GreaterEq: os << " >= "; break;
    }
    os << lp.rhs(i) << "\n";
  }
  for (int j = 0; j < lp.num_vars(); ++j)
    os << lp.lower()[j] << " <= " << lp.name(j) << " <= " << lp.upper()[j]
       << "\n";
  return os.str();
}

}  // namespace netlife

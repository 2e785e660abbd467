#pragma once

#include <optional>
#include <stdexcept>
#include <vector>

#include "ace/rational.hpp"

namespace ace::lp {

enum class RowType { kLe, kGe, kEq };

template <typename S>
struct Row {
  std::vector<S> a;
  RowType type;
  S rhs;
};

// Feasibility program over x >= 0: find any x satisfying every row.
template <typename S>
struct Problem {
  int n_vars = 0;
  std::vector<Row<S>> rows;
};

template <typename S>
struct Traits;
template <>
struct Traits<double> {
  static double tol() { return 1e-9; }
};
template <>
struct Traits<Rat> {
  static Rat tol() { return Rat(0); }
};

// Phase-1 simplex with Bland's pivot rule: minimizes the sum of artificial
// variables over the standardized system. Bland's rule (smallest eligible
// entering index; ratio ties broken by smallest basic index) guarantees
// termination without cycling. Returns a feasible x or nullopt.
template <typename S>
std::optional<std::vector<S>> find_feasible_point(const Problem<S>& prob) {
  const S tol = Traits<S>::tol();
  const int n = prob.n_vars;
  const int m = static_cast<int>(prob.rows.size());

  // Standardize: rhs >= 0, Le rows give a basic slack, Ge/Eq rows need an
  // artificial. Ge rows with rhs 0 flip into Le so their slack can be basic.
  struct NormRow {
    std::vector<S> a;
    RowType type;
    S rhs;
  };
  std::vector<NormRow> rows;
  rows.reserve(m);
  for (const auto& r : prob.rows) {
    NormRow nr{r.a, r.type, r.rhs};
    nr.a.resize(n, S(0));
    bool flip = nr.rhs < S(0) ||
                (nr.type == RowType::kGe && nr.rhs == S(0));
    if (flip) {
      for (auto& v : nr.a) v = -v;
      nr.rhs = -nr.rhs;
      if (nr.type == RowType::kLe)
        nr.type = RowType::kGe;
      else if (nr.type == RowType::kGe)
        nr.type = RowType::kLe;
    }
    rows.push_back(std::move(nr));
  }

  int n_slack = 0, n_art = 0;
  for (auto& r : rows) {
    if (r.type == RowType::kEq) {
      ++n_art;
    } else {
      ++n_slack;
      if (r.type == RowType::kGe) ++n_art;
    }
  }
  int cols = n + n_slack + n_art;

  // tableau[r] = coefficients | rhs at index cols
  std::vector<std::vector<S>> t(m, std::vector<S>(cols + 1, S(0)));
  std::vector<int> basis(m, -1);
  std::vector<char> artificial(cols, 0);
  int next_slack = n, next_art = n + n_slack;
  for (int r = 0; r < m; ++r) {
    for (int j = 0; j < n; ++j) t[r][j] = rows[r].a[j];
    t[r][cols] = rows[r].rhs;
    switch (rows[r].type) {
      case RowType::kLe:
        t[r][next_slack] = S(1);
        basis[r] = next_slack++;
        break;
      case RowType::kGe:
        t[r][next_slack] = S(-1);
        ++next_slack;
        t[r][next_art] = S(1);
        artificial[next_art] = 1;
        basis[r] = next_art++;
        break;
      case RowType::kEq:
        t[r][next_art] = S(1);
        artificial[next_art] = 1;
        basis[r] = next_art++;
        break;
    }
  }

  // Phase-1 objective row: the total infeasibility expressed over nonbasic
  // columns (sum of rows whose basic variable is artificial).
  std::vector<S> w(cols + 1, S(0));
  for (int r = 0; r < m; ++r)
    if (artificial[basis[r]])
      for (int j = 0; j <= cols; ++j) w[j] += t[r][j];

  long long guard = 0, guard_max = 10000LL + 200LL * (m + cols);
  while (true) {
    if (++guard > guard_max)
      throw std::logic_error("simplex pivot guard tripped");
    int enter = -1;
    for (int j = 0; j < cols; ++j)
      if (!artificial[j] && w[j] > tol) {
        enter = j;
        break;  // Bland: smallest index
      }
    if (enter < 0) break;

    int leave = -1;
    S best_ratio(0);
    for (int r = 0; r < m; ++r) {
      if (!(t[r][enter] > tol)) continue;
      S ratio = t[r][cols] / t[r][enter];
      if (leave < 0 || ratio < best_ratio ||
          (ratio == best_ratio && basis[r] < basis[leave])) {
        leave = r;
        best_ratio = ratio;
      }
    }
    if (leave < 0)
      throw std::logic_error("phase-1 objective unbounded");  // cannot happen

    S piv = t[leave][enter];
    for (int j = 0; j <= cols; ++j) t[leave][j] /= piv;
    for (int r = 0; r < m; ++r) {
      if (r == leave) continue;
      S f = t[r][enter];
      if (f == S(0)) continue;
      for (int j = 0; j <= cols; ++j) t[r][j] -= f * t[leave][j];
    }
    S fw = w[enter];
    if (fw != S(0))
      for (int j = 0; j <= cols; ++j) w[j] -= fw * t[leave][j];
    basis[leave] = enter;
  }

  // Residual infeasibility = current phase-1 objective value.
  S resid(0);
  for (int r = 0; r < m; ++r)
    if (artificial[basis[r]]) resid += t[r][cols];
  if (resid > tol) return std::nullopt;

  std::vector<S> x(n, S(0));
  for (int r = 0; r < m; ++r)
    if (basis[r] < n) x[basis[r]] = t[r][cols];
  for (auto& v : x)
    if (v < S(0)) v = S(0);  // clamp pivot dust
  return x;
}

}  // namespace ace::lp

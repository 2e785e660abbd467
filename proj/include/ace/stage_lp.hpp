#pragma once

#include <optional>
#include <vector>

#include "ace/rational.hpp"
#include "ace/simplex.hpp"

namespace ace {

enum class EquilibriumKind { kCCE, kCE };

inline const char* kind_name(EquilibriumKind k) {
  return k == EquilibriumKind::kCCE ? "cce" : "ce";
}

// Mixed-radix helpers over per-player action counts (player-1-major flat ids,
// matching the game model's encoding).
inline std::vector<int> decode_joint(int a, const std::vector<int>& counts) {
  std::vector<int> out(counts.size());
  for (int i = static_cast<int>(counts.size()) - 1; i >= 0; --i) {
    out[i] = a % counts[i];
    a /= counts[i];
  }
  return out;
}

inline int encode_joint(const std::vector<int>& per,
                        const std::vector<int>& counts) {
  int a = 0;
  for (size_t i = 0; i < counts.size(); ++i) a = a * counts[i] + per[i];
  return a;
}

// Flat id with player i's component replaced by ai.
inline int swap_component(int a, int i, int ai, const std::vector<int>& counts) {
  auto per = decode_joint(a, counts);
  per[i] = ai;
  return encode_joint(per, counts);
}

// A one-shot game over the full joint action space with an allowed subset X.
// Utilities are meaningful where `defined`; entries outside X are the
// flagged-infeasible ones and get replaced by sanitize_utilities.
template <typename S>
struct ActionConstrainedMatrixGame {
  int n_players = 0;
  std::vector<int> action_counts;
  std::vector<char> allowed;         // [flat joint]
  std::vector<char> defined;         // [flat joint]
  std::vector<std::vector<S>> u;     // [player][flat joint]

  int num_joint() const {
    int m = 1;
    for (int c : action_counts) m *= c;
    return m;
  }
  std::vector<int> allowed_list() const {
    std::vector<int> out;
    for (int a = 0; a < static_cast<int>(allowed.size()); ++a)
      if (allowed[a]) out.push_back(a);
    return out;
  }
};

// Replaces every flagged utility with a value strictly worse than anything
// achievable: (min finite) - 1 - (max - min finite range). A deviation into
// such an entry can then never look profitable.
template <typename S>
ActionConstrainedMatrixGame<S> sanitize_utilities(
    ActionConstrainedMatrixGame<S> g) {
  int A = g.num_joint();
  for (int i = 0; i < g.n_players; ++i) {
    bool seen = false;
    S lo(0), hi(0);
    for (int a = 0; a < A; ++a) {
      if (!g.defined[a]) continue;
      if (!seen) {
        lo = hi = g.u[i][a];
        seen = true;
      } else {
        if (g.u[i][a] < lo) lo = g.u[i][a];
        if (g.u[i][a] > hi) hi = g.u[i][a];
      }
    }
    S repl = seen ? S(lo - S(1) - (hi - lo)) : S(-1);
    for (int a = 0; a < A; ++a)
      if (!g.defined[a]) g.u[i][a] = repl;
  }
  for (int a = 0; a < A; ++a) g.defined[a] = 1;
  return g;
}

// The equilibrium feasibility program: variables sigma(a) for a in X.
template <typename S>
struct StageLpSystem {
  lp::Problem<S> prob;
  std::vector<int> x_actions;  // column -> flat joint action
};

template <typename S>
StageLpSystem<S> build_clp(const ActionConstrainedMatrixGame<S>& g,
                           EquilibriumKind kind) {
  StageLpSystem<S> sys;
  sys.x_actions = g.allowed_list();
  int nx = static_cast<int>(sys.x_actions.size());
  sys.prob.n_vars = nx;

  if (kind == EquilibriumKind::kCCE) {
    // For every player and unilateral deviation: following the recommendation
    // is at least as good in expectation as always playing the deviation.
    for (int i = 0; i < g.n_players; ++i)
      for (int dev = 0; dev < g.action_counts[i]; ++dev) {
        lp::Row<S> row{std::vector<S>(nx, S(0)), lp::RowType::kGe, S(0)};
        for (int k = 0; k < nx; ++k) {
          int a = sys.x_actions[k];
          int swapped = swap_component(a, i, dev, g.action_counts);
          row.a[k] = g.u[i][a] - g.u[i][swapped];
        }
        sys.prob.rows.push_back(std::move(row));
      }
  } else {
    // Conditioned on each recommended own action: no profitable swap.
    for (int i = 0; i < g.n_players; ++i)
      for (int rec = 0; rec < g.action_counts[i]; ++rec)
        for (int dev = 0; dev < g.action_counts[i]; ++dev) {
          if (dev == rec) continue;
          lp::Row<S> row{std::vector<S>(nx, S(0)), lp::RowType::kGe, S(0)};
          for (int k = 0; k < nx; ++k) {
            int a = sys.x_actions[k];
            if (decode_joint(a, g.action_counts)[i] != rec) continue;
            int swapped = swap_component(a, i, dev, g.action_counts);
            row.a[k] = g.u[i][a] - g.u[i][swapped];
          }
          sys.prob.rows.push_back(std::move(row));
        }
  }

  lp::Row<S> mass{std::vector<S>(nx, S(1)), lp::RowType::kEq, S(1)};
  sys.prob.rows.push_back(std::move(mass));
  return sys;
}

// Sparse distribution over flat joint actions, ascending ids, positive mass.
template <typename S>
using JointDistribution = std::vector<std::pair<int, S>>;

// Returns a renormalized solution of the program, or nothing when the system
// is infeasible (which the existence theorem rules out whenever X != empty).
template <typename S>
std::optional<JointDistribution<S>> solve_feasibility(
    const StageLpSystem<S>& sys) {
  if (sys.x_actions.empty()) return std::nullopt;
  auto x = lp::find_feasible_point(sys.prob);
  if (!x) return std::nullopt;

  // Exact renormalization: the largest entry absorbs the residual so the
  // serialized distribution sums to one bit-for-bit.
  S total(0);
  for (auto& v : *x) total += v;
  int largest = 0;
  for (int k = 1; k < static_cast<int>(x->size()); ++k)
    if ((*x)[k] > (*x)[largest]) largest = k;
  (*x)[largest] += S(1) - total;
  if ((*x)[largest] < S(0)) return std::nullopt;  // degenerate; cannot happen

  JointDistribution<S> out;
  for (int k = 0; k < static_cast<int>(x->size()); ++k)
    if ((*x)[k] > S(0)) out.push_back({sys.x_actions[k], (*x)[k]});
  return out;
}

}  // namespace ace

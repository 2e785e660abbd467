#pragma once

#include <type_traits>
#include <vector>

#include "ace/reduction.hpp"
#include "ace/stage_lp.hpp"

namespace ace {

template <typename S>
S from_rat(const Rat& r) {
  if constexpr (std::is_same_v<S, Rat>)
    return r;
  else
    return to_double(r);
}

// Stage payoffs at one augmented state: continuation values folded into the
// allowed actions; everything else flagged.
template <typename S>
struct StageQ {
  std::vector<char> allowed;         // [flat joint]
  std::vector<std::vector<S>> q;     // [player][flat joint], valid iff allowed
};

// values_next: [state index in layer h+1][player]
template <typename S>
StageQ<S> stage_q(const ReducedGame& g, int h, int k,
                  const std::vector<std::vector<S>>& values_next) {
  StageQ<S> out;
  out.allowed.assign(g.num_joint, 0);
  out.q.assign(g.n_players, std::vector<S>(g.num_joint, S(0)));
  const auto& acts = g.allowed[h - 1][k];
  for (size_t ai = 0; ai < acts.size(); ++ai) {
    JointAction a = acts[ai];
    out.allowed[a] = 1;
    for (int i = 0; i < g.n_players; ++i) {
      S v = from_rat<S>(g.reward[h - 1][k][ai][i]);
      for (const auto& arc : g.trans[h - 1][k][ai]) {
        if constexpr (std::is_same_v<S, Rat>)
          v += arc.p * values_next[arc.next][i];
        else
          v += arc.pd * values_next[arc.next][i];
      }
      out.q[i][a] = v;
    }
  }
  return out;
}

template <typename S>
ActionConstrainedMatrixGame<S> stage_matrix_game(const ReducedGame& g,
                                                 const StageQ<S>& sq) {
  ActionConstrainedMatrixGame<S> m;
  m.n_players = g.n_players;
  m.action_counts = g.action_counts;
  m.allowed = sq.allowed;
  m.defined = sq.allowed;
  m.u = sq.q;
  return m;
}

template <typename S>
struct AceSolution {
  EquilibriumKind kind = EquilibriumKind::kCCE;
  MarkovPolicy<S> policy;
  // values[h-1][k][player] for h = 1..H+1 (layer H+1 all zero)
  std::vector<std::vector<std::vector<S>>> values;
};

// Backward induction: each stage game gets a constrained-equilibrium
// distribution from the feasibility program; values propagate exactly one
// layer at a time.
template <typename S>
AceSolution<S> solve_reduced_game(const ReducedGame& g, EquilibriumKind kind) {
  AceSolution<S> sol;
  sol.kind = kind;
  sol.values.resize(g.horizon + 1);
  sol.policy.pi.resize(g.horizon);
  sol.values[g.horizon].assign(g.layer_size(g.horizon + 1),
                               std::vector<S>(g.n_players, S(0)));
  for (int h = g.horizon; h >= 1; --h) {
    int layer_n = g.layer_size(h);
    sol.values[h - 1].assign(layer_n, std::vector<S>(g.n_players, S(0)));
    sol.policy.pi[h - 1].resize(layer_n);
    for (int k = 0; k < layer_n; ++k) {
      StageQ<S> sq = stage_q(g, h, k, sol.values[h]);
      auto sys = build_clp(sanitize_utilities(stage_matrix_game(g, sq)), kind);
      auto sigma = solve_feasibility(sys);
      if (!sigma)
        throw GameError(GameError::Kind::kDomain,
                        "stage equilibrium program unexpectedly infeasible");
      sol.policy.pi[h - 1][k] = *sigma;
      for (auto& [a, p] : *sigma)
        for (int i = 0; i < g.n_players; ++i)
          sol.values[h - 1][k][i] += p * sq.q[i][a];
    }
  }
  return sol;
}

// Backward policy evaluation; the policy must put mass on allowed actions
// only.
template <typename S>
std::vector<std::vector<std::vector<S>>> evaluate_policy(
    const ReducedGame& g, const MarkovPolicy<S>& policy) {
  std::vector<std::vector<std::vector<S>>> values(g.horizon + 1);
  values[g.horizon].assign(g.layer_size(g.horizon + 1),
                           std::vector<S>(g.n_players, S(0)));
  for (int h = g.horizon; h >= 1; --h) {
    int layer_n = g.layer_size(h);
    values[h - 1].assign(layer_n, std::vector<S>(g.n_players, S(0)));
    for (int k = 0; k < layer_n; ++k) {
      StageQ<S> sq = stage_q(g, h, k, values[h]);
      for (auto& [a, p] : policy.pi[h - 1][k]) {
        if (!sq.allowed[a])
          throw GameError(GameError::Kind::kDomain,
                          "policy puts mass on a disallowed action");
        for (int i = 0; i < g.n_players; ++i)
          values[h - 1][k][i] += p * sq.q[i][a];
      }
    }
  }
  return values;
}

}  // namespace ace

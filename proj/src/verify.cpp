#include "ace/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <tuple>

#include "ace/equilibrium.hpp"
#include "ace/rng.hpp"

namespace ace {

namespace {

void finalize_returns(RolloutStats& st, const std::vector<double>& sum,
                      const std::vector<double>& sumsq) {
  int np = static_cast<int>(sum.size());
  st.mean_return.assign(np, 0);
  st.stderr_return.assign(np, 0);
  if (st.rollouts == 0) return;
  double n = static_cast<double>(st.rollouts);
  for (int i = 0; i < np; ++i) {
    st.mean_return[i] = sum[i] / n;
    if (st.rollouts > 1) {
      double var = (sumsq[i] - n * st.mean_return[i] * st.mean_return[i]) /
                   (n - 1.0);
      st.stderr_return[i] = std::sqrt(std::max(0.0, var) / n);
    }
  }
}

}  // namespace

RolloutStats simulate_rollouts(const ConstrainedMarkovGame& scaled,
                               const ReducedGame& reduced,
                               const MarkovPolicy<double>& policy,
                               long long n, uint64_t seed) {
  RolloutStats st;
  st.seed = seed;
  st.rollouts = n;
  int np = scaled.n_players;
  CostVec budget = lattice_budget(scaled);
  std::vector<long long> max_over(np, std::numeric_limits<long long>::min());
  std::vector<double> sum(np, 0), sumsq(np, 0);

  for (long long r = 0; r < n; ++r) {
    auto eng = make_stream(seed, static_cast<uint64_t>(r));
    StateId s = scaled.initial_state;
    CostVec cbar(np, 0);
    std::vector<double> ret(np, 0);
    bool violated = false, missing = false;

    for (int h = 1; h <= scaled.horizon; ++h) {
      auto ki = reduced.index_of(h, s, cbar);
      if (!ki || policy.pi[h - 1][*ki].empty()) {
        missing = true;
        break;
      }
      const auto& dist = policy.pi[h - 1][*ki];
      std::vector<double> w;
      w.reserve(dist.size());
      for (auto& [a, p] : dist) w.push_back(p);
      JointAction a = dist[sample_index(eng, w)].first;
      auto ai = reduced.allowed_index(h, *ki, a);
      if (!ai) {
        missing = true;
        break;
      }
      for (int i = 0; i < np; ++i)
        ret[i] += to_double(reduced.reward[h - 1][*ki][*ai][i]);

      auto support = scaled.joint_cost_support(h, s, a);
      std::vector<double> cw;
      cw.reserve(support.size());
      for (auto& atom : support) cw.push_back(to_double(atom.prob));
      const auto& atom = support[sample_index(eng, cw)];
      for (int i = 0; i < np; ++i) {
        cbar[i] += lattice_value(atom.value[i]);
        max_over[i] = std::max(max_over[i], cbar[i] - budget[i]);
        if (cbar[i] > budget[i]) violated = true;
      }

      const auto& d = scaled.at(h, s, a);
      std::vector<double> nw;
      nw.reserve(d.next.size());
      for (auto& [sp, p] : d.next) nw.push_back(to_double(p));
      s = d.next[sample_index(eng, nw)].first;
    }

    if (missing) ++st.missing_policy;
    if (violated) ++st.violations;
    for (int i = 0; i < np; ++i) {
      sum[i] += ret[i];
      sumsq[i] += ret[i] * ret[i];
    }
  }

  st.max_overshoot.assign(np, Rat(0));
  for (int i = 0; i < np; ++i)
    if (max_over[i] != std::numeric_limits<long long>::min())
      st.max_overshoot[i] = Rat(Int(max_over[i]), reduced.cost_scale);
    else
      st.max_overshoot[i] = Rat(Int(-budget[i]), reduced.cost_scale);
  finalize_returns(st, sum, sumsq);
  return st;
}

RolloutStats simulate_rollouts_approx(const ConstrainedMarkovGame& original,
                                      const RoundingSpec& grid,
                                      const ReducedGame& reduced,
                                      const MarkovPolicy<double>& policy,
                                      long long n, uint64_t seed) {
  if (original.has_joint_costs())
    throw GameError(GameError::Kind::kDomain,
                    "approximate rollouts need product-form costs");
  RolloutStats st;
  st.seed = seed;
  st.rollouts = n;
  int np = original.n_players;
  auto cmax = original.global_max_cost();
  const Int& lam = reduced.cost_scale;  // lattice unit of the rounded game

  std::vector<Rat> max_over(np);
  std::vector<char> over_set(np, 0);
  std::vector<double> sum(np, 0), sumsq(np, 0);
  static const Int kTwo53 = Int(1) << 53;

  for (long long r = 0; r < n; ++r) {
    auto eng = make_stream(seed, static_cast<uint64_t>(r));
    StateId s = original.initial_state;
    std::vector<Rat> true_c(np, Rat(0)), sur(np, Rat(0));
    std::vector<double> ret(np, 0);
    bool violated = false, missing = false;

    for (int h = 1; h <= original.horizon; ++h) {
      CostVec key(np);
      for (int i = 0; i < np; ++i) key[i] = lattice_value(Rat(sur[i] * lam));
      auto ki = reduced.index_of(h, s, key);
      if (!ki || policy.pi[h - 1][*ki].empty()) {
        missing = true;
        break;
      }
      const auto& dist = policy.pi[h - 1][*ki];
      std::vector<double> w;
      w.reserve(dist.size());
      for (auto& [a, p] : dist) w.push_back(p);
      JointAction a = dist[sample_index(eng, w)].first;
      auto ai = reduced.allowed_index(h, *ki, a);
      if (!ai) {
        missing = true;
        break;
      }
      for (int i = 0; i < np; ++i)
        ret[i] += to_double(reduced.reward[h - 1][*ki][*ai][i]);

      // True cost draw per player, then the grid surrogate update.
      const StageDynamics& d = original.at(h, s, a);
      for (int i = 0; i < np; ++i) {
        Rat v;
        const CostDist& c = d.cost[i];
        if (c.continuous()) {
          // exact dyadic uniform draw on [lo, hi)
          Int m(eng() >> 11);
          v = c.uniform->lo +
              (c.uniform->hi - c.uniform->lo) * Rat(m, kTwo53);
        } else {
          std::vector<double> cw;
          cw.reserve(c.atoms.size());
          for (auto& atom : c.atoms) cw.push_back(to_double(atom.prob));
          v = c.atoms[sample_index(eng, cw)].value;
        }
        true_c[i] += v;
        if (!grid.exempt[i])
          sur[i] += std::max(round_down(v, grid.ell[i]), grid.lowest_atom[i]);

        Rat over = true_c[i] - original.budget[i];
        if (!over_set[i] || over > max_over[i]) {
          max_over[i] = over;
          over_set[i] = 1;
        }
        if (over > grid.allowance(i, original.budget[i])) violated = true;

        if (!grid.exempt[i]) {
          // Surrogate stays below the true cost and within h*ell of it,
          // unless both already sit in the never-bind region.
          Rat slack = Rat(h) * grid.ell[i];
          Rat safe = original.budget[i] -
                     Rat(original.horizon - h) * cmax[i];
          bool tight = sur[i] <= true_c[i] && true_c[i] <= sur[i] + slack;
          bool parked = sur[i] <= safe && true_c[i] <= safe;
          if (!tight && !parked) ++st.sandwich_violations;
        }
      }

      std::vector<double> nw;
      nw.reserve(d.next.size());
      for (auto& [sp, p] : d.next) nw.push_back(to_double(p));
      s = d.next[sample_index(eng, nw)].first;
    }

    if (missing) ++st.missing_policy;
    if (violated) ++st.violations;
    for (int i = 0; i < np; ++i) {
      sum[i] += ret[i];
      sumsq[i] += ret[i] * ret[i];
    }
  }

  st.max_overshoot.assign(np, Rat(0));
  for (int i = 0; i < np; ++i)
    st.max_overshoot[i] = over_set[i] ? max_over[i] : Rat(-original.budget[i]);
  finalize_returns(st, sum, sumsq);
  return st;
}

DeviationReport best_feasible_deviation(const ReducedGame& g,
                                        const MarkovPolicy<double>& policy,
                                        PlayerId player) {
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();
  DeviationReport rep;
  auto values = evaluate_policy<double>(g, policy);

  std::vector<double> next_dev(g.layer_size(g.horizon + 1), 0.0);
  for (int h = g.horizon; h >= 1; --h) {
    int layer_n = g.layer_size(h);
    std::vector<double> dev(layer_n, kNegInf);
    for (int k = 0; k < layer_n; ++k) {
      const auto& dist = policy.pi[h - 1][k];
      double best = kNegInf;
      for (int da = 0; da < g.action_counts[player]; ++da) {
        bool feasible = true;
        double val = 0;
        for (auto& [a, p] : dist) {
          int swapped = swap_component(a, player, da, g.action_counts);
          auto ai = g.allowed_index(h, k, swapped);
          if (!ai) {
            feasible = false;
            break;
          }
          double q = to_double(g.reward[h - 1][k][*ai][player]);
          for (const auto& arc : g.trans[h - 1][k][*ai])
            q += arc.pd * next_dev[arc.next];
          val += p * q;
        }
        if (feasible && val > best) best = val;
      }
      dev[k] = best;
      double on_path = values[h - 1][k][player];
      double gap = best - on_path;
      rep.entries.push_back({player, h, k, best, on_path, gap});
      if (gap > rep.max_gap) rep.max_gap = gap;
    }
    next_dev = std::move(dev);
  }
  return rep;
}

namespace {

// Definitional feasibility: an action works at (h,s,cbar) iff every cost
// realization keeps the cumulative within budget AND every reachable
// successor admits a feasible continuation. Written against the raw game,
// with rational cumulative vectors, independent of the DAG machinery.
struct BruteForce {
  const ConstrainedMarkovGame& g;
  long long cap;
  std::map<std::tuple<int, StateId, std::vector<Rat>>, bool> memo;
  std::set<std::vector<Rat>> distinct;

  bool within(const std::vector<Rat>& cbar) const {
    for (int i = 0; i < g.n_players; ++i)
      if (cbar[i] > g.budget[i]) return false;
    return true;
  }

  bool action_fits(int h, StateId s, JointAction a,
                   const std::vector<Rat>& cbar) {
    for (auto& atom : g.joint_cost_support(h, s, a)) {
      std::vector<Rat> child = cbar;
      for (int i = 0; i < g.n_players; ++i) child[i] += atom.value[i];
      if (!within(child)) return false;
    }
    return true;
  }

  bool feasible(int h, StateId s, const std::vector<Rat>& cbar) {
    distinct.insert(cbar);
    long long work = static_cast<long long>(distinct.size()) * g.horizon *
                     g.num_states() * g.num_joint_actions();
    if (work > cap)
      throw GameError(GameError::Kind::kDomain,
                      "brute-force oracle work cap exceeded");
    if (h == g.horizon + 1) return true;
    auto key = std::make_tuple(h, s, cbar);
    auto it = memo.find(key);
    if (it != memo.end()) return it->second;
    memo[key] = false;  // cycle-safe default; layers only move forward anyway
    bool ok = false;
    for (JointAction a = 0; a < g.num_joint_actions() && !ok; ++a) {
      if (!action_fits(h, s, a, cbar)) continue;
      bool all = true;
      for (auto& atom : g.joint_cost_support(h, s, a)) {
        std::vector<Rat> child = cbar;
        for (int i = 0; i < g.n_players; ++i) child[i] += atom.value[i];
        for (auto& [sp, p] : g.at(h, s, a).next)
          if (!feasible(h + 1, sp, child)) {
            all = false;
            break;
          }
        if (!all) break;
      }
      ok = all;
    }
    memo[key] = ok;
    return ok;
  }
};

}  // namespace

std::optional<FeasibleSets> brute_force_feasible_sets(
    const ConstrainedMarkovGame& scaled, const BruteCaps& caps) {
  BruteForce bf{scaled, caps.max_work, {}, {}};
  std::vector<Rat> zero(scaled.n_players, Rat(0));
  if (!bf.feasible(1, scaled.initial_state, zero)) return std::nullopt;

  FeasibleSets out;
  out.horizon = scaled.horizon;
  out.n_players = scaled.n_players;
  out.fs.resize(scaled.horizon + 1);
  out.fa.resize(scaled.horizon);

  std::set<std::pair<StateId, std::vector<Rat>>> frontier{
      {scaled.initial_state, zero}};
  for (int h = 1; h <= scaled.horizon + 1; ++h) {
    std::set<std::pair<StateId, std::vector<Rat>>> next;
    for (const auto& [s, cbar] : frontier) {
      CostVec key;
      for (auto& v : cbar) key.push_back(lattice_value(v));
      out.fs[h - 1].push_back({s, key});
      if (h == scaled.horizon + 1) continue;
      std::vector<JointAction> acts;
      for (JointAction a = 0; a < scaled.num_joint_actions(); ++a) {
        if (!bf.action_fits(h, s, a, cbar)) continue;
        bool all = true;
        std::vector<std::pair<StateId, std::vector<Rat>>> kids;
        for (auto& atom : scaled.joint_cost_support(h, s, a)) {
          std::vector<Rat> child = cbar;
          for (int i = 0; i < scaled.n_players; ++i) child[i] += atom.value[i];
          for (auto& [sp, p] : scaled.at(h, s, a).next) {
            if (!bf.feasible(h + 1, sp, child)) all = false;
            kids.push_back({sp, child});
          }
          if (!all) break;
        }
        if (!all) continue;
        acts.push_back(a);
        for (auto& kid : kids) next.insert(kid);
      }
      out.fa[h - 1].push_back(std::move(acts));
    }
    frontier = std::move(next);
  }
  std::set<CostVec> dv;
  for (auto& layer : out.fs)
    for (auto& [s, key] : layer) {
      (void)s;
      dv.insert(key);
    }
  out.d_g = static_cast<long long>(dv.size());
  return out;
}

CheckReport check_solution(const ConstrainedMarkovGame& original,
                           const SolveArtifacts& art, long long rollouts,
                           uint64_t seed, bool run_oracle) {
  CheckReport rep;
  const ReducedGame& rg = art.reduced;
  const MarkovPolicy<double>& pol = art.sol.policy;

  rep.support_ok = true;
  rep.coverage_ok =
      static_cast<int>(pol.pi.size()) == rg.horizon;
  for (int h = 1; h <= rg.horizon && rep.coverage_ok; ++h) {
    if (static_cast<int>(pol.pi[h - 1].size()) != rg.layer_size(h)) {
      rep.coverage_ok = false;
      break;
    }
    for (int k = 0; k < rg.layer_size(h); ++k) {
      const auto& dist = pol.pi[h - 1][k];
      if (dist.empty()) {
        rep.coverage_ok = false;
        break;
      }
      double mass = 0;
      for (auto& [a, p] : dist) {
        if (p < 0 || !rg.allowed_index(h, k, a)) rep.support_ok = false;
        mass += p;
      }
      if (std::abs(mass - 1.0) > 1e-9) rep.support_ok = false;
    }
  }

  rep.consistency_ok = false;
  if (rep.coverage_ok && rep.support_ok) {
    auto vals = evaluate_policy<double>(rg, pol);
    double mx = 0;
    for (int h = 1; h <= rg.horizon + 1; ++h)
      for (int k = 0; k < rg.layer_size(h); ++k)
        for (int i = 0; i < rg.n_players; ++i)
          mx = std::max(mx, std::abs(vals[h - 1][k][i] -
                                     art.sol.values[h - 1][k][i]));
    rep.max_value_diff = mx;
    rep.consistency_ok = mx <= kValueTolerance;

    rep.stats = art.grid ? simulate_rollouts_approx(original, *art.grid, rg,
                                                    pol, rollouts, seed)
                         : simulate_rollouts(art.scaled, rg, pol, rollouts,
                                             seed);
    rep.rollouts_ok = rep.stats.violations == 0 &&
                      rep.stats.missing_policy == 0 &&
                      rep.stats.sandwich_violations == 0;

    rep.deviations_ok = true;
    for (int i = 0; i < rg.n_players; ++i) {
      auto dr = best_feasible_deviation(rg, pol, i);
      rep.max_gap = std::max(rep.max_gap, dr.max_gap);
      if (dr.max_gap > kGapTolerance) rep.deviations_ok = false;
    }
  }

  if (run_oracle) {
    long long work = static_cast<long long>(art.scaled.horizon) *
                     art.scaled.num_states() * art.scaled.num_joint_actions() *
                     std::max(1LL, art.sets.d_g);
    if (work <= BruteCaps{}.max_work) {
      rep.oracle_ran = true;
      try {
        auto oracle = brute_force_feasible_sets(art.scaled);
        rep.oracle_ok = oracle && oracle->fs == art.sets.fs &&
                        oracle->fa == art.sets.fa;
      } catch (const GameError&) {
        rep.oracle_ran = false;  // cap tripped mid-way: skip, not a failure
      }
    }
  }
  return rep;
}

}  // namespace ace

#pragma once

// Shared scaffolding for the test suite: a seeded random-instance generator,
// independent oracles (single-agent constrained DP, pure-deviation gains,
// direct history replay), and a subprocess runner for the CLI binary.
// The oracles deliberately share no logic with the library modules they
// cross-check; they recompute everything from definitions.

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "ace/game.hpp"
#include "ace/reduction.hpp"
#include "ace/rng.hpp"
#include "ace/stage_lp.hpp"
#include "test_paths.hpp"

namespace helpers {

using json = nlohmann::ordered_json;

inline ace::Rat R(const std::string& s) { return ace::parse_rational(s); }

// ---------------------------------------------------------------------------
// Subprocess runner. Commands go through /bin/sh so env-var prefixes work.

struct CliResult {
  int exit_code = -1;
  std::string out;
};

inline CliResult run_cli(const std::string& args, const std::string& env = "") {
  CliResult res;
  std::string cmd = env.empty() ? "" : env + " ";
  cmd += "'" + g_cli_path + "' " + args + " 2>/dev/null";
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) return res;
  char buf[4096];
  size_t n;
  while ((n = fread(buf, 1, sizeof buf, p)) > 0) res.out.append(buf, n);
  int status = pclose(p);
  res.exit_code = (status >= 0 && WIFEXITED(status)) ? WEXITSTATUS(status) : -1;
  return res;
}

inline std::string write_temp(const std::string& name, const std::string& text) {
  std::string path = "/tmp/" + name;
  FILE* f = fopen(path.c_str(), "w");
  fwrite(text.data(), 1, text.size(), f);
  fclose(f);
  return path;
}

// ---------------------------------------------------------------------------
// Random instance generator. Costs are k/cost_den with k in [cost_lo,cost_hi];
// probabilities live on the /8 grid so every instance is exactly
// representable and the scale stays tiny.

struct GenParams {
  int n_players = 2;
  int max_states = 3;
  int actions = 2;  // per player
  int horizon = 3;
  int cost_lo = 0, cost_hi = 3;
  int cost_den = 1;
  int budget_lo = 0, budget_hi = 6;
  int fixed_states = 0;        // when > 0, exactly this many states
  bool zero_cost_action = false;  // joint action (0,..,0) is free everywhere
};

namespace detail {

inline int pick(std::mt19937_64& e, int lo, int hi) {  // inclusive
  return lo + static_cast<int>(e() % static_cast<uint64_t>(hi - lo + 1));
}

inline json cost_value(int k, int den) {
  if (den == 1) return k;
  return std::to_string(k) + "/" + std::to_string(den);
}

inline json atom_dist(std::mt19937_64& e, const GenParams& p, bool force_zero) {
  json atoms = json::array();
  if (force_zero) {
    atoms.push_back({{"value", 0}, {"prob", 1}});
    return atoms;
  }
  if (pick(e, 0, 1) == 0) {
    atoms.push_back(
        {{"value", cost_value(pick(e, p.cost_lo, p.cost_hi), p.cost_den)},
         {"prob", 1}});
    return atoms;
  }
  int k1 = pick(e, p.cost_lo, p.cost_hi);
  int k2 = pick(e, p.cost_lo, p.cost_hi);
  if (k1 == k2) {
    atoms.push_back({{"value", cost_value(k1, p.cost_den)}, {"prob", 1}});
    return atoms;
  }
  if (k1 > k2) std::swap(k1, k2);
  int w = pick(e, 1, 7);
  atoms.push_back({{"value", cost_value(k1, p.cost_den)},
                   {"prob", std::to_string(w) + "/8"}});
  atoms.push_back({{"value", cost_value(k2, p.cost_den)},
                   {"prob", std::to_string(8 - w) + "/8"}});
  return atoms;
}

}  // namespace detail

inline std::string random_game_json(uint64_t seed, const GenParams& p) {
  auto e = ace::make_stream(seed, 0x9a7e);
  int S = p.fixed_states > 0 ? p.fixed_states : detail::pick(e, 1, p.max_states);

  json doc;
  doc["players"] = p.n_players;
  json states = json::array();
  for (int s = 0; s < S; ++s) states.push_back("s" + std::to_string(s));
  doc["states"] = states;
  doc["initial_state"] = "s0";
  doc["horizon"] = p.horizon;
  json budget = json::array();
  for (int i = 0; i < p.n_players; ++i)
    budget.push_back(detail::pick(e, p.budget_lo, p.budget_hi));
  doc["budget"] = budget;

  json actions = json::array();
  std::vector<std::vector<std::string>> anames(p.n_players);
  for (int i = 0; i < p.n_players; ++i) {
    json row = json::array();
    for (int j = 0; j < p.actions; ++j) {
      std::string nm = "p" + std::to_string(i) + "a" + std::to_string(j);
      anames[i].push_back(nm);
      row.push_back(nm);
    }
    actions.push_back(row);
  }
  doc["actions"] = actions;

  int njoint = 1;
  for (int i = 0; i < p.n_players; ++i) njoint *= p.actions;

  json dyn = json::array();
  for (int h = 1; h <= p.horizon; ++h)
    for (int s = 0; s < S; ++s)
      for (int a = 0; a < njoint; ++a) {
        json entry;
        entry["h"] = h;
        entry["s"] = "s" + std::to_string(s);
        json an = json::array();
        int rem = a;
        std::vector<int> per(p.n_players);
        for (int i = p.n_players - 1; i >= 0; --i) {
          per[i] = rem % p.actions;
          rem /= p.actions;
        }
        bool all_zero = true;
        for (int i = 0; i < p.n_players; ++i) {
          an.push_back(anames[i][per[i]]);
          if (per[i] != 0) all_zero = false;
        }
        entry["a"] = an;

        json next;
        int s1 = detail::pick(e, 0, S - 1);
        if (S > 1 && detail::pick(e, 0, 1) == 1) {
          int s2 = detail::pick(e, 0, S - 1);
          if (s2 == s1) s2 = (s1 + 1) % S;
          int w = detail::pick(e, 1, 7);
          next["s" + std::to_string(s1)] = std::to_string(w) + "/8";
          next["s" + std::to_string(s2)] = std::to_string(8 - w) + "/8";
        } else {
          next["s" + std::to_string(s1)] = 1;
        }
        entry["next"] = next;

        json reward = json::array();
        for (int i = 0; i < p.n_players; ++i)
          reward.push_back(detail::pick(e, 0, 9));
        entry["reward"] = reward;

        bool free_action = p.zero_cost_action && all_zero;
        json cost = json::array();
        for (int i = 0; i < p.n_players; ++i)
          cost.push_back(detail::atom_dist(e, p, free_action));
        entry["cost"] = cost;
        dyn.push_back(entry);
      }
  doc["dynamics"] = dyn;
  return doc.dump(2) + "\n";
}

// Dense scaling-family instance: everything varies only through the state
// count, costs stay on a two-bit integer range.
inline std::string scaling_family_json(int S, uint64_t seed) {
  auto e = ace::make_stream(seed, 0x5ca1e);
  json doc;
  doc["players"] = 2;
  json states = json::array();
  for (int s = 0; s < S; ++s) states.push_back("s" + std::to_string(s));
  doc["states"] = states;
  doc["initial_state"] = "s0";
  doc["horizon"] = 4;
  doc["budget"] = {6, 6};
  doc["actions"] =
      json::array({json::array({"a0", "a1"}), json::array({"b0", "b1"})});

  const char* an[4][2] = {{"a0", "b0"}, {"a0", "b1"}, {"a1", "b0"}, {"a1", "b1"}};
  json dyn = json::array();
  for (int h = 1; h <= 4; ++h)
    for (int s = 0; s < S; ++s)
      for (int a = 0; a < 4; ++a) {
        json entry;
        entry["h"] = h;
        entry["s"] = "s" + std::to_string(s);
        entry["a"] = {an[a][0], an[a][1]};
        // dense transition over every state
        std::vector<int> w(S);
        int total = 0;
        for (int t = 0; t < S; ++t) {
          w[t] = 1 + static_cast<int>(e() % 3);
          total += w[t];
        }
        json next;
        for (int t = 0; t < S; ++t)
          next["s" + std::to_string(t)] =
              std::to_string(w[t]) + "/" + std::to_string(total);
        entry["next"] = next;
        entry["reward"] = {detail::pick(e, 0, 9), detail::pick(e, 0, 9)};
        // the first joint action always costs 1, keeping every instance
        // feasible (4 steps * 1 <= 6) at any state count
        json cost = json::array();
        for (int i = 0; i < 2; ++i) {
          json atoms = json::array();
          atoms.push_back(
              {{"value", a == 0 ? 1 : detail::pick(e, 0, 3)}, {"prob", 1}});
          cost.push_back(atoms);
        }
        entry["cost"] = cost;
        dyn.push_back(entry);
      }
  doc["dynamics"] = dyn;
  return doc.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// Single-agent constrained DP oracle: direct memoized recursion over
// (stage, state, exact spend). An action is usable iff every cost realization
// stays within budget AND every (cost, next-state) outcome still admits a
// usable continuation. Returns nothing when no such policy exists.

class SingleAgentOracle {
 public:
  explicit SingleAgentOracle(const ace::ConstrainedMarkovGame& g) : g_(g) {}

  std::optional<ace::Rat> optimum() {
    return value(1, g_.initial_state, ace::Rat(0));
  }

 private:
  std::optional<ace::Rat> value(int h, ace::StateId s, const ace::Rat& spent) {
    if (h > g_.horizon) return ace::Rat(0);
    auto key = std::make_tuple(h, s, spent);
    auto it = memo_.find(key);
    if (it != memo_.end()) return it->second;

    std::optional<ace::Rat> best;
    for (int a = 0; a < g_.action_count(0); ++a) {
      const ace::StageDynamics& d = g_.at(h, s, a);
      bool ok = true;
      ace::Rat val = d.reward[0];
      for (const ace::CostAtom& atom : d.cost[0].atoms) {
        ace::Rat c1 = spent + atom.value;
        if (c1 > g_.budget[0]) {
          ok = false;
          break;
        }
        ace::Rat inner(0);
        for (const auto& [sp, prob] : d.next) {
          auto v = value(h + 1, sp, c1);
          if (!v) {
            ok = false;
            break;
          }
          inner += prob * *v;
        }
        if (!ok) break;
        val += atom.prob * inner;
      }
      if (ok && (!best || val > *best)) best = val;
    }
    memo_[key] = best;
    return best;
  }

  const ace::ConstrainedMarkovGame& g_;
  std::map<std::tuple<int, ace::StateId, ace::Rat>, std::optional<ace::Rat>>
      memo_;
};

// ---------------------------------------------------------------------------
// Random action-constrained matrix games plus a from-definitions deviation
// gain. Index arithmetic here is written out rather than borrowed from the
// library so the two can disagree.

inline ace::ActionConstrainedMatrixGame<double> random_matrix_game(
    uint64_t seed) {
  auto e = ace::make_stream(seed, 0x3a7);
  ace::ActionConstrainedMatrixGame<double> g;
  g.n_players = detail::pick(e, 2, 3);
  for (int i = 0; i < g.n_players; ++i)
    g.action_counts.push_back(detail::pick(e, 2, 3));
  int A = g.num_joint();
  g.allowed.assign(A, 0);
  g.defined.assign(A, 0);
  g.u.assign(g.n_players, std::vector<double>(A, 0));
  for (int a = 0; a < A; ++a) {
    g.allowed[a] = (e() % 2) ? 1 : 0;
    g.defined[a] = g.allowed[a];
    for (int i = 0; i < g.n_players; ++i)
      g.u[i][a] = (static_cast<int>(e() % 161) - 80) / 16.0;  // [-5, 5]
  }
  bool any = false;
  for (int a = 0; a < A; ++a) any = any || g.allowed[a];
  if (!any) {
    int a = static_cast<int>(e() % A);
    g.allowed[a] = g.defined[a] = 1;
  }
  return g;
}

namespace detail {

// Strides of a player-1-major flat encoding, computed from scratch.
inline std::vector<int> strides(const std::vector<int>& counts) {
  std::vector<int> st(counts.size(), 1);
  for (int i = static_cast<int>(counts.size()) - 2; i >= 0; --i)
    st[i] = st[i + 1] * counts[i + 1];
  return st;
}

}  // namespace detail

// Largest pure-deviation gain of sigma in the (sanitized) game; the LP pins
// this at <= 0 up to its tolerance.
inline double max_deviation_gain(
    const ace::ActionConstrainedMatrixGame<double>& g,
    const std::vector<std::pair<int, double>>& sigma, ace::EquilibriumKind kind) {
  auto st = detail::strides(g.action_counts);
  double worst = -1e300;
  for (int i = 0; i < g.n_players; ++i) {
    int ci = g.action_counts[i];
    if (kind == ace::EquilibriumKind::kCCE) {
      for (int dev = 0; dev < ci; ++dev) {
        double gain = 0;
        for (const auto& [a, p] : sigma) {
          int own = (a / st[i]) % ci;
          int swapped = a + (dev - own) * st[i];
          gain += p * (g.u[i][swapped] - g.u[i][a]);
        }
        worst = std::max(worst, gain);
      }
    } else {
      for (int rec = 0; rec < ci; ++rec)
        for (int dev = 0; dev < ci; ++dev) {
          if (dev == rec) continue;
          double gain = 0;
          for (const auto& [a, p] : sigma) {
            if ((a / st[i]) % ci != rec) continue;
            int swapped = a + (dev - rec) * st[i];
            gain += p * (g.u[i][swapped] - g.u[i][a]);
          }
          worst = std::max(worst, gain);
        }
    }
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Direct replay of a reduced-game policy on the base game: recursion over
// (stage, state, exact cumulative cost) enumerating raw (cost atoms x next
// state) outcomes one player at a time. Exact equality against the reduced
// game's own evaluation certifies that arc aggregation lost nothing.

class ReplayOracle {
 public:
  ReplayOracle(const ace::ConstrainedMarkovGame& scaled,
               const ace::ReducedGame& red,
               const ace::MarkovPolicy<ace::Rat>& pi)
      : g_(scaled), red_(red), pi_(pi) {}

  std::vector<ace::Rat> value_at_root() {
    return value(1, g_.initial_state, std::vector<ace::Rat>(g_.n_players, ace::Rat(0)));
  }

 private:
  std::vector<ace::Rat> value(int h, ace::StateId s,
                              const std::vector<ace::Rat>& spent) {
    if (h > g_.horizon) return std::vector<ace::Rat>(g_.n_players, ace::Rat(0));
    ace::CostVec key(g_.n_players);
    for (int i = 0; i < g_.n_players; ++i) {
      ace::Rat scaled = spent[i];  // lattice units already (scaled game)
      key[i] = static_cast<long long>(ace::rat_floor(scaled).convert_to<long long>());
    }
    auto k = red_.index_of(h, s, key);
    if (!k) throw std::runtime_error("replay reached an unmapped state");
    std::vector<ace::Rat> out(g_.n_players, ace::Rat(0));
    for (const auto& [a, p] : pi_.pi[h - 1][*k]) {
      const ace::StageDynamics& d = g_.at(h, s, a);
      std::vector<ace::Rat> act(g_.n_players, ace::Rat(0));
      for (int i = 0; i < g_.n_players; ++i) act[i] = d.reward[i];
      // enumerate the joint cost support
      auto support = g_.joint_cost_support(h, s, a);
      for (const auto& atom : support) {
        std::vector<ace::Rat> nspent(g_.n_players);
        for (int i = 0; i < g_.n_players; ++i) nspent[i] = spent[i] + atom.value[i];
        for (const auto& [sp, tp] : d.next) {
          auto cont = value(h + 1, sp, nspent);
          for (int i = 0; i < g_.n_players; ++i)
            act[i] += atom.prob * tp * cont[i];
        }
      }
      for (int i = 0; i < g_.n_players; ++i) out[i] += p * act[i];
    }
    return out;
  }

  const ace::ConstrainedMarkovGame& g_;
  const ace::ReducedGame& red_;
  const ace::MarkovPolicy<ace::Rat>& pi_;
};

// Uniform-over-allowed exact policy on a reduced game, handy as a fixed
// non-degenerate policy for evaluation tests.
inline ace::MarkovPolicy<ace::Rat> uniform_policy(const ace::ReducedGame& g) {
  ace::MarkovPolicy<ace::Rat> pi;
  pi.pi.resize(g.horizon);
  for (int h = 1; h <= g.horizon; ++h) {
    pi.pi[h - 1].resize(g.layer_size(h));
    for (int k = 0; k < g.layer_size(h); ++k) {
      const auto& acts = g.allowed[h - 1][k];
      ace::Rat p(1, static_cast<int>(acts.size()));
      for (ace::JointAction a : acts) pi.pi[h - 1][k].push_back({a, p});
    }
  }
  return pi;
}

inline ace::MarkovPolicy<double> to_double_policy(
    const ace::MarkovPolicy<ace::Rat>& pi) {
  ace::MarkovPolicy<double> out;
  out.pi.resize(pi.pi.size());
  for (size_t h = 0; h < pi.pi.size(); ++h) {
    out.pi[h].resize(pi.pi[h].size());
    for (size_t k = 0; k < pi.pi[h].size(); ++k)
      for (const auto& [a, p] : pi.pi[h][k])
        out.pi[h][k].push_back({a, ace::to_double(p)});
  }
  return out;
}

}  // namespace helpers

#include "ace/reduction.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace ace {

AugmentedHistory translate_history(const History& h, int n_players) {
  AugmentedHistory out;
  CostVec cbar(n_players, 0);
  out.states.push_back({h.initial, cbar});
  for (auto& step : h.steps) {
    out.actions.push_back(step.a);
    for (int i = 0; i < n_players; ++i) cbar[i] += step.cost[i];
    out.states.push_back({step.next, cbar});
  }
  return out;
}

History invert_history(const AugmentedHistory& h) {
  History out;
  out.initial = h.states.front().first;
  for (size_t t = 0; t + 1 < h.states.size(); ++t) {
    CostVec cost = h.states[t + 1].second;
    for (size_t i = 0; i < cost.size(); ++i) cost[i] -= h.states[t].second[i];
    out.steps.push_back({h.actions[t], std::move(cost), h.states[t + 1].first});
  }
  return out;
}

bool is_product_set(const std::vector<JointAction>& actions,
                    const std::vector<int>& action_counts) {
  int n = static_cast<int>(action_counts.size());
  std::vector<std::set<int>> proj(n);
  for (JointAction a : actions) {
    int idx = a;
    for (int i = n - 1; i >= 0; --i) {
      proj[i].insert(idx % action_counts[i]);
      idx /= action_counts[i];
    }
  }
  size_t prod = 1;
  for (auto& p : proj) prod *= p.size();
  return prod == actions.size();
}

std::optional<int> ReducedGame::index_of(int h, StateId s,
                                         const CostVec& cbar) const {
  const auto& layer = states[h - 1];
  auto key = std::make_pair(s, cbar);
  auto it = std::lower_bound(layer.begin(), layer.end(), key);
  if (it == layer.end() || *it != key) return std::nullopt;
  return static_cast<int>(it - layer.begin());
}

std::optional<int> ReducedGame::allowed_index(int h, int k,
                                              JointAction a) const {
  const auto& acts = allowed[h - 1][k];
  auto it = std::lower_bound(acts.begin(), acts.end(), a);
  if (it == acts.end() || *it != a) return std::nullopt;
  return static_cast<int>(it - acts.begin());
}

int ReducedGame::non_product_states() const {
  int n = 0;
  for (auto& layer : is_product)
    for (char f : layer)
      if (!f) ++n;
  return n;
}

std::string ReducedGame::aug_state_name(int h, int k) const {
  const auto& [s, cbar] = states[h - 1][k];
  std::string out = "(" + state_names[s] + ",[";
  for (size_t i = 0; i < cbar.size(); ++i) {
    if (i) out += ",";
    out += rat_to_string(Rat(cbar[i], cost_scale));
  }
  return out + "])";
}

ReducedGame build_reduced_game(const ConstrainedMarkovGame& g,
                               const FeasibleSets& sets,
                               const Int& original_scale) {
  ReducedGame r;
  r.horizon = sets.horizon;
  r.n_players = g.n_players;
  for (int i = 0; i < g.n_players; ++i)
    r.action_counts.push_back(g.action_count(i));
  r.num_joint = g.num_joint_actions();
  r.cost_scale = original_scale;
  for (const Rat& b : g.budget) r.budget.push_back(b / Rat(original_scale));
  r.state_names = g.state_names;
  r.action_names = g.action_names;
  r.states = sets.fs;
  r.allowed = sets.fa;
  r.d_g = sets.d_g;

  r.trans.resize(r.horizon);
  r.reward.resize(r.horizon);
  r.is_product.resize(r.horizon);
  for (int h = 1; h <= r.horizon; ++h) {
    int layer_n = static_cast<int>(r.states[h - 1].size());
    r.trans[h - 1].resize(layer_n);
    r.reward[h - 1].resize(layer_n);
    r.is_product[h - 1].resize(layer_n);
    for (int k = 0; k < layer_n; ++k) {
      const auto& [s, cbar] = r.states[h - 1][k];
      const auto& acts = r.allowed[h - 1][k];
      r.is_product[h - 1][k] = is_product_set(acts, r.action_counts);
      r.trans[h - 1][k].resize(acts.size());
      r.reward[h - 1][k].resize(acts.size());
      for (size_t ai = 0; ai < acts.size(); ++ai) {
        JointAction a = acts[ai];
        const StageDynamics& d = g.at(h, s, a);
        r.reward[h - 1][k][ai] = d.reward;

        // Cost draw and state transition jointly decide the successor
        // augmented state; different outcomes landing on the same (s', cbar+c)
        // merge into one arc with summed probability.
        std::map<int, Rat> mass;
        for (auto& atom : g.joint_cost_support(h, s, a)) {
          CostVec child = cbar;
          for (int i = 0; i < r.n_players; ++i)
            child[i] += lattice_value(atom.value[i]);
          for (auto& [sp, p] : d.next) {
            auto ni = sets.index_of(h + 1, sp, child);
            if (!ni)
              throw GameError(GameError::Kind::kDomain,
                              "successor of a feasible action missing from "
                              "the feasible sets");
            mass[*ni] += atom.prob * p;
          }
        }
        auto& arcs = r.trans[h - 1][k][ai];
        for (auto& [ni, p] : mass)
          arcs.push_back(ReducedGame::Arc{ni, p, to_double(p)});
      }
    }
  }
  return r;
}

}  // namespace ace

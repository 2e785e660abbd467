#include "ace/feasibility.hpp"

#include <algorithm>
#include <set>

namespace ace {

long long lattice_value(const Rat& scaled_value) {
  if (denominator(scaled_value) != 1)
    throw GameError(GameError::Kind::kPrecision,
                    "value " + rat_to_string(scaled_value) +
                        " is not on the integer lattice");
  const Int& n = numerator(scaled_value);
  if (n > std::numeric_limits<long long>::max() / 4 ||
      n < std::numeric_limits<long long>::min() / 4)
    throw GameError(GameError::Kind::kPrecision,
                    "lattice value out of 64-bit range");
  return n.convert_to<long long>();
}

CostVec lattice_budget(const ConstrainedMarkovGame& scaled) {
  CostVec b;
  for (auto& v : scaled.budget) b.push_back(lattice_value(v));
  return b;
}

size_t FeasibilityDag::or_count() const {
  size_t n = 0;
  for (auto& l : layers) n += l.or_nodes.size();
  return n;
}
size_t FeasibilityDag::and_count() const {
  size_t n = 0;
  for (auto& l : layers) n += l.and_nodes.size();
  return n;
}
size_t FeasibilityDag::edge_count() const {
  size_t n = 0;
  for (auto& l : layers) {
    n += l.and_nodes.size();  // one or->and edge per AND node
    for (auto& an : l.and_nodes) n += an.or_children.size();
  }
  return n;
}

std::optional<int> FeasibleSets::index_of(int h, StateId s,
                                          const CostVec& cbar) const {
  const auto& layer = fs[h - 1];
  auto key = std::make_pair(s, cbar);
  auto it = std::lower_bound(layer.begin(), layer.end(), key);
  if (it == layer.end() || *it != key) return std::nullopt;
  return static_cast<int>(it - layer.begin());
}

namespace {

// Per-(h,s,a) lattice tables: per-player support suprema and the distinct
// joint cost vectors of the support.
struct LatticeTables {
  int S, A;
  std::vector<CostVec> max_cost;                  // [(h-1)*S*A + s*A + a]
  std::vector<std::vector<CostVec>> support;      // same indexing

  size_t idx(int h, StateId s, JointAction a) const {
    return static_cast<size_t>(h - 1) * S * A + static_cast<size_t>(s) * A + a;
  }
};

LatticeTables build_tables(const ConstrainedMarkovGame& g) {
  if (g.has_continuous_costs())
    throw GameError(GameError::Kind::kDomain,
                    "exact feasibility needs finite cost supports; "
                    "use the approximation mode for continuous sources");
  LatticeTables t;
  t.S = g.num_states();
  t.A = g.num_joint_actions();
  size_t total = static_cast<size_t>(g.horizon) * t.S * t.A;
  t.max_cost.resize(total);
  t.support.resize(total);
  for (int h = 1; h <= g.horizon; ++h)
    for (StateId s = 0; s < t.S; ++s)
      for (JointAction a = 0; a < t.A; ++a) {
        size_t k = t.idx(h, s, a);
        auto maxr = g.max_cost_vec(h, s, a);
        for (auto& v : maxr) t.max_cost[k].push_back(lattice_value(v));
        for (auto& atom : g.joint_cost_support(h, s, a)) {
          CostVec c;
          for (auto& v : atom.value) c.push_back(lattice_value(v));
          t.support[k].push_back(std::move(c));
        }
      }
  return t;
}

bool fits(const CostVec& cbar, const CostVec& add, const CostVec& budget) {
  for (size_t i = 0; i < cbar.size(); ++i)
    if (cbar[i] + add[i] > budget[i]) return false;
  return true;
}

}  // namespace

bool is_feasible_action(const ConstrainedMarkovGame& scaled,
                        const CostVec& budget, int h, StateId s,
                        const CostVec& cbar, JointAction a) {
  auto maxr = scaled.max_cost_vec(h, s, a);
  for (size_t i = 0; i < cbar.size(); ++i)
    if (Rat(cbar[i]) + maxr[i] > Rat(budget[i])) return false;
  return true;
}

FeasibilityDag build_feasibility_dag(const ConstrainedMarkovGame& g,
                                     const SizeLimits& limits) {
  LatticeTables tables = build_tables(g);
  FeasibilityDag dag;
  dag.horizon = g.horizon;
  dag.n_players = g.n_players;
  dag.budget = lattice_budget(g);
  dag.layers.resize(g.horizon + 1);

  auto intern = [&](int h, StateId s, const CostVec& cbar) {
    DagLayer& layer = dag.layers[h - 1];
    auto key = std::make_pair(s, cbar);
    auto it = layer.index.find(key);
    if (it != layer.index.end()) return it->second;
    int id = static_cast<int>(layer.or_nodes.size());
    layer.index.emplace(std::move(key), id);
    layer.or_nodes.push_back(OrNode{s, cbar, {}, NodeLabel::kUnlabeled});
    return id;
  };

  long long or_total = 0;
  intern(1, g.initial_state, CostVec(g.n_players, 0));
  ++or_total;

  for (int h = 1; h <= g.horizon; ++h) {
    DagLayer& layer = dag.layers[h - 1];
    // or_nodes of layer h is complete once layer h-1 finished expanding
    for (size_t oi = 0; oi < layer.or_nodes.size(); ++oi) {
      for (JointAction a = 0; a < tables.A; ++a) {
        size_t k = tables.idx(h, layer.or_nodes[oi].s, a);
        if (!fits(layer.or_nodes[oi].cbar, tables.max_cost[k], dag.budget))
          continue;  // some realization would bust the budget: prune
        int ai = static_cast<int>(layer.and_nodes.size());
        layer.and_nodes.push_back(
            AndNode{a, static_cast<int>(oi), {}, NodeLabel::kUnlabeled});
        layer.or_nodes[oi].and_children.push_back(ai);
        for (const CostVec& c : tables.support[k]) {
          CostVec child = layer.or_nodes[oi].cbar;
          for (size_t i = 0; i < child.size(); ++i) child[i] += c[i];
          for (auto& [sp, p] : g.at(h, layer.or_nodes[oi].s, a).next) {
            (void)p;
            size_t before = dag.layers[h].or_nodes.size();
            int ci = intern(h + 1, sp, child);
            if (dag.layers[h].or_nodes.size() > before &&
                ++or_total > limits.max_or_nodes)
              throw GameError(GameError::Kind::kDomain,
                              "feasibility structure exceeds the node cap (" +
                                  std::to_string(limits.max_or_nodes) + ")");
            layer.and_nodes[ai].or_children.push_back(ci);
          }
        }
      }
    }
  }

  std::set<CostVec> distinct;
  for (auto& layer : dag.layers)
    for (auto& node : layer.or_nodes) distinct.insert(node.cbar);
  dag.d_g = static_cast<long long>(distinct.size());
  return dag;
}

void ao_solve(FeasibilityDag& dag) {
  for (auto& node : dag.layers[dag.horizon].or_nodes)
    node.label = NodeLabel::kTrue;
  for (int h = dag.horizon; h >= 1; --h) {
    DagLayer& layer = dag.layers[h - 1];
    const DagLayer& next = dag.layers[h];
    for (auto& an : layer.and_nodes) {
      bool all = true;
      for (int ci : an.or_children)
        if (next.or_nodes[ci].label != NodeLabel::kTrue) {
          all = false;
          break;
        }
      an.label = all ? NodeLabel::kTrue : NodeLabel::kFalse;
    }
    for (auto& on : layer.or_nodes) {
      bool any = false;
      for (int ai : on.and_children)
        if (layer.and_nodes[ai].label == NodeLabel::kTrue) {
          any = true;
          break;
        }
      on.label = any ? NodeLabel::kTrue : NodeLabel::kFalse;
    }
  }
}

std::optional<FeasibleSets> extract_feasible_sets(const FeasibilityDag& dag) {
  if (dag.root_label() != NodeLabel::kTrue) return std::nullopt;

  FeasibleSets out;
  out.horizon = dag.horizon;
  out.n_players = dag.n_players;
  out.d_g = dag.d_g;
  out.fs.resize(dag.horizon + 1);
  out.fa.resize(dag.horizon);

  // Walk only through TRUE nodes: a TRUE node reachable solely via a FALSE
  // action must not survive into the pruned sets.
  std::vector<char> reach(dag.layers[0].or_nodes.size(), 0);
  reach[0] = 1;
  for (int h = 1; h <= dag.horizon + 1; ++h) {
    const DagLayer& layer = dag.layers[h - 1];
    std::vector<int> live;
    for (size_t oi = 0; oi < layer.or_nodes.size(); ++oi)
      if (reach[oi]) live.push_back(static_cast<int>(oi));
    std::sort(live.begin(), live.end(), [&](int x, int y) {
      const OrNode& a = layer.or_nodes[x];
      const OrNode& b = layer.or_nodes[y];
      return std::tie(a.s, a.cbar) < std::tie(b.s, b.cbar);
    });

    std::vector<char> next_reach;
    if (h <= dag.horizon)
      next_reach.assign(dag.layers[h].or_nodes.size(), 0);
    for (int oi : live) {
      const OrNode& node = layer.or_nodes[oi];
      out.fs[h - 1].push_back({node.s, node.cbar});
      if (h > dag.horizon) continue;
      std::vector<JointAction> acts;
      for (int ai : node.and_children) {
        const AndNode& an = layer.and_nodes[ai];
        if (an.label != NodeLabel::kTrue) continue;
        acts.push_back(an.a);
        for (int ci : an.or_children) next_reach[ci] = 1;
      }
      std::sort(acts.begin(), acts.end());
      acts.erase(std::unique(acts.begin(), acts.end()), acts.end());
      out.fa[h - 1].push_back(std::move(acts));
    }
    reach = std::move(next_reach);
  }
  return out;
}

std::optional<FeasibleSets> compute_feasible_sets(
    const ConstrainedMarkovGame& scaled, const SizeLimits& limits) {
  FeasibilityDag dag = build_feasibility_dag(scaled, limits);
  ao_solve(dag);
  return extract_feasible_sets(dag);
}

}  // namespace ace

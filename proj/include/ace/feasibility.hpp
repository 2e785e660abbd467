#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "ace/game.hpp"

namespace ace {

// Cumulative scaled costs live on an integer lattice; one entry per player.
using CostVec = std::vector<long long>;

enum class NodeLabel : uint8_t { kUnlabeled, kTrue, kFalse };

struct OrNode {
  StateId s;
  CostVec cbar;                    // cost accrued before this step
  std::vector<int> and_children;   // same-layer AndNode indices
  NodeLabel label = NodeLabel::kUnlabeled;
};

struct AndNode {
  JointAction a;
  int parent;                      // same-layer OrNode index
  std::vector<int> or_children;    // next-layer OrNode indices
  NodeLabel label = NodeLabel::kUnlabeled;
};

struct DagLayer {
  std::vector<OrNode> or_nodes;
  std::vector<AndNode> and_nodes;
  std::map<std::pair<StateId, CostVec>, int> index;
};

struct FeasibilityDag {
  int horizon = 0;
  int n_players = 0;
  CostVec budget;
  std::vector<DagLayer> layers;    // layers[h-1], h = 1..H+1
  long long d_g = 0;               // distinct cumulative vectors over OR nodes

  size_t or_count() const;
  size_t and_count() const;
  size_t edge_count() const;
  NodeLabel root_label() const { return layers[0].or_nodes[0].label; }
};

struct SizeLimits {
  long long max_or_nodes = 10'000'000;
};

struct FeasibleSets {
  int horizon = 0;
  int n_players = 0;
  // fs[h-1] for h = 1..H+1: augmented states, sorted by (state, cost vector).
  std::vector<std::vector<std::pair<StateId, CostVec>>> fs;
  // fa[h-1][k] for h = 1..H: allowed joint actions of fs[h-1][k], ascending.
  std::vector<std::vector<std::vector<JointAction>>> fa;
  long long d_g = 0;

  std::optional<int> index_of(int h, StateId s, const CostVec& cbar) const;
};

// True iff every cost realization of (h,s,a) keeps cbar + c within budget,
// i.e. the per-player supremum of the support fits. Scaled game only.
bool is_feasible_action(const ConstrainedMarkovGame& scaled, const CostVec& budget,
                        int h, StateId s, const CostVec& cbar, JointAction a);

FeasibilityDag build_feasibility_dag(const ConstrainedMarkovGame& scaled,
                                     const SizeLimits& limits = {});

// Labels every node: leaves TRUE, AND = conjunction over children,
// OR = disjunction (FALSE when no feasible action). Reverse-time sweep.
void ao_solve(FeasibilityDag& dag);

// Collects the TRUE nodes reachable from the root through TRUE nodes only.
// Returns nothing when the root is FALSE (the instance is infeasible).
std::optional<FeasibleSets> extract_feasible_sets(const FeasibilityDag& dag);

// build + ao_solve + extract in one call.
std::optional<FeasibleSets> compute_feasible_sets(
    const ConstrainedMarkovGame& scaled, const SizeLimits& limits = {});

// Exact integer from a scaled (integral) rational, with an int64 range check.
long long lattice_value(const Rat& scaled_value);

CostVec lattice_budget(const ConstrainedMarkovGame& scaled);

}  // namespace ace

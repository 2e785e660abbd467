#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ace/feasibility.hpp"
#include "ace/game.hpp"

namespace ace {

// A behavior history of the original game on the scaled cost lattice.
struct HistoryStep {
  JointAction a;
  CostVec cost;   // realized joint cost of the step
  StateId next;
};

struct History {
  StateId initial;
  std::vector<HistoryStep> steps;
};

// The same history expressed over augmented (state, cumulative-cost) pairs.
struct AugmentedHistory {
  std::vector<std::pair<StateId, CostVec>> states;  // length steps+1
  std::vector<JointAction> actions;
};

AugmentedHistory translate_history(const History& h, int n_players);
History invert_history(const AugmentedHistory& h);

// Joint Markov policy over augmented states: pi[h-1][k] is a sparse
// distribution (ascending flat joint-action ids) for the k-th state of
// layer h.
template <typename Scalar>
struct MarkovPolicy {
  std::vector<std::vector<std::vector<std::pair<JointAction, Scalar>>>> pi;
};

// The cost-augmented unconstrained game: states are the feasible (s, cbar)
// pairs, actions the feasible joint actions, transitions fold the cost draw
// into the state, rewards carry over from the base game.
struct ReducedGame {
  struct Arc {
    int next;   // index into states[h] (the next layer)
    Rat p;
    double pd;  // double mirror of p
  };

  int horizon = 0;
  int n_players = 0;
  std::vector<int> action_counts;
  int num_joint = 0;
  Int cost_scale = 1;          // lattice unit of cbar entries, for display only
  std::vector<Rat> budget;     // original units, for display only

  std::vector<std::string> state_names;
  std::vector<std::vector<std::string>> action_names;

  std::vector<std::vector<std::pair<StateId, CostVec>>> states;  // [h-1]
  std::vector<std::vector<std::vector<JointAction>>> allowed;    // [h-1][k]
  std::vector<std::vector<std::vector<std::vector<Arc>>>> trans; // [h-1][k][ai]
  std::vector<std::vector<std::vector<std::vector<Rat>>>> reward;  // [h-1][k][ai][i]
  std::vector<std::vector<char>> is_product;                     // [h-1][k]
  long long d_g = 0;

  int layer_size(int h) const { return static_cast<int>(states[h - 1].size()); }
  std::optional<int> index_of(int h, StateId s, const CostVec& cbar) const;
  // Position of joint action a within allowed[h-1][k], if allowed.
  std::optional<int> allowed_index(int h, int k, JointAction a) const;
  int non_product_states() const;
  std::string aug_state_name(int h, int k) const;  // "(s,[c1,...])", original units
};

ReducedGame build_reduced_game(const ConstrainedMarkovGame& scaled,
                               const FeasibleSets& sets,
                               const Int& original_scale);

// True iff the action set is the product of its per-player projections.
bool is_product_set(const std::vector<JointAction>& actions,
                    const std::vector<int>& action_counts);

}  // namespace ace

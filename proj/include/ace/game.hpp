#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ace/rational.hpp"

namespace ace {

using StateId = int;
using PlayerId = int;
// Flat joint-action index, player-1-major mixed radix over per-player counts.
using JointAction = int;

struct CostAtom {
  Rat value;
  Rat prob;
};

struct UniformRange {
  Rat lo, hi;
};

// One player's stage cost source: a finite support (atoms sorted by value,
// probabilities summing to one) or a uniform interval.
struct CostDist {
  std::vector<CostAtom> atoms;
  std::optional<UniformRange> uniform;

  bool continuous() const { return uniform.has_value(); }
  Rat max_support() const {
    return continuous() ? uniform->hi : atoms.back().value;
  }
  Rat min_support() const {
    return continuous() ? uniform->lo : atoms.front().value;
  }
};

struct JointCostAtom {
  std::vector<Rat> value;  // one entry per player
  Rat prob;
};

struct StageDynamics {
  std::vector<std::pair<StateId, Rat>> next;  // sparse, sorted, sums to one
  std::vector<Rat> reward;                    // expected, per player
  std::vector<CostDist> cost;                 // product form, one per player
  std::vector<JointCostAtom> cost_joint;      // joint form (exclusive)

  bool joint_form() const { return cost.empty(); }
};

struct ConstrainedMarkovGame {
  int n_players = 0;
  std::vector<std::string> state_names;
  StateId initial_state = 0;
  int horizon = 0;
  std::vector<Rat> budget;
  std::vector<std::vector<std::string>> action_names;
  std::vector<std::vector<std::vector<StageDynamics>>> dyn;  // [h-1][s][joint]
  Int cost_scale = 1;  // Lambda: every cost/budget times Lambda is integral

  int num_states() const { return static_cast<int>(state_names.size()); }
  int action_count(PlayerId i) const {
    return static_cast<int>(action_names[i].size());
  }
  int num_joint_actions() const {
    int m = 1;
    for (auto& a : action_names) m *= static_cast<int>(a.size());
    return m;
  }
  JointAction encode_action(const std::vector<int>& per_player) const {
    JointAction idx = 0;
    for (int i = 0; i < n_players; ++i) idx = idx * action_count(i) + per_player[i];
    return idx;
  }
  std::vector<int> decode_action(JointAction idx) const {
    std::vector<int> out(n_players);
    for (int i = n_players - 1; i >= 0; --i) {
      out[i] = idx % action_count(i);
      idx /= action_count(i);
    }
    return out;
  }
  std::string joint_action_name(JointAction a) const;

  const StageDynamics& at(int h, StateId s, JointAction a) const {
    return dyn[h - 1][s][a];
  }

  bool has_continuous_costs() const;
  bool has_joint_costs() const;

  // Full joint cost support of (h,s,a): product expansion (atom combinations
  // in player-major order) or the stored joint list. Finite sources only.
  std::vector<JointCostAtom> joint_cost_support(int h, StateId s,
                                                JointAction a) const;

  // Per-player supremum of the stage cost support (exact; defined for
  // continuous sources too).
  std::vector<Rat> max_cost_vec(int h, StateId s, JointAction a) const;

  // Global per-player cost supremum over all stages/states/actions.
  std::vector<Rat> global_max_cost() const;
};

struct ValidationReport {
  std::vector<std::string> violations;
  bool valid() const { return violations.empty(); }
};

struct ParseOptions {
  bool enforce_precision_cap = true;
  Int precision_cap = Int(1) << 31;  // bound on Lambda * max|cost| * H
};

class GameError : public std::runtime_error {
 public:
  enum class Kind { kSchema, kPrecision, kDomain };
  GameError(Kind k, const std::string& msg)
      : std::runtime_error(msg), kind(k) {}
  Kind kind;
};

ConstrainedMarkovGame parse_game(const std::string& text,
                                 const ParseOptions& opts = {});
ConstrainedMarkovGame parse_game_file(const std::string& path,
                                      const ParseOptions& opts = {});
std::string serialize_game(const ConstrainedMarkovGame& g);
ValidationReport validate_game(const ConstrainedMarkovGame& g);

// Multiplies every cost and budget by cost_scale; the result has
// cost_scale == 1 and integer costs/budgets on the unit lattice.
ConstrainedMarkovGame scale_costs(const ConstrainedMarkovGame& g);

// LCM of the denominators of every finite cost atom and budget entry.
Int compute_cost_scale(const ConstrainedMarkovGame& g);

// Rejects games whose exact lattice would overflow the configured bound on
// cost_scale * max|cost| * horizon. Throws a precision error.
void enforce_precision_cap(const ConstrainedMarkovGame& g,
                           const ParseOptions& opts);

}  // namespace ace

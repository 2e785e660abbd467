#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "ace/approximation.hpp"
#include "ace/reduction.hpp"
#include "ace/solver.hpp"

namespace ace {

struct RolloutStats {
  long long rollouts = 0;
  long long violations = 0;          // rollouts exceeding budget + allowance
  long long missing_policy = 0;      // steps outside the policy's domain
  long long sandwich_violations = 0; // approx: surrogate invariant failures
  std::vector<Rat> max_overshoot;    // per player: max_h (cbar_i,h - B_i)
  std::vector<double> mean_return;
  std::vector<double> stderr_return;
  uint64_t seed = 0;
};

// N seeded rollouts of the lifted policy in the scaled game; costs accumulate
// on the exact lattice, overshoot is measured against the scaled budget and
// reported in original units. Draw order per step: action, cost, next state.
RolloutStats simulate_rollouts(const ConstrainedMarkovGame& scaled,
                               const ReducedGame& reduced,
                               const MarkovPolicy<double>& policy,
                               long long n, uint64_t seed);

// Rollouts of an approximate solution in the ORIGINAL game: true costs are
// sampled from the original sources (finite atoms or uniform intervals, the
// latter drawn as exact dyadic rationals), while the policy is driven by the
// grid surrogate cumulative cost. Overshoot is true cost vs. the original
// budget; a rollout counts as a violation when it exceeds the per-player
// allowance of the guarantee. The surrogate/true sandwich is asserted each
// step.
RolloutStats simulate_rollouts_approx(const ConstrainedMarkovGame& original,
                                      const RoundingSpec& grid,
                                      const ReducedGame& reduced,
                                      const MarkovPolicy<double>& policy,
                                      long long n, uint64_t seed);

struct DeviationReport {
  struct Entry {
    int player;
    int h;
    int k;                   // state index within layer h
    double deviation_value;  // -inf when no feasible deviation exists
    double policy_value;
    double gap;
  };
  std::vector<Entry> entries;
  double max_gap = -std::numeric_limits<double>::infinity();
};

// Best feasible unilateral Markov deviation for one player by backward
// induction: at each augmented state the deviator best-responds against the
// other players' conditional play, restricted to deviations that keep the
// joint action allowed for every support profile of the others.
DeviationReport best_feasible_deviation(const ReducedGame& g,
                                        const MarkovPolicy<double>& policy,
                                        PlayerId player);

struct BruteCaps {
  long long max_work = 100000;  // bound on H * S * A * (distinct cost vectors)
};

// Definitional recomputation of the feasible sets by memoized recursion —
// shares no code with the feasibility module. Returns nothing if infeasible.
std::optional<FeasibleSets> brute_force_feasible_sets(
    const ConstrainedMarkovGame& scaled, const BruteCaps& caps = {});

struct CheckReport {
  bool support_ok = false;      // policy mass confined to allowed actions
  bool coverage_ok = false;     // policy defined at every augmented state
  bool consistency_ok = false;  // re-evaluated values match within tolerance
  bool rollouts_ok = false;     // zero violations, no domain misses
  bool deviations_ok = false;   // all gaps within tolerance
  bool oracle_ok = true;        // brute-force feasible-set equality
  bool oracle_ran = false;
  double max_value_diff = 0;
  double max_gap = -std::numeric_limits<double>::infinity();
  RolloutStats stats;
  bool pass() const {
    return support_ok && coverage_ok && consistency_ok && rollouts_ok &&
           deviations_ok && oracle_ok;
  }
};

inline constexpr double kValueTolerance = 1e-8;
inline constexpr double kGapTolerance = 1e-6;

// Runs every check against the artifacts of a solve: support containment,
// policy coverage, value consistency, rollouts (true-cost for approximate
// solutions), deviation gaps, and (at small sizes) the brute-force oracle.
// `original` is the game as parsed, before any rounding or scaling.
CheckReport check_solution(const ConstrainedMarkovGame& original,
                           const SolveArtifacts& art, long long rollouts,
                           uint64_t seed, bool run_oracle = true);

}  // namespace ace

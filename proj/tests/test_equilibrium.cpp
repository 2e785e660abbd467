#include <doctest.h>

#include "ace/equilibrium.hpp"
#include "ace/solver.hpp"
#include "test_helpers.hpp"

using namespace ace;

namespace {

SolveArtifacts must_solve(const std::string& rel, EquilibriumKind kind,
                          bool exact = false) {
  auto g = parse_game_file(g_repo_root + "/" + rel);
  SolveOptions opts;
  opts.kind = kind;
  opts.exact = exact;
  auto art = solve_acmg(g, opts);
  REQUIRE(art.has_value());
  return std::move(*art);
}

int root_index(const ReducedGame& g) {
  // initial augmented state carries zero spend
  auto k = g.index_of(1, 0, CostVec(g.n_players, 0));
  REQUIRE(k.has_value());
  return *k;
}

}  // namespace

TEST_CASE("single-agent play collapses to the constrained optimum") {
  for (const char* rel :
       {"corpus/minimal.json", "corpus/chain1p.json", "corpus/negcost.json"}) {
    INFO(rel);
    auto g = parse_game_file(g_repo_root + "/" + rel);
    helpers::SingleAgentOracle oracle(g);
    auto best = oracle.optimum();
    REQUIRE(best.has_value());
    for (auto kind : {EquilibriumKind::kCCE, EquilibriumKind::kCE}) {
      auto art = must_solve(rel, kind);
      double v = art.sol.values[0][root_index(art.reduced)][0];
      CHECK(v == doctest::Approx(to_double(*best)).epsilon(1e-10));
    }
  }
}

TEST_CASE("known single-agent values") {
  auto art = must_solve("corpus/minimal.json", EquilibriumKind::kCCE);
  CHECK(art.sol.values[0][0][0] == doctest::Approx(4.0));  // risky then safe
  auto art2 = must_solve("corpus/negcost.json", EquilibriumKind::kCCE);
  CHECK(art2.sol.values[0][0][0] == doctest::Approx(2.0));  // earn twice
}

TEST_CASE("repeated matching pennies is worth zero to both sides") {
  for (auto kind : {EquilibriumKind::kCCE, EquilibriumKind::kCE}) {
    auto art = must_solve("corpus/zerosum.json", kind, /*exact=*/true);
    int k0 = root_index(art.reduced);
    CHECK(art.sol.values[0][k0][0] == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(art.sol.values[0][k0][1] == doctest::Approx(0.0).epsilon(1e-9));
    REQUIRE(art.sol_exact.has_value());
    CHECK(art.sol_exact->values[0][k0][0] == Rat(0));
    CHECK(art.sol_exact->values[0][k0][1] == Rat(0));
  }
}

TEST_CASE("solution values agree with a fresh policy evaluation") {
  for (const char* rel : {"corpus/stochcost.json", "corpus/nonproduct.json",
                          "corpus/unconstrained.json"}) {
    auto art = must_solve(rel, EquilibriumKind::kCE);
    auto values = evaluate_policy<double>(art.reduced, art.sol.policy);
    for (size_t h = 0; h < values.size(); ++h)
      for (size_t k = 0; k < values[h].size(); ++k)
        for (size_t i = 0; i < values[h][k].size(); ++i)
          CHECK(values[h][k][i] ==
                doctest::Approx(art.sol.values[h][k][i]).epsilon(1e-9));
  }
}

TEST_CASE("exact solutions satisfy every stage constraint with zero slack") {
  for (auto kind : {EquilibriumKind::kCCE, EquilibriumKind::kCE}) {
    auto art = must_solve("corpus/stochcost.json", kind, /*exact=*/true);
    REQUIRE(art.sol_exact.has_value());
    const auto& sol = *art.sol_exact;
    const ReducedGame& g = art.reduced;
    for (int h = g.horizon; h >= 1; --h)
      for (int k = 0; k < g.layer_size(h); ++k) {
        // rebuild the very program the stage was solved with and replay its
        // rows against the stored distribution, in exact arithmetic
        StageQ<Rat> sq = stage_q(g, h, k, sol.values[h]);
        auto m = sanitize_utilities(stage_matrix_game(g, sq));
        auto sys = build_clp(m, kind);
        std::map<int, Rat> sigma;
        for (auto& [a, p] : sol.policy.pi[h - 1][k]) sigma[a] = p;
        for (const auto& row : sys.prob.rows) {
          Rat lhs(0);
          for (size_t c = 0; c < sys.x_actions.size(); ++c) {
            auto it = sigma.find(sys.x_actions[c]);
            if (it != sigma.end()) lhs += row.a[c] * it->second;
          }
          if (row.type == lp::RowType::kGe) CHECK(lhs >= row.rhs);
          if (row.type == lp::RowType::kEq) CHECK(lhs == row.rhs);
        }
      }
  }
}

TEST_CASE("unbinding budgets make values depend on the base state only") {
  auto art = must_solve("corpus/unconstrained.json", EquilibriumKind::kCCE);
  const ReducedGame& g = art.reduced;
  for (int h = 1; h <= g.horizon; ++h) {
    std::map<StateId, std::vector<double>> seen;
    for (int k = 0; k < g.layer_size(h); ++k) {
      StateId s = g.states[h - 1][k].first;
      auto& v = art.sol.values[h - 1][k];
      auto it = seen.find(s);
      if (it == seen.end()) {
        seen[s] = v;
      } else {
        for (int i = 0; i < g.n_players; ++i)
          CHECK(v[i] == doctest::Approx(it->second[i]).epsilon(1e-9));
      }
    }
  }
}

TEST_CASE("policy evaluation rejects mass outside the allowed set") {
  auto art = must_solve("corpus/nonproduct.json", EquilibriumKind::kCCE);
  MarkovPolicy<double> bad;
  bad.pi.resize(1);
  bad.pi[0].resize(art.reduced.layer_size(1));
  bad.pi[0][0] = {{3, 1.0}};  // (b,y) is infeasible at the root
  try {
    evaluate_policy<double>(art.reduced, bad);
    FAIL_CHECK("expected a domain rejection");
  } catch (const GameError& e) {
    CHECK(e.kind == GameError::Kind::kDomain);
  }
}

TEST_CASE("stage distributions are sorted, positive, and confined") {
  for (auto kind : {EquilibriumKind::kCCE, EquilibriumKind::kCE}) {
    auto art = must_solve("corpus/seventh.json", kind);
    const ReducedGame& g = art.reduced;
    for (int h = 1; h <= g.horizon; ++h)
      for (int k = 0; k < g.layer_size(h); ++k) {
        const auto& dist = art.sol.policy.pi[h - 1][k];
        REQUIRE(!dist.empty());
        double mass = 0;
        for (size_t j = 0; j < dist.size(); ++j) {
          if (j) CHECK(dist[j].first > dist[j - 1].first);
          CHECK(dist[j].second > 0);
          CHECK(g.allowed_index(h, k, dist[j].first).has_value());
          mass += dist[j].second;
        }
        CHECK(mass == doctest::Approx(1.0).epsilon(1e-12));
      }
  }
}

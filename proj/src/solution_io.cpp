#include "ace/solution_io.hpp"

#include <json.hpp>

#include <map>

namespace ace {

using json = nlohmann::ordered_json;

namespace {

GameError bad_doc(const std::string& msg) {
  return GameError(GameError::Kind::kSchema, "solution document: " + msg);
}

json cost_vec_json(const ReducedGame& g, const CostVec& cbar) {
  json out = json::array();
  for (long long v : cbar)
    out.push_back(rat_to_string(Rat(Int(v), g.cost_scale)));
  return out;
}

json action_names_json(const ReducedGame& g, JointAction a) {
  json out = json::array();
  auto per = decode_joint(a, g.action_counts);
  for (int i = 0; i < g.n_players; ++i) out.push_back(g.action_names[i][per[i]]);
  return out;
}

}  // namespace

std::string serialize_solution(const SolveArtifacts& art) {
  const ReducedGame& g = art.reduced;
  bool exact = art.sol_exact.has_value();
  json doc;
  doc["kind"] = kind_name(art.sol.kind);
  doc["exact"] = exact;
  doc["players"] = g.n_players;
  doc["horizon"] = g.horizon;
  doc["cost_scale"] = g.cost_scale.str();

  json meta;
  meta["d_g"] = g.d_g;
  meta["non_product_states"] = g.non_product_states();
  doc["metadata"] = meta;

  if (art.grid) {
    const RoundingSpec& spec = *art.grid;
    json ax;
    ax["mode"] = mode_name(spec.mode);
    ax["eps"] = rat_to_string(spec.eps);
    json ell = json::array(), fl = json::array(), low = json::array(),
         ex = json::array(), allow = json::array(), atoms = json::array();
    for (int i = 0; i < g.n_players; ++i) {
      ell.push_back(rat_to_string(spec.ell[i]));
      fl.push_back(rat_to_string(spec.floor_val[i]));
      low.push_back(rat_to_string(spec.lowest_atom[i]));
      ex.push_back(static_cast<bool>(spec.exempt[i]));
      allow.push_back(
          rat_to_string(spec.allowance(i, art.rounded->budget[i])));
      size_t mx = 0;
      for (const auto& layer : art.rounded->dyn)
        for (const auto& row : layer)
          for (const StageDynamics& d : row)
            mx = std::max(mx, d.cost[i].atoms.size());
      atoms.push_back(mx);
    }
    ax["ell"] = ell;
    ax["floor"] = fl;
    ax["lowest_atom"] = low;
    ax["exempt"] = ex;
    ax["allowance"] = allow;
    ax["atoms"] = atoms;
    doc["approx"] = ax;
  }

  json policy = json::array();
  json values = json::array();
  for (int h = 1; h <= g.horizon + 1; ++h)
    for (int k = 0; k < g.layer_size(h); ++k) {
      const auto& [s, cbar] = g.states[h - 1][k];
      json row;
      row["h"] = h;
      row["s"] = g.state_names[s];
      row["c"] = cost_vec_json(g, cbar);
      if (h <= g.horizon) {
        json acts = json::array();
        if (exact) {
          for (auto& [a, p] : art.sol_exact->policy.pi[h - 1][k])
            acts.push_back(
                {{"a", action_names_json(g, a)}, {"p", rat_to_string(p)}});
        } else {
          for (auto& [a, p] : art.sol.policy.pi[h - 1][k])
            acts.push_back({{"a", action_names_json(g, a)}, {"p", p}});
        }
        json prow = row;
        prow["actions"] = acts;
        policy.push_back(prow);
      }
      json vrow = row;
      json v = json::array();
      for (int i = 0; i < g.n_players; ++i) {
        if (exact)
          v.push_back(rat_to_string(art.sol_exact->values[h - 1][k][i]));
        else
          v.push_back(art.sol.values[h - 1][k][i]);
      }
      vrow["v"] = v;
      values.push_back(vrow);
    }
  doc["policy"] = policy;
  doc["values"] = values;
  return doc.dump(2) + "\n";
}

namespace {

double number_or_rational(const json& j, const std::string& where) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) return to_double(parse_rational(j.get<std::string>()));
  throw bad_doc(where + ": expected number or rational string");
}

}  // namespace

SolutionHeader parse_solution_header(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const std::exception& e) {
    throw bad_doc(std::string("invalid JSON: ") + e.what());
  }
  SolutionHeader h;
  if (!doc.contains("kind") || !doc["kind"].is_string())
    throw bad_doc("missing kind");
  std::string k = doc["kind"].get<std::string>();
  if (k == "cce")
    h.kind = EquilibriumKind::kCCE;
  else if (k == "ce")
    h.kind = EquilibriumKind::kCE;
  else
    throw bad_doc("unknown kind '" + k + "'");
  h.exact = doc.value("exact", false);
  if (doc.contains("approx")) {
    const json& ax = doc["approx"];
    h.approx = true;
    if (!ax.contains("eps") || !ax.contains("mode"))
      throw bad_doc("approx block needs eps and mode");
    h.eps = parse_rational(ax["eps"].get<std::string>());
    std::string m = ax["mode"].get<std::string>();
    if (m == "additive")
      h.mode = RoundingMode::kAdditive;
    else if (m == "relative")
      h.mode = RoundingMode::kRelative;
    else
      throw bad_doc("unknown mode '" + m + "'");
  }
  return h;
}

void apply_solution_document(SolveArtifacts& art, const std::string& text) {
  const ReducedGame& g = art.reduced;
  json doc = json::parse(text);

  std::map<std::string, StateId> state_index;
  for (StateId s = 0; s < static_cast<int>(g.state_names.size()); ++s)
    state_index[g.state_names[s]] = s;
  std::vector<std::map<std::string, int>> action_index(g.n_players);
  for (int i = 0; i < g.n_players; ++i)
    for (int ai = 0; ai < g.action_counts[i]; ++ai)
      action_index[i][g.action_names[i][ai]] = ai;

  auto locate = [&](const json& row, const std::string& where) {
    if (!row.contains("h") || !row.contains("s") || !row.contains("c"))
      throw bad_doc(where + ": needs h, s, c");
    int h = row["h"].get<int>();
    if (h < 1 || h > g.horizon + 1) throw bad_doc(where + ": h out of range");
    auto si = state_index.find(row["s"].get<std::string>());
    if (si == state_index.end()) throw bad_doc(where + ": unknown state");
    CostVec cbar;
    for (auto& cj : row["c"]) {
      Rat c = parse_rational(cj.get<std::string>());
      Rat scaled = c * g.cost_scale;
      if (denominator(scaled) != 1)
        throw bad_doc(where + ": cost off the solved lattice");
      cbar.push_back(numerator(scaled).convert_to<long long>());
    }
    auto k = g.index_of(h, si->second, cbar);
    if (!k)
      throw bad_doc(where + ": state not in the feasible sets");
    return std::make_pair(h, *k);
  };

  MarkovPolicy<double> pol;
  pol.pi.resize(g.horizon);
  for (int h = 1; h <= g.horizon; ++h)
    pol.pi[h - 1].resize(g.layer_size(h));
  std::vector<std::vector<char>> seen(g.horizon);
  for (int h = 1; h <= g.horizon; ++h)
    seen[h - 1].assign(g.layer_size(h), 0);

  if (!doc.contains("policy") || !doc["policy"].is_array())
    throw bad_doc("missing policy");
  for (size_t r = 0; r < doc["policy"].size(); ++r) {
    const json& row = doc["policy"][r];
    std::string where = "policy[" + std::to_string(r) + "]";
    auto [h, k] = locate(row, where);
    if (h > g.horizon) throw bad_doc(where + ": h beyond the last decision");
    if (seen[h - 1][k]) throw bad_doc(where + ": duplicate state row");
    seen[h - 1][k] = 1;
    if (!row.contains("actions") || !row["actions"].is_array() ||
        row["actions"].empty())
      throw bad_doc(where + ": needs nonempty actions");
    for (auto& aj : row["actions"]) {
      std::vector<int> per(g.n_players);
      if (!aj.contains("a") ||
          static_cast<int>(aj["a"].size()) != g.n_players)
        throw bad_doc(where + ": action tuple arity");
      for (int i = 0; i < g.n_players; ++i) {
        auto it = action_index[i].find(aj["a"][i].get<std::string>());
        if (it == action_index[i].end())
          throw bad_doc(where + ": unknown action name");
        per[i] = it->second;
      }
      double p = number_or_rational(aj["p"], where + ".p");
      pol.pi[h - 1][k].push_back({encode_joint(per, g.action_counts), p});
    }
    auto& dist = pol.pi[h - 1][k];
    std::sort(dist.begin(), dist.end());
  }
  for (int h = 1; h <= g.horizon; ++h)
    for (int k = 0; k < g.layer_size(h); ++k)
      if (!seen[h - 1][k])
        throw bad_doc("policy does not cover every augmented state (h=" +
                      std::to_string(h) + ")");

  std::vector<std::vector<std::vector<double>>> values(g.horizon + 1);
  std::vector<std::vector<char>> vseen(g.horizon + 1);
  for (int h = 1; h <= g.horizon + 1; ++h) {
    values[h - 1].assign(g.layer_size(h),
                         std::vector<double>(g.n_players, 0.0));
    vseen[h - 1].assign(g.layer_size(h), 0);
  }
  if (!doc.contains("values") || !doc["values"].is_array())
    throw bad_doc("missing values");
  for (size_t r = 0; r < doc["values"].size(); ++r) {
    const json& row = doc["values"][r];
    std::string where = "values[" + std::to_string(r) + "]";
    auto [h, k] = locate(row, where);
    if (vseen[h - 1][k]) throw bad_doc(where + ": duplicate state row");
    vseen[h - 1][k] = 1;
    if (!row.contains("v") || static_cast<int>(row["v"].size()) != g.n_players)
      throw bad_doc(where + ": needs one value per player");
    for (int i = 0; i < g.n_players; ++i)
      values[h - 1][k][i] = number_or_rational(row["v"][i], where + ".v");
  }
  for (int h = 1; h <= g.horizon + 1; ++h)
    for (int k = 0; k < g.layer_size(h); ++k)
      if (!vseen[h - 1][k])
        throw bad_doc("values do not cover every augmented state");

  art.sol.policy = std::move(pol);
  art.sol.values = std::move(values);
  art.sol_exact.reset();
}

std::string serialize_reduced_game(const ReducedGame& g) {
  json doc;
  doc["augmented"] = true;
  doc["players"] = g.n_players;
  json states = json::array();
  for (int h = 1; h <= g.horizon + 1; ++h)
    for (int k = 0; k < g.layer_size(h); ++k)
      states.push_back("h" + std::to_string(h) + ":" + g.aug_state_name(h, k));
  doc["states"] = states;
  doc["initial_state"] = "h1:" + g.aug_state_name(1, 0);
  doc["horizon"] = g.horizon;
  json budget = json::array();
  for (const Rat& b : g.budget) budget.push_back(rat_to_string(b));
  doc["budget"] = budget;
  doc["actions"] = g.action_names;
  json allowed;
  json dynamics = json::array();
  for (int h = 1; h <= g.horizon; ++h)
    for (int k = 0; k < g.layer_size(h); ++k) {
      std::string name = "h" + std::to_string(h) + ":" + g.aug_state_name(h, k);
      json acts = json::array();
      for (size_t ai = 0; ai < g.allowed[h - 1][k].size(); ++ai) {
        JointAction a = g.allowed[h - 1][k][ai];
        acts.push_back(action_names_json(g, a));
        json e;
        e["h"] = h;
        e["s"] = name;
        e["a"] = action_names_json(g, a);
        json next;
        for (const auto& arc : g.trans[h - 1][k][ai])
          next["h" + std::to_string(h + 1) + ":" +
               g.aug_state_name(h + 1, arc.next)] = rat_to_string(arc.p);
        e["next"] = next;
        json reward = json::array();
        for (int i = 0; i < g.n_players; ++i)
          reward.push_back(rat_to_string(g.reward[h - 1][k][ai][i]));
        e["reward"] = reward;
        dynamics.push_back(e);
      }
      json entry;
      entry["actions"] = acts;
      entry["product"] = static_cast<bool>(g.is_product[h - 1][k]);
      allowed[name] = entry;
    }
  doc["allowed_actions"] = allowed;
  doc["dynamics"] = dynamics;
  json meta;
  meta["d_g"] = g.d_g;
  meta["non_product_states"] = g.non_product_states();
  meta["cost_scale"] = g.cost_scale.str();
  doc["metadata"] = meta;
  return doc.dump(2) + "\n";
}

}  // namespace ace

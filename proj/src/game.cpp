#include "ace/game.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace ace {

using json = nlohmann::ordered_json;

namespace {

GameError schema_error(const std::string& msg) {
  return GameError(GameError::Kind::kSchema, msg);
}

Rat rational_field(const json& j, const std::string& where) {
  if (j.is_string()) {
    try {
      return parse_rational(j.get<std::string>());
    } catch (const std::exception& e) {
      throw schema_error(where + ": " + e.what());
    }
  }
  if (j.is_number_integer()) return Rat(Int(j.get<int64_t>()));
  if (j.is_number_unsigned()) return Rat(Int(j.get<uint64_t>()));
  if (j.is_number_float()) {
    double d = j.get<double>();
    if (!std::isfinite(d)) throw schema_error(where + ": non-finite number");
    return rational_from_double(d);
  }
  throw schema_error(where + ": expected a rational (string or number)");
}

// Normalizes a finite support: probabilities nonnegative and summing to one
// exactly, equal values merged, zero-probability atoms dropped.
std::vector<CostAtom> normalize_atoms(std::vector<CostAtom> atoms,
                                      const std::string& where) {
  Rat total = 0;
  for (auto& a : atoms) {
    if (a.prob < 0) throw schema_error(where + ": negative probability");
    total += a.prob;
  }
  if (total != 1) throw schema_error(where + ": probabilities sum to " +
                                     rat_to_string(total) + ", expected 1");
  std::sort(atoms.begin(), atoms.end(),
            [](const CostAtom& x, const CostAtom& y) { return x.value < y.value; });
  std::vector<CostAtom> out;
  for (auto& a : atoms) {
    if (a.prob == 0) continue;
    if (!out.empty() && out.back().value == a.value)
      out.back().prob += a.prob;
    else
      out.push_back(a);
  }
  if (out.empty()) throw schema_error(where + ": empty support");
  return out;
}

CostDist parse_cost_dist(const json& j, const std::string& where) {
  CostDist d;
  if (j.is_object() && j.contains("uniform")) {
    const json& u = j.at("uniform");
    if (!u.is_object() || !u.contains("lo") || !u.contains("hi"))
      throw schema_error(where + ": uniform needs lo and hi");
    d.uniform = UniformRange{rational_field(u.at("lo"), where + ".lo"),
                             rational_field(u.at("hi"), where + ".hi")};
    if (!(d.uniform->lo < d.uniform->hi))
      throw schema_error(where + ": uniform needs lo < hi");
    return d;
  }
  if (!j.is_array()) throw schema_error(where + ": expected atom array");
  std::vector<CostAtom> atoms;
  for (size_t k = 0; k < j.size(); ++k) {
    const json& a = j[k];
    std::string aw = where + "[" + std::to_string(k) + "]";
    if (!a.is_object() || !a.contains("value") || !a.contains("prob"))
      throw schema_error(aw + ": atom needs value and prob");
    atoms.push_back({rational_field(a.at("value"), aw + ".value"),
                     rational_field(a.at("prob"), aw + ".prob")});
  }
  d.atoms = normalize_atoms(std::move(atoms), where);
  return d;
}

void accumulate_denominator(Int& lambda, const Rat& v) {
  lambda = lcm_int(lambda, denominator(v));
}

}  // namespace

std::string ConstrainedMarkovGame::joint_action_name(JointAction a) const {
  auto per = decode_action(a);
  std::string out = "(";
  for (int i = 0; i < n_players; ++i) {
    if (i) out += ",";
    out += action_names[i][per[i]];
  }
  return out + ")";
}

bool ConstrainedMarkovGame::has_continuous_costs() const {
  for (auto& hs : dyn)
    for (auto& sa : hs)
      for (auto& d : sa)
        for (auto& c : d.cost)
          if (c.continuous()) return true;
  return false;
}

bool ConstrainedMarkovGame::has_joint_costs() const {
  for (auto& hs : dyn)
    for (auto& sa : hs)
      for (auto& d : sa)
        if (d.joint_form()) return true;
  return false;
}

std::vector<JointCostAtom> ConstrainedMarkovGame::joint_cost_support(
    int h, StateId s, JointAction a) const {
  const StageDynamics& d = at(h, s, a);
  if (d.joint_form()) return d.cost_joint;
  for (auto& c : d.cost)
    if (c.continuous())
      throw GameError(GameError::Kind::kDomain,
                      "joint_cost_support on a continuous cost source");
  // product expansion, player-major atom order
  std::vector<JointCostAtom> out;
  out.push_back({std::vector<Rat>{}, Rat(1)});
  for (int i = 0; i < n_players; ++i) {
    std::vector<JointCostAtom> next;
    next.reserve(out.size() * d.cost[i].atoms.size());
    for (auto& partial : out)
      for (auto& atom : d.cost[i].atoms) {
        JointCostAtom ext = partial;
        ext.value.push_back(atom.value);
        ext.prob *= atom.prob;
        next.push_back(std::move(ext));
      }
    out = std::move(next);
  }
  return out;
}

std::vector<Rat> ConstrainedMarkovGame::max_cost_vec(int h, StateId s,
                                                     JointAction a) const {
  const StageDynamics& d = at(h, s, a);
  std::vector<Rat> m(n_players);
  if (d.joint_form()) {
    for (int i = 0; i < n_players; ++i) {
      m[i] = d.cost_joint.front().value[i];
      for (auto& atom : d.cost_joint) m[i] = std::max(m[i], atom.value[i]);
    }
  } else {
    for (int i = 0; i < n_players; ++i) m[i] = d.cost[i].max_support();
  }
  return m;
}

std::vector<Rat> ConstrainedMarkovGame::global_max_cost() const {
  std::vector<Rat> m(n_players, Rat(0));
  bool first = true;
  for (int h = 1; h <= horizon; ++h)
    for (StateId s = 0; s < num_states(); ++s)
      for (JointAction a = 0; a < num_joint_actions(); ++a) {
        auto v = max_cost_vec(h, s, a);
        for (int i = 0; i < n_players; ++i)
          m[i] = first ? v[i] : std::max(m[i], v[i]);
        first = false;
      }
  return m;
}

ConstrainedMarkovGame parse_game(const std::string& text,
                                 const ParseOptions& opts) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const std::exception& e) {
    throw schema_error(std::string("invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw schema_error("top level must be an object");
  for (const char* field :
       {"players", "states", "initial_state", "horizon", "budget", "actions",
        "dynamics"})
    if (!doc.contains(field))
      throw schema_error(std::string("missing field '") + field + "'");

  ConstrainedMarkovGame g;
  if (!doc["players"].is_number_integer() || doc["players"].get<int>() < 1)
    throw schema_error("players must be a positive integer");
  g.n_players = doc["players"].get<int>();

  if (!doc["states"].is_array() || doc["states"].empty())
    throw schema_error("states must be a nonempty array");
  std::map<std::string, StateId> state_index;
  for (auto& s : doc["states"]) {
    if (!s.is_string()) throw schema_error("state names must be strings");
    std::string name = s.get<std::string>();
    if (state_index.count(name))
      throw schema_error("duplicate state name '" + name + "'");
    state_index[name] = g.num_states();
    g.state_names.push_back(name);
  }

  if (!doc["initial_state"].is_string() ||
      !state_index.count(doc["initial_state"].get<std::string>()))
    throw schema_error("initial_state must name a declared state");
  g.initial_state = state_index[doc["initial_state"].get<std::string>()];

  if (!doc["horizon"].is_number_integer() || doc["horizon"].get<int>() < 1)
    throw schema_error("horizon must be an integer >= 1");
  g.horizon = doc["horizon"].get<int>();

  if (!doc["budget"].is_array() ||
      static_cast<int>(doc["budget"].size()) != g.n_players)
    throw schema_error("budget must be an array of length players");
  for (int i = 0; i < g.n_players; ++i)
    g.budget.push_back(
        rational_field(doc["budget"][i], "budget[" + std::to_string(i) + "]"));

  if (!doc["actions"].is_array() ||
      static_cast<int>(doc["actions"].size()) != g.n_players)
    throw schema_error("actions must be an array of length players");
  std::vector<std::map<std::string, int>> action_index(g.n_players);
  for (int i = 0; i < g.n_players; ++i) {
    if (!doc["actions"][i].is_array() || doc["actions"][i].empty())
      throw schema_error("actions[" + std::to_string(i) +
                         "] must be a nonempty array");
    std::vector<std::string> names;
    for (auto& a : doc["actions"][i]) {
      if (!a.is_string()) throw schema_error("action names must be strings");
      std::string name = a.get<std::string>();
      if (action_index[i].count(name))
        throw schema_error("duplicate action '" + name + "' for player " +
                           std::to_string(i + 1));
      action_index[i][name] = static_cast<int>(names.size());
      names.push_back(name);
    }
    g.action_names.push_back(names);
  }

  int S = g.num_states(), A = g.num_joint_actions();
  g.dyn.assign(g.horizon, std::vector<std::vector<StageDynamics>>(
                              S, std::vector<StageDynamics>(A)));
  std::vector<std::vector<std::vector<bool>>> seen(
      g.horizon, std::vector<std::vector<bool>>(S, std::vector<bool>(A, false)));

  if (!doc["dynamics"].is_array())
    throw schema_error("dynamics must be an array");
  for (size_t k = 0; k < doc["dynamics"].size(); ++k) {
    const json& e = doc["dynamics"][k];
    std::string where = "dynamics[" + std::to_string(k) + "]";
    if (!e.is_object()) throw schema_error(where + ": must be an object");
    for (const char* field : {"h", "s", "a", "next", "reward"})
      if (!e.contains(field))
        throw schema_error(where + ": missing '" + std::string(field) + "'");

    if (!e["h"].is_number_integer()) throw schema_error(where + ".h: integer");
    int h = e["h"].get<int>();
    if (h < 1 || h > g.horizon)
      throw schema_error(where + ".h: out of range [1," +
                         std::to_string(g.horizon) + "]");
    if (!e["s"].is_string() || !state_index.count(e["s"].get<std::string>()))
      throw schema_error(where + ".s: unknown state");
    StateId s = state_index[e["s"].get<std::string>()];
    if (!e["a"].is_array() || static_cast<int>(e["a"].size()) != g.n_players)
      throw schema_error(where + ".a: need one action name per player");
    std::vector<int> per(g.n_players);
    for (int i = 0; i < g.n_players; ++i) {
      if (!e["a"][i].is_string() ||
          !action_index[i].count(e["a"][i].get<std::string>()))
        throw schema_error(where + ".a: unknown action for player " +
                           std::to_string(i + 1));
      per[i] = action_index[i][e["a"][i].get<std::string>()];
    }
    JointAction a = g.encode_action(per);
    if (seen[h - 1][s][a])
      throw schema_error(where + ": duplicate entry for (h,s,a)");
    seen[h - 1][s][a] = true;
    StageDynamics& d = g.dyn[h - 1][s][a];

    if (!e["next"].is_object() || e["next"].empty())
      throw schema_error(where + ".next: nonempty object of state: prob");
    Rat psum = 0;
    for (auto& [name, pj] : e["next"].items()) {
      if (!state_index.count(name))
        throw schema_error(where + ".next: unknown state '" + name + "'");
      Rat p = rational_field(pj, where + ".next." + name);
      if (p < 0) throw schema_error(where + ".next: negative probability");
      psum += p;
      if (p > 0) d.next.push_back({state_index[name], p});
    }
    if (psum != 1)
      throw schema_error(where + ".next: probabilities sum to " +
                         rat_to_string(psum) + ", expected 1");
    std::sort(d.next.begin(), d.next.end());

    if (!e["reward"].is_array() ||
        static_cast<int>(e["reward"].size()) != g.n_players)
      throw schema_error(where + ".reward: need one entry per player");
    for (int i = 0; i < g.n_players; ++i)
      d.reward.push_back(rational_field(e["reward"][i], where + ".reward"));

    bool has_cost = e.contains("cost"), has_joint = e.contains("cost_joint");
    if (has_cost == has_joint)
      throw schema_error(where + ": exactly one of cost / cost_joint");
    if (has_cost) {
      if (!e["cost"].is_array() ||
          static_cast<int>(e["cost"].size()) != g.n_players)
        throw schema_error(where + ".cost: need one source per player");
      for (int i = 0; i < g.n_players; ++i)
        d.cost.push_back(parse_cost_dist(
            e["cost"][i], where + ".cost[" + std::to_string(i) + "]"));
    } else {
      if (!e["cost_joint"].is_array() || e["cost_joint"].empty())
        throw schema_error(where + ".cost_joint: nonempty atom array");
      Rat psum2 = 0;
      std::vector<JointCostAtom> atoms;
      for (size_t m = 0; m < e["cost_joint"].size(); ++m) {
        const json& aj = e["cost_joint"][m];
        std::string aw = where + ".cost_joint[" + std::to_string(m) + "]";
        if (!aj.is_object() || !aj.contains("value") || !aj.contains("prob"))
          throw schema_error(aw + ": atom needs value and prob");
        if (!aj["value"].is_array() ||
            static_cast<int>(aj["value"].size()) != g.n_players)
          throw schema_error(aw + ".value: need one entry per player");
        JointCostAtom atom;
        for (int i = 0; i < g.n_players; ++i)
          atom.value.push_back(rational_field(aj["value"][i], aw + ".value"));
        atom.prob = rational_field(aj["prob"], aw + ".prob");
        if (atom.prob < 0) throw schema_error(aw + ": negative probability");
        psum2 += atom.prob;
        if (atom.prob > 0) atoms.push_back(std::move(atom));
      }
      if (psum2 != 1)
        throw schema_error(where + ".cost_joint: probabilities sum to " +
                           rat_to_string(psum2) + ", expected 1");
      // merge duplicate vectors, keep a deterministic (lexicographic) order
      std::sort(atoms.begin(), atoms.end(),
                [](const JointCostAtom& x, const JointCostAtom& y) {
                  return x.value < y.value;
                });
      for (auto& atom : atoms) {
        if (!d.cost_joint.empty() && d.cost_joint.back().value == atom.value)
          d.cost_joint.back().prob += atom.prob;
        else
          d.cost_joint.push_back(std::move(atom));
      }
      if (d.cost_joint.empty())
        throw schema_error(where + ".cost_joint: empty support");
    }
  }

  for (int h = 1; h <= g.horizon; ++h)
    for (StateId s = 0; s < S; ++s)
      for (JointAction a = 0; a < A; ++a)
        if (!seen[h - 1][s][a])
          throw schema_error("missing dynamics entry for h=" +
                             std::to_string(h) + ", s=" + g.state_names[s] +
                             ", a=" + g.joint_action_name(a));

  g.cost_scale = compute_cost_scale(g);
  if (opts.enforce_precision_cap) enforce_precision_cap(g, opts);
  return g;
}

Int compute_cost_scale(const ConstrainedMarkovGame& g) {
  Int lambda = 1;
  for (auto& b : g.budget) accumulate_denominator(lambda, b);
  for (auto& hs : g.dyn)
    for (auto& sa : hs)
      for (auto& d : sa) {
        for (auto& c : d.cost)
          for (auto& atom : c.atoms) accumulate_denominator(lambda, atom.value);
        for (auto& atom : d.cost_joint)
          for (auto& v : atom.value) accumulate_denominator(lambda, v);
      }
  return lambda;
}

void enforce_precision_cap(const ConstrainedMarkovGame& g,
                           const ParseOptions& opts) {
  Int max_scaled = 0;
  auto consider = [&](const Rat& v) {
    Rat scaled = v * g.cost_scale;
    Int mag = abs(numerator(scaled));  // integral by construction
    if (mag > max_scaled) max_scaled = mag;
  };
  for (auto& hs : g.dyn)
    for (auto& sa : hs)
      for (auto& d : sa) {
        for (auto& c : d.cost)
          if (!c.continuous())
            for (auto& atom : c.atoms) consider(atom.value);
        for (auto& atom : d.cost_joint)
          for (auto& v : atom.value) consider(v);
      }
  if (max_scaled * g.horizon > opts.precision_cap)
    throw GameError(GameError::Kind::kPrecision,
                    "cost precision too fine for the exact lattice (scale " +
                        g.cost_scale.str() + ", max scaled cost " +
                        max_scaled.str() + ", horizon " +
                        std::to_string(g.horizon) +
                        "); use the approximation mode");
}

ConstrainedMarkovGame parse_game_file(const std::string& path,
                                      const ParseOptions& opts) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw GameError(GameError::Kind::kSchema, "cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_game(buf.str(), opts);
}

std::string serialize_game(const ConstrainedMarkovGame& g) {
  json doc;
  doc["players"] = g.n_players;
  doc["states"] = g.state_names;
  doc["initial_state"] = g.state_names[g.initial_state];
  doc["horizon"] = g.horizon;
  json budget = json::array();
  for (auto& b : g.budget) budget.push_back(rat_to_string(b));
  doc["budget"] = budget;
  doc["actions"] = g.action_names;
  json dynamics = json::array();
  for (int h = 1; h <= g.horizon; ++h)
    for (StateId s = 0; s < g.num_states(); ++s)
      for (JointAction a = 0; a < g.num_joint_actions(); ++a) {
        const StageDynamics& d = g.at(h, s, a);
        json e;
        e["h"] = h;
        e["s"] = g.state_names[s];
        json an = json::array();
        auto per = g.decode_action(a);
        for (int i = 0; i < g.n_players; ++i)
          an.push_back(g.action_names[i][per[i]]);
        e["a"] = an;
        json next;
        for (auto& [sp, p] : d.next) next[g.state_names[sp]] = rat_to_string(p);
        e["next"] = next;
        json reward = json::array();
        for (auto& r : d.reward) reward.push_back(rat_to_string(r));
        e["reward"] = reward;
        if (d.joint_form()) {
          json atoms = json::array();
          for (auto& atom : d.cost_joint) {
            json v = json::array();
            for (auto& x : atom.value) v.push_back(rat_to_string(x));
            atoms.push_back({{"value", v}, {"prob", rat_to_string(atom.prob)}});
          }
          e["cost_joint"] = atoms;
        } else {
          json cost = json::array();
          for (auto& c : d.cost) {
            if (c.continuous()) {
              cost.push_back({{"uniform",
                               {{"lo", rat_to_string(c.uniform->lo)},
                                {"hi", rat_to_string(c.uniform->hi)}}}});
            } else {
              json atoms = json::array();
              for (auto& atom : c.atoms)
                atoms.push_back({{"value", rat_to_string(atom.value)},
                                 {"prob", rat_to_string(atom.prob)}});
              cost.push_back(atoms);
            }
          }
          e["cost"] = cost;
        }
        dynamics.push_back(e);
      }
  doc["dynamics"] = dynamics;
  return doc.dump(2) + "\n";
}

ValidationReport validate_game(const ConstrainedMarkovGame& g) {
  ValidationReport rep;
  auto bad = [&](const std::string& msg) { rep.violations.push_back(msg); };

  if (g.n_players < 1) bad("players must be >= 1");
  if (g.horizon < 1) bad("horizon must be >= 1");
  if (g.state_names.empty()) bad("no states");
  if (g.initial_state < 0 || g.initial_state >= g.num_states())
    bad("initial_state out of range");
  if (static_cast<int>(g.budget.size()) != g.n_players)
    bad("budget length != players");
  if (static_cast<int>(g.action_names.size()) != g.n_players)
    bad("actions length != players");
  if (g.cost_scale <= 0) bad("cost_scale must be positive");

  auto on_scale = [&](const Rat& v) {
    return denominator(Rat(v * g.cost_scale)) == 1;
  };
  for (size_t i = 0; i < g.budget.size(); ++i)
    if (!on_scale(g.budget[i]))
      bad("budget[" + std::to_string(i) + "] not a multiple of 1/scale");

  if (static_cast<int>(g.dyn.size()) != g.horizon) {
    bad("dynamics table has wrong horizon");
    return rep;
  }
  for (int h = 1; h <= g.horizon; ++h) {
    if (static_cast<int>(g.dyn[h - 1].size()) != g.num_states()) {
      bad("dynamics table has wrong state count at h=" + std::to_string(h));
      continue;
    }
    for (StateId s = 0; s < g.num_states(); ++s) {
      if (static_cast<int>(g.dyn[h - 1][s].size()) != g.num_joint_actions()) {
        bad("dynamics table has wrong action count");
        continue;
      }
      for (JointAction a = 0; a < g.num_joint_actions(); ++a) {
        const StageDynamics& d = g.at(h, s, a);
        std::string where = "(h=" + std::to_string(h) +
                            ",s=" + g.state_names[s] +
                            ",a=" + g.joint_action_name(a) + ")";
        Rat psum = 0;
        for (auto& [sp, p] : d.next) {
          if (sp < 0 || sp >= g.num_states()) bad(where + ": bad next state");
          if (p <= 0) bad(where + ": nonpositive transition probability");
          psum += p;
        }
        if (psum != 1) bad(where + ": transition row sums to " +
                           rat_to_string(psum));
        if (static_cast<int>(d.reward.size()) != g.n_players)
          bad(where + ": reward length != players");
        if (d.cost.empty() == d.cost_joint.empty())
          bad(where + ": need exactly one of cost / cost_joint");
        if (!d.cost.empty() &&
            static_cast<int>(d.cost.size()) != g.n_players)
          bad(where + ": cost length != players");
        for (auto& c : d.cost) {
          if (c.continuous()) {
            if (!(c.uniform->lo < c.uniform->hi))
              bad(where + ": uniform needs lo < hi");
            continue;
          }
          Rat csum = 0;
          for (size_t k = 0; k < c.atoms.size(); ++k) {
            if (c.atoms[k].prob <= 0) bad(where + ": nonpositive atom prob");
            if (k && !(c.atoms[k - 1].value < c.atoms[k].value))
              bad(where + ": atoms not sorted/distinct");
            if (!on_scale(c.atoms[k].value))
              bad(where + ": cost atom off the 1/scale lattice");
            csum += c.atoms[k].prob;
          }
          if (csum != 1) bad(where + ": cost probabilities sum to " +
                             rat_to_string(csum));
        }
        Rat jsum = 0;
        for (auto& atom : d.cost_joint) {
          if (atom.prob <= 0) bad(where + ": nonpositive atom prob");
          if (static_cast<int>(atom.value.size()) != g.n_players)
            bad(where + ": joint atom length != players");
          for (auto& v : atom.value)
            if (!on_scale(v)) bad(where + ": cost atom off the 1/scale lattice");
          jsum += atom.prob;
        }
        if (!d.cost_joint.empty() && jsum != 1)
          bad(where + ": joint cost probabilities sum to " +
              rat_to_string(jsum));
      }
    }
  }
  return rep;
}

ConstrainedMarkovGame scale_costs(const ConstrainedMarkovGame& g) {
  ConstrainedMarkovGame out = g;
  Rat lambda(g.cost_scale);
  for (auto& b : out.budget) b *= lambda;
  for (auto& hs : out.dyn)
    for (auto& sa : hs)
      for (auto& d : sa) {
        for (auto& c : d.cost) {
          for (auto& atom : c.atoms) atom.value *= lambda;
          if (c.uniform) {
            c.uniform->lo *= lambda;
            c.uniform->hi *= lambda;
          }
        }
        for (auto& atom : d.cost_joint)
          for (auto& v : atom.value) v *= lambda;
      }
  out.cost_scale = 1;
  return out;
}

}  // namespace ace

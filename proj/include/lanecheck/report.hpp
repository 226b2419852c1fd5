// Verdict and trace rendering.
//
// Text traces have one step per line, `delay 1` or
// `fire <car> <edge> <action>`; lines starting with '#' are annotations, and
// `# cycle` separates a lasso's stem from its cycle.
#pragma once

#include <string>

#include "json.hpp"  // vendored nlohmann/json

#include "lanecheck/checker.hpp"

namespace lanecheck {

enum ExitCode : int { kHolds = 0, kFails = 1, kInconclusive = 2, kUsage = 3 };

inline int exit_code(const checker::Verdict& v) {
  switch (v.outcome) {
    case checker::Outcome::holds: return kHolds;
    case checker::Outcome::fails: return kFails;
    case checker::Outcome::inconclusive: return kInconclusive;
  }
  return kInconclusive;
}

inline std::string trace_text(const checker::Network& net, const checker::Trace& tr) {
  std::string out = "# " + checker::to_string(tr.kind) + "\n";
  for (const auto& s : tr.stem) out += net.describe(s.step) + "\n";
  if (tr.kind == checker::Trace::Kind::lasso) {
    out += "# cycle\n";
    for (const auto& s : tr.cycle) out += net.describe(s.step) + "\n";
  }
  return out;
}

inline std::string verdict_text(const checker::Network& net, const std::string& query, const checker::Verdict& v) {
  std::string out = query + ": " + checker::to_string(v.outcome) + " (" + std::to_string(v.states) + " states)\n";
  if (!v.note.empty()) out += "note: " + v.note + "\n";
  if (v.witness) out += trace_text(net, *v.witness);
  return out;
}

inline nlohmann::json state_json(const checker::Network& net, const checker::SystemState& s) {
  nlohmann::json automata = nlohmann::json::array();
  for (std::size_t a = 0; a < net.automaton_count(); ++a) {
    const auto& aut = net.automaton(a);
    nlohmann::json j{{"name", aut.name}, {"location", aut.locations[s.loc[a]].name}};
    if (aut.has_clock) j["x"] = s.clock[a];
    if (aut.owner) {
      j["n"] = s.n[a];
      j["l"] = s.l[a];
    }
    automata.push_back(std::move(j));
  }
  nlohmann::json cars = nlohmann::json::array();
  for (std::uint32_t c = 0; c < s.snapshot.car_count(); ++c) {
    const CarState& cs = s.snapshot.cars()[c];
    nlohmann::json res = nlohmann::json::array(), clm = nlohmann::json::array();
    for (LaneId k : cs.res.lanes()) res.push_back(k.index);
    for (LaneId k : cs.clm.lanes()) clm.push_back(k.index);
    cars.push_back({{"name", net.car_names()[c]}, {"pos", cs.pos}, {"size", cs.size}, {"res", res}, {"clm", clm}});
  }
  return {{"automata", automata}, {"cars", cars}};
}

inline nlohmann::json trace_json(const checker::Network& net, const checker::Trace& tr) {
  auto steps = [&](const std::vector<checker::TraceStep>& list) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& s : list) arr.push_back({{"step", net.describe(s.step)}, {"state", state_json(net, s.state)}});
    return arr;
  };
  nlohmann::json j{{"kind", checker::to_string(tr.kind)}, {"initial", state_json(net, tr.initial)}, {"stem", steps(tr.stem)}};
  if (tr.kind == checker::Trace::Kind::lasso) j["cycle"] = steps(tr.cycle);
  return j;
}

inline nlohmann::json verdict_json(const checker::Network& net, const std::string& query, const checker::Verdict& v) {
  nlohmann::json j{{"query", query}, {"outcome", checker::to_string(v.outcome)}, {"states", v.states}};
  if (!v.note.empty()) j["note"] = v.note;
  if (v.witness) j["trace"] = trace_json(net, *v.witness);
  return j;
}

}  // namespace lanecheck

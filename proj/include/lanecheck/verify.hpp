// Query families and the network each one is checked on.
//
//   no-deadlock       controllers only
//   safety            controllers + Observer1
//   liveness-any      controllers + one liveness observer per car
//   liveness-car=X    controllers + the observer of X
#pragma once

#include <cstdlib>
#include <optional>
#include <string>
#include <variant>

#include "lanecheck/checker.hpp"
#include "lanecheck/scenario.hpp"

namespace lanecheck {

struct NoDeadlock {
  friend bool operator==(const NoDeadlock&, const NoDeadlock&) = default;
};
struct SafetyNoCollision {
  friend bool operator==(const SafetyNoCollision&, const SafetyNoCollision&) = default;
};
struct LivenessAny {
  friend bool operator==(const LivenessAny&, const LivenessAny&) = default;
};
struct LivenessCar {
  std::string car;
  friend bool operator==(const LivenessCar&, const LivenessCar&) = default;
};
using Query = std::variant<NoDeadlock, SafetyNoCollision, LivenessAny, LivenessCar>;

inline std::string to_string(const Query& q) {
  struct {
    std::string operator()(const NoDeadlock&) const { return "no-deadlock"; }
    std::string operator()(const SafetyNoCollision&) const { return "safety"; }
    std::string operator()(const LivenessAny&) const { return "liveness-any"; }
    std::string operator()(const LivenessCar& l) const { return "liveness-car=" + l.car; }
  } v;
  return std::visit(v, q);
}

inline std::optional<Query> parse_query(std::string_view s) {
  if (s == "no-deadlock") return NoDeadlock{};
  if (s == "safety") return SafetyNoCollision{};
  if (s == "liveness-any") return LivenessAny{};
  constexpr std::string_view car = "liveness-car=";
  if (s.substr(0, car.size()) == car && s.size() > car.size()) return LivenessCar{std::string(s.substr(car.size()))};
  return std::nullopt;
}

struct VerifyOptions {
  checker::NetworkOptions network;
  checker::Options search;
};

// Budget override from LANECHECK_MAX_STATES, if set and valid.
inline checker::Options search_options_from_env(checker::Options o = {}) {
  if (const char* v = std::getenv("LANECHECK_MAX_STATES")) {
    char* end = nullptr;
    const unsigned long long n = std::strtoull(v, &end, 10);
    if (end && *end == '\0' && n > 0) o.max_states = n;
  }
  return o;
}

inline checker::Network build_network(const Scenario& s, const Query& q, checker::NetworkOptions opts = {}) {
  validate(s);
  checker::Network net(s.snapshot(), s.car_names(), s.effective_horizon(), opts);
  const auto features = acta::features_of(s.variant);
  for (std::size_t i = 0; i < s.cars.size(); ++i)
    net.add(acta::build_lcp(CarId{static_cast<std::uint32_t>(i)}, s.constants, features, s.cars[i].name));
  if (std::holds_alternative<SafetyNoCollision>(q)) net.add(acta::build_observer_collision());
  if (std::holds_alternative<LivenessAny>(q))
    for (std::size_t i = 0; i < s.cars.size(); ++i)
      net.add(acta::build_observer_live(CarId{static_cast<std::uint32_t>(i)}, s.cars[i].name));
  if (const auto* l = std::get_if<LivenessCar>(&q)) {
    const auto id = s.find_car(l->car);
    if (!id) throw Error("unknown car '" + l->car + "'");
    net.add(acta::build_observer_live(*id, l->car));
  }
  net.finalize();
  return net;
}

// Location index of `loc` in every automaton whose name starts with `prefix`.
inline std::vector<std::pair<std::size_t, acta::LocationId>> locations_named(const checker::Network& net,
                                                                           std::string_view prefix,
                                                                           std::string_view loc) {
  std::vector<std::pair<std::size_t, acta::LocationId>> out;
  for (std::size_t a = 0; a < net.automaton_count(); ++a) {
    const auto& aut = net.automaton(a);
    if (aut.name.substr(0, prefix.size()) == prefix) out.emplace_back(a, aut.location(loc));
  }
  return out;
}

inline checker::Verdict run_query(const checker::Network& net, const Query& q, const checker::Options& opts = {}) {
  const checker::SystemState init = net.initial_state();
  if (std::holds_alternative<NoDeadlock>(q))
    return checker::check_ag(net, init, [&](const checker::SystemState& s) { return net.deadlock(s); }, opts);
  if (std::holds_alternative<SafetyNoCollision>(q)) {
    const auto unsafe = locations_named(net, "Observer1", "unsafe");
    return checker::check_ag(
        net, init,
        [unsafe](const checker::SystemState& s) {
          for (auto [a, q] : unsafe)
            if (s.loc[a] == q) return true;
          return false;
        },
        opts);
  }
  const auto success = locations_named(net, "Observer(", "success");
  return checker::check_af(
      net, init,
      [success](const checker::SystemState& s) {
        for (auto [a, q] : success)
          if (s.loc[a] == q) return true;
        return false;
      },
      opts);
}

struct QueryResult {
  checker::Network network;
  checker::Verdict verdict;
};

inline QueryResult run_query(const Scenario& s, const Query& q, const VerifyOptions& opts = {}) {
  QueryResult r{build_network(s, q, opts.network), {}};
  r.verdict = run_query(r.network, q, opts.search);
  return r;
}

}  // namespace lanecheck

// ============================================================================
// acta.hpp — automotive-controlling timed automata: guards mixing clock, data
// and spatial constraints, controller actions on edges, and builders for the
// lane-change controllers and their observers.
// ============================================================================
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "lanecheck/mlsl.hpp"
#include "lanecheck/traffic.hpp"

namespace lanecheck::acta {

enum class DataVar : std::uint8_t { none, n, l, top_lane };

// Current values of a controller's data variables; top is N.
struct DataValues {
  std::int64_t n = 0;
  std::int64_t l = 0;
  std::int64_t top = 0;

  std::int64_t operator[](DataVar v) const {
    switch (v) {
      case DataVar::n: return n;
      case DataVar::l: return l;
      case DataVar::top_lane: return top;
      case DataVar::none: return 0;
    }
    return 0;
  }
};

// psi ::= k | l1 | l1 + l2 | l1 - l2, plus a constant offset (n + 1).
struct LaneExpr {
  DataVar first = DataVar::none;
  int sign = 1;
  DataVar second = DataVar::none;
  std::int64_t offset = 0;

  static LaneExpr var(DataVar v, std::int64_t offset = 0) { return {v, 1, DataVar::none, offset}; }
  static LaneExpr constant(std::int64_t k) { return {DataVar::none, 1, DataVar::none, k}; }
  static LaneExpr sum(DataVar a, DataVar b) { return {a, 1, b, 0}; }
  static LaneExpr difference(DataVar a, DataVar b) { return {a, -1, b, 0}; }

  std::int64_t evaluate(const DataValues& d) const { return d[first] + sign * d[second] + offset; }
};

inline std::string to_string(DataVar v) {
  switch (v) {
    case DataVar::n: return "n";
    case DataVar::l: return "l";
    case DataVar::top_lane: return "N";
    case DataVar::none: return "";
  }
  return "?";
}

inline std::string to_string(const LaneExpr& e) {
  std::string out = to_string(e.first);
  if (e.second != DataVar::none) out += (e.sign < 0 ? " - " : " + ") + to_string(e.second);
  if (out.empty()) return std::to_string(e.offset);
  if (e.offset > 0) out += " + " + std::to_string(e.offset);
  if (e.offset < 0) out += " - " + std::to_string(-e.offset);
  return out;
}

enum class Cmp : std::uint8_t { le, ge, eq };

inline bool compare(std::int64_t a, Cmp op, std::int64_t b) {
  switch (op) {
    case Cmp::le: return a <= b;
    case Cmp::ge: return a >= b;
    case Cmp::eq: return a == b;
  }
  return false;
}

inline std::string to_string(Cmp op) {
  switch (op) {
    case Cmp::le: return "<=";
    case Cmp::ge: return ">=";
    case Cmp::eq: return "==";
  }
  return "?";
}

// x op bound on the automaton's single clock.
struct ClockConstraint {
  Cmp op = Cmp::le;
  std::int64_t bound = 0;
};

struct DataConstraint {
  LaneExpr lhs;
  Cmp op = Cmp::le;
  LaneExpr rhs;
};

// The spatial formulas a controller can test. Each is carried both as an
// MLSL formula and as the interval check that decides it.
enum class SpatialCheck : std::uint8_t {
  collision_check,         // cc, in the owner's standard view
  potential_collision,     // exists c: pc(c), in the owner's standard view
  no_potential_collision,  // !exists c: pc(c)
  any_collision,           // two distinct cars with intersecting reservations
};

struct SpatialConstraint {
  SpatialCheck check = SpatialCheck::collision_check;
  mlsl::Formula formula;
};

inline SpatialConstraint spatial(SpatialCheck check) {
  switch (check) {
    case SpatialCheck::collision_check: return {check, mlsl::cc_formula()};
    case SpatialCheck::potential_collision: return {check, mlsl::exists_pc_formula()};
    case SpatialCheck::no_potential_collision: return {check, mlsl::neg(mlsl::exists_pc_formula())};
    case SpatialCheck::any_collision: {
      using namespace mlsl;
      return {check, exists("d", exists("c", conj(neg(var_eq("c", "d")), somewhere(conj(re("d"), re("c"))))))};
    }
  }
  return {};
}

inline std::string to_string(SpatialCheck c) {
  switch (c) {
    case SpatialCheck::collision_check: return "cc";
    case SpatialCheck::potential_collision: return "exists c: pc(c)";
    case SpatialCheck::no_potential_collision: return "!exists c: pc(c)";
    case SpatialCheck::any_collision: return "collision";
  }
  return "?";
}

using GuardAtom = std::variant<ClockConstraint, DataConstraint, SpatialConstraint>;

// Conjunction of atoms; empty means true.
struct Guard {
  std::vector<GuardAtom> atoms;

  Guard& operator&=(GuardAtom a) {
    atoms.push_back(std::move(a));
    return *this;
  }
  bool empty() const { return atoms.empty(); }
};

inline std::string to_string(const Guard& g) {
  if (g.empty()) return "true";
  std::string out;
  for (const GuardAtom& a : g.atoms) {
    if (!out.empty()) out += " && ";
    std::visit(
        [&](const auto& x) {
          using T = std::decay_t<decltype(x)>;
          if constexpr (std::is_same_v<T, ClockConstraint>) out += "x " + to_string(x.op) + " " + std::to_string(x.bound);
          else if constexpr (std::is_same_v<T, DataConstraint>)
            out += to_string(x.lhs) + " " + to_string(x.op) + " " + to_string(x.rhs);
          else out += to_string(x.check);
        },
        a);
  }
  return out;
}

enum class Channel : std::uint8_t { claiming, reserving, withdrawing };

inline std::string to_string(Channel c) {
  switch (c) {
    case Channel::claiming: return "claiming";
    case Channel::reserving: return "reserving";
    case Channel::withdrawing: return "withdrawing";
  }
  return "?";
}

// Binary handshake label: one emitting edge pairs with one receiving edge of
// another automaton and both move together.
struct Sync {
  enum class Dir : std::uint8_t { none, emit, receive };
  Dir dir = Dir::none;
  Channel channel = Channel::claiming;
  CarId car;

  static Sync emit(Channel ch, CarId c) { return {Dir::emit, ch, c}; }
  static Sync receive(Channel ch, CarId c) { return {Dir::receive, ch, c}; }
  bool matches(const Sync& other) const { return channel == other.channel && car == other.car; }
};

struct ClockReset {};
struct Assign {
  DataVar target = DataVar::l;
  LaneExpr value;
};
using Update = std::variant<ClockReset, Assign>;

// Controller action with its lane argument still symbolic.
struct ActionTemplate {
  ControllerAction::Kind kind = ControllerAction::Kind::tau;
  LaneExpr lane;

  ControllerAction resolve(const DataValues& d) const {
    const auto k = lane.evaluate(d);
    return ControllerAction{kind, LaneId{static_cast<std::uint32_t>(k < 0 ? 0 : k)}};
  }
};

using LocationId = std::uint8_t;

// Clock atoms of an invariant block time; spatial atoms are urgent: while one
// is violated the automaton must leave before time may pass.
struct Location {
  std::string name;
  Guard invariant;
  bool eager = false;  // no delay while one of its own edges is enabled
};

struct Edge {
  std::string name;
  LocationId source = 0;
  LocationId target = 0;
  Guard guard;
  ActionTemplate action;
  Sync sync;
  std::vector<Update> updates;
};

struct Automaton {
  std::string name;
  std::optional<CarId> owner;  // set for controllers
  bool has_clock = false;
  std::vector<Location> locations;
  LocationId initial = 0;
  std::vector<Edge> edges;

  LocationId location(std::string_view loc) const {
    for (std::size_t i = 0; i < locations.size(); ++i)
      if (locations[i].name == loc) return static_cast<LocationId>(i);
    throw Error(name + ": no location '" + std::string(loc) + "'");
  }
  std::size_t edge_index(std::string_view e) const {
    for (std::size_t i = 0; i < edges.size(); ++i)
      if (edges[i].name == e) return i;
    throw Error(name + ": no edge '" + std::string(e) + "'");
  }
  const Edge& edge(std::string_view e) const { return edges[edge_index(e)]; }
};

// ---------------------------------------------------------------------------
// Lane-change controllers
// ---------------------------------------------------------------------------

struct Constants {
  std::int64_t t = 2;        // claim-to-reserve bound in q2
  std::int64_t t_lc = 3;     // lane change duration
  std::int64_t t_w = 1;      // time spent in q1 before deciding
  std::int64_t wait_lo = 1;  // back-off bounds in q_wait
  std::int64_t wait_hi = 4;

  friend bool operator==(const Constants&, const Constants&) = default;
};

enum class Variant : std::uint8_t { original, original_plus_tw, live_no_qwait, live };

// original-plus-tw and live-no-qwait name the same controller.
struct LcpFeatures {
  bool wait_bound = false;  // x <= t_w in q1, x >= t_w on its exits
  bool backoff = false;     // withdrawals go through q_wait
};

inline LcpFeatures features_of(Variant v) {
  switch (v) {
    case Variant::original: return {false, false};
    case Variant::original_plus_tw:
    case Variant::live_no_qwait: return {true, false};
    case Variant::live: return {true, true};
  }
  return {};
}

inline std::string to_string(Variant v) {
  switch (v) {
    case Variant::original: return "original";
    case Variant::original_plus_tw: return "original-plus-tw";
    case Variant::live_no_qwait: return "live-no-qwait";
    case Variant::live: return "live";
  }
  return "?";
}

inline std::optional<Variant> parse_variant(std::string_view s) {
  for (Variant v : {Variant::original, Variant::original_plus_tw, Variant::live_no_qwait, Variant::live})
    if (to_string(v) == s) return v;
  return std::nullopt;
}

inline void validate(const Constants& c, LcpFeatures f) {
  if (c.t <= 0 || c.t_lc <= 0) throw Error("constants t and t_lc must be positive");
  if (f.wait_bound && c.t_w <= 0) throw Error("constant t_w must be positive");
  if (f.backoff && (c.wait_lo <= 0 || c.wait_lo > c.wait_hi))
    throw Error("back-off bounds must satisfy 0 < wait_lo <= wait_hi");
}

inline Automaton build_lcp(CarId car, const Constants& k, LcpFeatures f, std::string car_name = {}) {
  validate(k, f);
  if (car_name.empty()) car_name = std::to_string(car.value);
  using K = ControllerAction::Kind;
  using SC = SpatialCheck;

  Automaton a;
  a.name = "LCP(" + car_name + ")";
  a.owner = car;
  a.has_clock = true;

  auto clock = [](Cmp op, std::int64_t b) { return GuardAtom{ClockConstraint{op, b}}; };

  Location q0{"q0", {}, true};
  q0.invariant &= spatial(SC::collision_check);
  Location q1{"q1", {}, false};
  if (f.wait_bound) q1.invariant &= clock(Cmp::le, k.t_w);
  Location q2{"q2", {}, false};
  q2.invariant &= spatial(SC::no_potential_collision);
  q2.invariant &= clock(Cmp::le, k.t);
  Location q3{"q3", {}, false};
  q3.invariant &= clock(Cmp::le, k.t_lc);
  a.locations = {q0, q1, q2, q3};
  LocationId wait = 0;
  if (f.backoff) {
    Location qw{"q_wait", {}, false};
    qw.invariant &= clock(Cmp::le, k.wait_hi);
    a.locations.push_back(qw);
    wait = 4;
  }
  a.initial = 0;

  const Sync claiming = Sync::emit(Channel::claiming, car);
  const Sync withdrawing = Sync::emit(Channel::withdrawing, car);

  // q0 -> q1: claim a neighbouring lane.
  for (int dir : {+1, -1}) {
    Edge e;
    e.name = dir > 0 ? "claim-up" : "claim-down";
    e.source = 0;
    e.target = 1;
    if (dir > 0) e.guard &= DataConstraint{LaneExpr::var(DataVar::n, 1), Cmp::le, LaneExpr::var(DataVar::top_lane)};
    else e.guard &= DataConstraint{LaneExpr::constant(0), Cmp::le, LaneExpr::var(DataVar::n, -1)};
    e.action = {K::claim, LaneExpr::var(DataVar::n, dir)};
    e.sync = claiming;
    e.updates.push_back(Assign{DataVar::l, LaneExpr::var(DataVar::n, dir)});
    if (f.wait_bound) e.updates.push_back(ClockReset{});
    a.edges.push_back(std::move(e));
  }

  // q1 -> q0 (or q_wait): potential collision, withdraw the claim.
  {
    Edge e;
    e.name = f.backoff ? "back-off" : "withdraw";
    e.source = 1;
    e.target = f.backoff ? wait : 0;
    e.guard &= spatial(SC::potential_collision);
    if (f.wait_bound) e.guard &= clock(Cmp::ge, k.t_w);
    e.action = {K::withdraw_claim, {}};
    e.sync = withdrawing;
    if (f.backoff) e.updates.push_back(ClockReset{});
    a.edges.push_back(std::move(e));
  }
  // q1 -> q2: no potential collision.
  {
    Edge e;
    e.name = "no-conflict";
    e.source = 1;
    e.target = 2;
    e.guard &= spatial(SC::no_potential_collision);
    if (f.wait_bound) e.guard &= clock(Cmp::ge, k.t_w);
    e.updates.push_back(ClockReset{});
    a.edges.push_back(std::move(e));
  }
  // q2 -> q0 (or q_wait): a potential collision appeared while waiting.
  {
    Edge e;
    e.name = f.backoff ? "abort-back-off" : "abort";
    e.source = 2;
    e.target = f.backoff ? wait : 0;
    e.guard &= spatial(SC::potential_collision);
    e.action = {K::withdraw_claim, {}};
    e.sync = withdrawing;
    if (f.backoff) e.updates.push_back(ClockReset{});
    a.edges.push_back(std::move(e));
  }
  // q2 -> q3: turn the claim into a reservation.
  {
    Edge e;
    e.name = "reserve";
    e.source = 2;
    e.target = 3;
    e.guard &= spatial(SC::no_potential_collision);
    e.action = {K::reserve, {}};
    e.sync = Sync::emit(Channel::reserving, car);
    e.updates.push_back(ClockReset{});
    a.edges.push_back(std::move(e));
  }
  // q3 -> q0: lane change finished, keep only the target lane.
  {
    Edge e;
    e.name = "finish";
    e.source = 3;
    e.target = 0;
    e.guard &= clock(Cmp::ge, k.t_lc);
    e.action = {K::withdraw_reservation, LaneExpr::var(DataVar::l)};
    e.updates.push_back(Assign{DataVar::n, LaneExpr::var(DataVar::l)});
    a.edges.push_back(std::move(e));
  }
  if (f.backoff) {
    Edge e;
    e.name = "retry";
    e.source = wait;
    e.target = 0;
    e.guard &= clock(Cmp::ge, k.wait_lo);
    a.edges.push_back(std::move(e));
  }
  return a;
}

inline Automaton build_lcp_original(CarId car, const Constants& k, std::string car_name = {}) {
  return build_lcp(car, k, features_of(Variant::original), std::move(car_name));
}

inline Automaton build_lcp_live(CarId car, const Constants& k, std::string car_name = {},
                                LcpFeatures f = features_of(Variant::live)) {
  return build_lcp(car, k, f, std::move(car_name));
}

// ---------------------------------------------------------------------------
// Observers
// ---------------------------------------------------------------------------

// Moves to `unsafe` once any two reservations intersect.
inline Automaton build_observer_collision() {
  Automaton a;
  a.name = "Observer1";
  a.locations = {Location{"safe", {}, false}, Location{"unsafe", {}, false}};
  Edge e;
  e.name = "collide";
  e.source = 0;
  e.target = 1;
  e.guard &= spatial(SpatialCheck::any_collision);
  a.edges.push_back(std::move(e));
  return a;
}

// Follows one controller's attempts: `claimed` on every claim, `success` on
// a reservation, back to `idle` on a withdrawal. Every location accepts every
// channel so the observer never blocks its controller.
inline Automaton build_observer_live(CarId car, std::string car_name = {}) {
  if (car_name.empty()) car_name = std::to_string(car.value);
  Automaton a;
  a.name = "Observer(" + car_name + ")";
  a.locations = {Location{"idle", {}, false}, Location{"claimed", {}, false}, Location{"success", {}, false}};
  const LocationId idle = 0, claimed = 1, success = 2;
  auto add = [&](LocationId from, Channel ch, LocationId to) {
    Edge e;
    e.name = to_string(ch) + "-" + a.locations[from].name;
    e.source = from;
    e.target = to;
    e.sync = Sync::receive(ch, car);
    a.edges.push_back(std::move(e));
  };
  for (LocationId from : {idle, claimed, success}) {
    add(from, Channel::claiming, claimed);
    add(from, Channel::reserving, success);
    add(from, Channel::withdrawing, from == success ? success : idle);
  }
  return a;
}

}  // namespace lanecheck::acta

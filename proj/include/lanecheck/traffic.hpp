// ============================================================================
// traffic.hpp — abstract highway model: cars, lanes, claims, reservations,
// views and the snapshot transitions induced by controller actions.
// ============================================================================
#pragma once

#include <algorithm>
#include <bit>
#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace lanecheck {

// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UnknownCar : public Error {
 public:
  explicit UnknownCar(std::uint32_t id)
      : Error("unknown car id " + std::to_string(id)) {}
};

struct CarId {
  std::uint32_t value = 0;
  friend constexpr auto operator<=>(CarId, CarId) = default;
};

struct LaneId {
  std::uint32_t index = 0;
  friend constexpr auto operator<=>(LaneId, LaneId) = default;
};

inline constexpr std::uint32_t kMaxLanes = 32;

// Set of lanes as a bitmask; lane k is bit k.
class LaneSet {
 public:
  constexpr LaneSet() = default;

  static constexpr LaneSet of(LaneId lane) { return from_bits(std::uint32_t{1} << lane.index); }
  static constexpr LaneSet from_bits(std::uint32_t bits) {
    LaneSet s;
    s.bits_ = bits;
    return s;
  }
  // Lanes lo..hi inclusive; empty when lo > hi.
  static constexpr LaneSet range(std::int64_t lo, std::int64_t hi) {
    LaneSet s;
    for (auto k = std::max<std::int64_t>(lo, 0); k <= hi && k < kMaxLanes; ++k)
      s.bits_ |= std::uint32_t{1} << k;
    return s;
  }

  constexpr bool contains(LaneId lane) const {
    return lane.index < kMaxLanes && ((bits_ >> lane.index) & 1u) != 0;
  }
  constexpr void insert(LaneId lane) { bits_ |= std::uint32_t{1} << lane.index; }
  constexpr void erase(LaneId lane) { bits_ &= ~(std::uint32_t{1} << lane.index); }
  constexpr std::size_t size() const { return static_cast<std::size_t>(std::popcount(bits_)); }
  constexpr bool empty() const { return bits_ == 0; }
  constexpr std::uint32_t bits() const { return bits_; }

  // Lowest lane in the set. Precondition: !empty().
  constexpr LaneId lowest() const { return LaneId{static_cast<std::uint32_t>(std::countr_zero(bits_))}; }

  std::vector<LaneId> lanes() const {
    std::vector<LaneId> out;
    for (std::uint32_t b = bits_; b != 0; b &= b - 1)
      out.push_back(LaneId{static_cast<std::uint32_t>(std::countr_zero(b))});
    return out;
  }

  friend constexpr LaneSet operator&(LaneSet a, LaneSet b) { return from_bits(a.bits_ & b.bits_); }
  friend constexpr LaneSet operator|(LaneSet a, LaneSet b) { return from_bits(a.bits_ | b.bits_); }
  friend constexpr bool operator==(LaneSet, LaneSet) = default;
  friend constexpr auto operator<=>(LaneSet a, LaneSet b) { return a.bits_ <=> b.bits_; }

 private:
  std::uint32_t bits_ = 0;
};

inline std::string to_string(LaneSet s) {
  std::string out = "{";
  bool first = true;
  for (LaneId k : s.lanes()) {
    if (!first) out += ",";
    out += std::to_string(k.index);
    first = false;
  }
  return out + "}";
}

// Closed space interval [lo, hi].
struct Extent {
  std::int64_t lo = 0;
  std::int64_t hi = 0;

  constexpr std::int64_t length() const { return hi - lo; }
  friend constexpr bool operator==(Extent, Extent) = default;
};

inline constexpr std::optional<Extent> intersect(Extent a, Extent b) {
  Extent r{std::max(a.lo, b.lo), std::min(a.hi, b.hi)};
  if (r.lo > r.hi) return std::nullopt;
  return r;
}

// Closed lane interval [lo, hi]; empty when lo > hi (chopping may produce
// the empty band lo = hi + 1).
struct LaneRange {
  std::int64_t lo = 0;
  std::int64_t hi = -1;

  constexpr bool empty() const { return lo > hi; }
  constexpr std::int64_t size() const { return empty() ? 0 : hi - lo + 1; }
  constexpr bool contains(LaneId k) const {
    return static_cast<std::int64_t>(k.index) >= lo && static_cast<std::int64_t>(k.index) <= hi;
  }
  constexpr LaneSet as_set() const { return LaneSet::range(lo, hi); }
  friend constexpr bool operator==(LaneRange, LaneRange) = default;
};

struct View {
  LaneRange lanes;
  Extent extent;
  CarId owner;
  friend constexpr bool operator==(const View&, const View&) = default;
};

struct CarState {
  std::int64_t pos = 0;
  std::int64_t size = 1;  // physical size plus braking distance
  LaneSet res;
  LaneSet clm;

  constexpr Extent extent() const { return {pos, pos + size}; }
  friend constexpr bool operator==(const CarState&, const CarState&) = default;
  friend constexpr auto operator<=>(const CarState&, const CarState&) = default;
};

// Static picture of the road: every car's position, size, reserved and
// claimed lanes. Cars are indexed by CarId.
class TrafficSnapshot {
 public:
  TrafficSnapshot() = default;
  TrafficSnapshot(std::uint32_t lane_count, std::vector<CarState> cars)
      : lane_count_(lane_count), cars_(std::move(cars)) {
    if (lane_count_ == 0 || lane_count_ > kMaxLanes)
      throw Error("lane count must be in 1.." + std::to_string(kMaxLanes));
    const LaneSet all = LaneSet::range(0, static_cast<std::int64_t>(lane_count_) - 1);
    for (const CarState& c : cars_) {
      if ((c.res | c.clm).bits() & ~all.bits()) throw Error("car references a lane outside the road");
      if (c.size <= 0) throw Error("car size must be positive");
    }
  }

  std::uint32_t lane_count() const { return lane_count_; }
  // Highest lane N.
  std::uint32_t top_lane() const { return lane_count_ - 1; }
  std::size_t car_count() const { return cars_.size(); }
  bool contains(CarId c) const { return c.value < cars_.size(); }

  const CarState& car(CarId c) const {
    if (!contains(c)) throw UnknownCar(c.value);
    return cars_[c.value];
  }
  CarState& car(CarId c) {
    if (!contains(c)) throw UnknownCar(c.value);
    return cars_[c.value];
  }
  std::span<const CarState> cars() const { return cars_; }

  friend bool operator==(const TrafficSnapshot&, const TrafficSnapshot&) = default;
  friend auto operator<=>(const TrafficSnapshot&, const TrafficSnapshot&) = default;

 private:
  std::uint32_t lane_count_ = 1;
  std::vector<CarState> cars_;
};

inline bool adjacent(LaneId a, LaneId b) {
  return a.index + 1 == b.index || b.index + 1 == a.index;
}

// Describes the first violated per-car invariant, or nullopt when all hold.
inline std::optional<std::string> check_invariants(const TrafficSnapshot& ts) {
  for (std::uint32_t i = 0; i < ts.car_count(); ++i) {
    const CarState& c = ts.cars()[i];
    const std::string who = "car " + std::to_string(i) + ": ";
    if (c.res.size() < 1 || c.res.size() > 2) return who + "|res| must be 1 or 2";
    if (c.clm.size() > 1) return who + "|clm| must be at most 1";
    if (!(c.res & c.clm).empty()) return who + "res and clm overlap";
    if (c.res.size() + c.clm.size() > 2) return who + "claim held together with two reservations";
    for (LaneId k : c.clm.lanes()) {
      bool ok = false;
      for (LaneId r : c.res.lanes()) ok = ok || adjacent(k, r);
      if (!ok) return who + "claim not adjacent to a reservation";
    }
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Views
// ---------------------------------------------------------------------------

inline View standard_view(const TrafficSnapshot& ts, CarId e, std::int64_t horizon) {
  if (horizon <= 0) throw std::invalid_argument("horizon must be positive");
  const std::int64_t p = ts.car(e).pos;
  return View{LaneRange{0, static_cast<std::int64_t>(ts.top_lane())}, Extent{p - horizon, p + horizon}, e};
}

// Part of car c perceived inside the view's extent (perfect sensors).
inline std::optional<Extent> len_v(const View& v, const TrafficSnapshot& ts, CarId c) {
  return intersect(ts.car(c).extent(), v.extent);
}

inline LaneSet res_v(const View& v, const TrafficSnapshot& ts, CarId c) {
  if (!len_v(v, ts, c)) return {};
  return ts.car(c).res & v.lanes.as_set();
}

inline LaneSet clm_v(const View& v, const TrafficSnapshot& ts, CarId c) {
  if (!len_v(v, ts, c)) return {};
  return ts.car(c).clm & v.lanes.as_set();
}

// ---------------------------------------------------------------------------
// Controller actions
// ---------------------------------------------------------------------------

struct ControllerAction {
  enum class Kind : std::uint8_t { claim, withdraw_claim, reserve, withdraw_reservation, tau };

  Kind kind = Kind::tau;
  LaneId lane;  // target of claim, kept lane of withdraw_reservation

  static constexpr ControllerAction claim(LaneId k) { return {Kind::claim, k}; }
  static constexpr ControllerAction withdraw_claim() { return {Kind::withdraw_claim, {}}; }
  static constexpr ControllerAction reserve() { return {Kind::reserve, {}}; }
  static constexpr ControllerAction withdraw_reservation(LaneId k) { return {Kind::withdraw_reservation, k}; }
  static constexpr ControllerAction tau() { return {}; }

  friend constexpr bool operator==(ControllerAction a, ControllerAction b) {
    if (a.kind != b.kind) return false;
    const bool has_lane = a.kind == Kind::claim || a.kind == Kind::withdraw_reservation;
    return !has_lane || a.lane == b.lane;
  }
};

// Renders e.g. "c(A,1)", "wd r(A,2)", "tau".
inline std::string to_string(ControllerAction a, const std::string& actor) {
  using K = ControllerAction::Kind;
  switch (a.kind) {
    case K::claim: return "c(" + actor + "," + std::to_string(a.lane.index) + ")";
    case K::withdraw_claim: return "wd c(" + actor + ")";
    case K::reserve: return "r(" + actor + ")";
    case K::withdraw_reservation: return "wd r(" + actor + "," + std::to_string(a.lane.index) + ")";
    case K::tau: return "tau";
  }
  return "?";
}

class RejectedAction : public Error {
 public:
  RejectedAction(CarId actor, ControllerAction a, const std::string& why)
      : Error("rejected action " + to_string(a, std::to_string(actor.value)) + " by car " +
              std::to_string(actor.value) + ": " + why),
        actor_(actor),
        action_(a) {}

  CarId actor() const { return actor_; }
  ControllerAction action() const { return action_; }

 private:
  CarId actor_;
  ControllerAction action_;
};

// Reason the action is not applicable, or nullopt.
inline std::optional<std::string> action_precondition_failure(const TrafficSnapshot& ts, CarId actor,
                                                              ControllerAction a) {
  const CarState& c = ts.car(actor);
  using K = ControllerAction::Kind;
  switch (a.kind) {
    case K::claim:
      if (a.lane.index > ts.top_lane()) return "claimed lane outside the road";
      if (c.res.size() != 1) return "claim requires exactly one reservation";
      if (!c.clm.empty()) return "claim requires no pending claim";
      if (!adjacent(a.lane, c.res.lowest())) return "claimed lane is not adjacent to the reserved lane";
      return std::nullopt;
    case K::withdraw_claim:
    case K::reserve:
      if (c.clm.size() != 1) return "requires exactly one claim";
      return std::nullopt;
    case K::withdraw_reservation:
      if (!c.res.contains(a.lane)) return "kept lane is not reserved";
      return std::nullopt;
    case K::tau: return std::nullopt;
  }
  return "unknown action";
}

inline TrafficSnapshot apply_action(TrafficSnapshot ts, CarId actor, ControllerAction a) {
  if (auto why = action_precondition_failure(ts, actor, a)) throw RejectedAction(actor, a, *why);
  CarState& c = ts.car(actor);
  using K = ControllerAction::Kind;
  switch (a.kind) {
    case K::claim: c.clm = LaneSet::of(a.lane); break;
    case K::withdraw_claim: c.clm = {}; break;
    case K::reserve:
      c.res = c.res | c.clm;
      c.clm = {};
      break;
    case K::withdraw_reservation: c.res = LaneSet::of(a.lane); break;
    case K::tau: break;
  }
  return ts;
}

}  // namespace lanecheck

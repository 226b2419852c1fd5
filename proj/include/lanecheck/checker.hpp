// ============================================================================
// checker.hpp — explicit-state, discrete-time model checking of a network of
// controller and observer automata over a shared traffic snapshot.
// ============================================================================
//
// Semantics
//   * Digital clocks: time advances in unit delays, all clocks together.
//   * Interleaving: one edge, or one emit/receive pair, fires per step.
//   * Guards are evaluated in the pre-state; the firing automaton's target
//     invariant must hold in the post-state.
//   * A delay is possible iff every clock invariant still holds afterwards,
//     every spatial invariant holds now, and no eager location has one of its
//     own edges enabled.
//   * Clock values are abstracted per location: a clock that is reset before
//     it is next read is kept at 0, otherwise it is capped one above the
//     largest constant it can still be compared with.
//
// Queries
//   check_ag(bad)  holds iff no reachable state is bad (breadth-first, so the
//                  witness is a shortest path).
//   check_af(good) holds iff every maximal path meets a good state. Fails
//                  with a lasso (cycle of non-good states, zero-delay cycles
//                  preferred; the shortest cycle through the earliest state
//                  found on one) or a path to a non-good state without
//                  successors.
// ============================================================================
#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "lanecheck/acta.hpp"
#include "lanecheck/mlsl.hpp"
#include "lanecheck/traffic.hpp"

namespace lanecheck::checker {

struct SystemState {
  TrafficSnapshot snapshot;
  std::vector<acta::LocationId> loc;  // per automaton
  std::vector<std::int64_t> clock;    // per automaton, 0 when it has none
  std::vector<std::int64_t> n;        // current lane, controllers only
  std::vector<std::int64_t> l;        // target lane, controllers only

  friend bool operator==(const SystemState&, const SystemState&) = default;
  friend auto operator<=>(const SystemState&, const SystemState&) = default;
};

struct Step {
  enum class Kind : std::uint8_t { delay, fire };
  static constexpr std::uint32_t kNone = std::numeric_limits<std::uint32_t>::max();

  Kind kind = Kind::delay;
  std::uint32_t automaton = kNone;
  std::uint32_t edge = kNone;
  std::uint32_t partner = kNone;  // receiving automaton of a handshake
  std::uint32_t partner_edge = kNone;
  ControllerAction action;  // resolved action of the primary edge

  static Step delay() { return {}; }
  friend bool operator==(const Step&, const Step&) = default;
};

struct Transition {
  Step step;
  SystemState target;
};

// How spatial guards are decided.
enum class GuardRoute : std::uint8_t {
  interval,  // intersect-based checks
  formula,   // full MLSL evaluation in the owner's standard view
};

struct NetworkOptions {
  GuardRoute route = GuardRoute::interval;
  bool clock_abstraction = true;
};

class Network {
 public:
  using Options = NetworkOptions;

  Network(TrafficSnapshot initial, std::vector<std::string> car_names, std::int64_t horizon, NetworkOptions opts = NetworkOptions{})
      : initial_(std::move(initial)), car_names_(std::move(car_names)), horizon_(horizon), opts_(opts) {
    if (car_names_.size() != initial_.car_count()) throw Error("one name per car required");
    if (horizon_ <= 0) throw Error("horizon must be positive");
    std::int64_t lo = std::numeric_limits<std::int64_t>::max(), hi = std::numeric_limits<std::int64_t>::min();
    for (const CarState& c : initial_.cars()) {
      lo = std::min(lo, c.pos);
      hi = std::max(hi, c.pos + c.size);
    }
    if (initial_.car_count() == 0) lo = hi = 0;
    global_view_ = View{LaneRange{0, static_cast<std::int64_t>(initial_.top_lane())}, Extent{lo, hi}, CarId{0}};
  }

  std::size_t add(acta::Automaton a) {
    if (a.owner && !initial_.contains(*a.owner)) throw UnknownCar(a.owner->value);
    if (automata_.size() >= 254 || a.edges.size() >= 255 || a.locations.size() >= 255)
      throw Error("network too large");
    automata_.push_back(std::move(a));
    return automata_.size() - 1;
  }

  // Must be called once after all automata are added: emitters without any
  // matching receiver in the network fire on their own, and per-location
  // clock bounds are computed.
  void finalize() {
    for (auto& a : automata_)
      for (auto& e : a.edges)
        if (e.sync.dir == acta::Sync::Dir::emit && !has_receiver(e.sync)) e.sync.dir = acta::Sync::Dir::none;
    edges_from_.assign(automata_.size(), {});
    relevance_.assign(automata_.size(), {});
    for (std::size_t a = 0; a < automata_.size(); ++a) {
      const auto& aut = automata_[a];
      edges_from_[a].assign(aut.locations.size(), {});
      for (std::size_t e = 0; e < aut.edges.size(); ++e)
        edges_from_[a][aut.edges[e].source].push_back(static_cast<std::uint32_t>(e));
      relevance_[a] = clock_relevance(aut);
      data_live_.push_back(data_liveness(aut));
    }
    finalized_ = true;
  }

  std::size_t automaton_count() const { return automata_.size(); }
  const acta::Automaton& automaton(std::size_t i) const { return automata_.at(i); }
  std::optional<std::size_t> find(std::string_view name) const {
    for (std::size_t i = 0; i < automata_.size(); ++i)
      if (automata_[i].name == name) return i;
    return std::nullopt;
  }
  const TrafficSnapshot& initial_snapshot() const { return initial_; }
  const std::vector<std::string>& car_names() const { return car_names_; }
  std::int64_t horizon() const { return horizon_; }
  const Options& options() const { return opts_; }

  // Largest clock value the abstraction keeps in location q, or -1 when the
  // clock is dead there.
  std::int64_t clock_relevance(std::size_t a, acta::LocationId q) const { return relevance_.at(a).at(q); }

  SystemState initial_state() const {
    require_finalized();
    SystemState s;
    s.snapshot = initial_;
    for (const auto& a : automata_) {
      s.loc.push_back(a.initial);
      s.clock.push_back(0);
      const std::int64_t lane = a.owner ? initial_.car(*a.owner).res.lowest().index : 0;
      s.n.push_back(lane);
      s.l.push_back(lane);
    }
    for (std::size_t a = 0; a < automata_.size(); ++a) normalize_data(a, s);
    return s;
  }

  // Every clock invariant and, for state validity, every spatial invariant.
  bool invariants_hold(const SystemState& s) const {
    for (std::size_t a = 0; a < automata_.size(); ++a)
      if (!invariant_holds(a, s.loc[a], s, true)) return false;
    return true;
  }

  std::vector<Transition> successors(const SystemState& s) const {
    require_finalized();
    std::vector<Transition> out;
    std::vector<bool> acted(automata_.size(), false);
    for (std::size_t a = 0; a < automata_.size(); ++a) {
      for (std::uint32_t ei : edges_from_[a][s.loc[a]]) {
        const acta::Edge& e = automata_[a].edges[ei];
        if (e.sync.dir == acta::Sync::Dir::receive) continue;
        if (!guard_holds(a, e.guard, s)) continue;
        ControllerAction act;
        auto mid = fire(a, e, s, act);
        if (!mid) continue;
        if (e.sync.dir == acta::Sync::Dir::none) {
          if (!invariant_holds(a, e.target, *mid, true)) continue;
          acted[a] = true;
          out.push_back({Step{Step::Kind::fire, static_cast<std::uint32_t>(a), ei, Step::kNone, Step::kNone, act},
                         std::move(*mid)});
          continue;
        }
        for (std::size_t b = 0; b < automata_.size(); ++b) {
          if (b == a) continue;
          for (std::uint32_t fi : edges_from_[b][s.loc[b]]) {
            const acta::Edge& f = automata_[b].edges[fi];
            if (f.sync.dir != acta::Sync::Dir::receive || !f.sync.matches(e.sync)) continue;
            if (!guard_holds(b, f.guard, s)) continue;
            ControllerAction ignored;
            auto post = fire(b, f, *mid, ignored);
            if (!post) continue;
            if (!invariant_holds(a, e.target, *post, true) || !invariant_holds(b, f.target, *post, true)) continue;
            acted[a] = true;
            out.push_back({Step{Step::Kind::fire, static_cast<std::uint32_t>(a), ei, static_cast<std::uint32_t>(b), fi,
                                act},
                           std::move(*post)});
          }
        }
      }
    }
    if (auto d = delay(s, acted)) out.push_back({Step::delay(), std::move(*d)});
    return out;
  }

  // No edge can fire now or after any number of delays.
  bool deadlock(const SystemState& s) const {
    SystemState cur = s;
    for (int guard = 0; guard < 1 << 16; ++guard) {
      std::optional<SystemState> next;
      for (Transition& t : successors(cur)) {
        if (t.step.kind == Step::Kind::fire) return false;
        next = std::move(t.target);
      }
      if (!next || *next == cur) return true;
      cur = std::move(*next);
    }
    return true;
  }

  std::string car_name(CarId c) const { return car_names_.at(c.value); }

  // "delay 1" or "fire <car|automaton> <edge> <action>".
  std::string describe(const Step& st) const {
    if (st.kind == Step::Kind::delay) return "delay 1";
    const acta::Automaton& a = automata_.at(st.automaton);
    const std::string who = a.owner ? car_name(*a.owner) : a.name;
    const std::string act = a.owner ? to_string(st.action, who) : "tau";
    return "fire " + who + " " + a.edges.at(st.edge).name + " " + act;
  }

  std::string describe(const SystemState& s) const {
    std::string out;
    for (std::size_t a = 0; a < automata_.size(); ++a) {
      const auto& aut = automata_[a];
      if (!out.empty()) out += " ";
      out += aut.name + "=" + aut.locations[s.loc[a]].name;
      if (aut.has_clock) out += "[x=" + std::to_string(s.clock[a]) + "]";
    }
    for (std::uint32_t c = 0; c < s.snapshot.car_count(); ++c) {
      const CarState& cs = s.snapshot.cars()[c];
      out += " " + car_names_[c] + ":res" + to_string(cs.res) + "clm" + to_string(cs.clm);
    }
    return out;
  }

  View standard_view_of(const TrafficSnapshot& ts, CarId c) const { return standard_view(ts, c, horizon_); }

 private:
  void require_finalized() const {
    if (!finalized_) throw Error("network used before finalize()");
  }

  bool has_receiver(const acta::Sync& s) const {
    for (const auto& a : automata_)
      for (const auto& e : a.edges)
        if (e.sync.dir == acta::Sync::Dir::receive && e.sync.matches(s)) return true;
    return false;
  }

  static std::vector<std::int64_t> clock_relevance(const acta::Automaton& a) {
    std::vector<std::int64_t> rel(a.locations.size(), -1);
    if (!a.has_clock) return rel;
    auto note = [](std::int64_t& r, const acta::Guard& g) {
      for (const auto& atom : g.atoms)
        if (const auto* c = std::get_if<acta::ClockConstraint>(&atom)) r = std::max(r, c->bound);
    };
    for (std::size_t q = 0; q < a.locations.size(); ++q) note(rel[q], a.locations[q].invariant);
    for (const auto& e : a.edges) note(rel[e.source], e.guard);
    for (bool changed = true; changed;) {
      changed = false;
      for (const auto& e : a.edges) {
        bool resets = false;
        for (const auto& u : e.updates) resets = resets || std::holds_alternative<acta::ClockReset>(u);
        if (!resets && rel[e.target] > rel[e.source]) {
          rel[e.source] = rel[e.target];
          changed = true;
        }
      }
    }
    return rel;
  }

  static std::uint8_t reads(const acta::LaneExpr& e) {
    auto bit = [](acta::DataVar v) -> std::uint8_t { return v == acta::DataVar::n ? 1 : v == acta::DataVar::l ? 2 : 0; };
    return bit(e.first) | (e.sign != 0 ? bit(e.second) : 0);
  }
  static std::uint8_t reads(const acta::Guard& g) {
    std::uint8_t r = 0;
    for (const auto& atom : g.atoms)
      if (const auto* d = std::get_if<acta::DataConstraint>(&atom)) r |= reads(d->lhs) | reads(d->rhs);
    return r;
  }

  // Per location, which of n and l may be read before being assigned.
  static std::vector<std::uint8_t> data_liveness(const acta::Automaton& a) {
    std::vector<std::uint8_t> live(a.locations.size(), 0);
    for (std::size_t q = 0; q < a.locations.size(); ++q) live[q] = reads(a.locations[q].invariant);
    for (bool changed = true; changed;) {
      changed = false;
      for (const auto& e : a.edges) {
        std::uint8_t r = reads(e.guard) | reads(e.action.lane), assigned = 0;
        for (const auto& u : e.updates)
          if (const auto* as = std::get_if<acta::Assign>(&u)) {
            r |= reads(as->value) & ~assigned;
            assigned |= as->target == acta::DataVar::n ? 1 : 2;
          }
        const std::uint8_t now = live[e.source] | r | (live[e.target] & ~assigned);
        if (now != live[e.source]) {
          live[e.source] = now;
          changed = true;
        }
      }
    }
    return live;
  }

  void normalize_data(std::size_t a, SystemState& s) const {
    if (!automata_[a].owner) return;
    const std::uint8_t live = data_live_[a][s.loc[a]];
    if (!(live & 1)) s.n[a] = 0;
    if (!(live & 2)) s.l[a] = 0;
  }

  void normalize_clock(std::size_t a, SystemState& s) const {
    if (!automata_[a].has_clock) {
      s.clock[a] = 0;
      return;
    }
    if (!opts_.clock_abstraction) return;
    const std::int64_t r = relevance_[a][s.loc[a]];
    s.clock[a] = r < 0 ? 0 : std::min(s.clock[a], r + 1);
  }

  acta::DataValues data(std::size_t a, const SystemState& s) const {
    return {s.n[a], s.l[a], static_cast<std::int64_t>(s.snapshot.top_lane())};
  }

  bool spatial_holds(std::size_t a, const acta::SpatialConstraint& sc, const SystemState& s) const {
    using acta::SpatialCheck;
    const TrafficSnapshot& ts = s.snapshot;
    if (sc.check == SpatialCheck::any_collision) {
      if (opts_.route == GuardRoute::interval) return mlsl::collision(ts);
      return mlsl::eval(ts, global_view_, mlsl::Valuation{}, sc.formula);
    }
    const auto& owner = automata_[a].owner;
    if (!owner) throw Error(automata_[a].name + ": spatial guard needs an owning car");
    const View v = standard_view_of(ts, *owner);
    if (opts_.route == GuardRoute::formula) return mlsl::eval(ts, v, mlsl::Valuation::with_ego(*owner), sc.formula);
    switch (sc.check) {
      case SpatialCheck::collision_check: return mlsl::cc(ts, v);
      case SpatialCheck::potential_collision: return mlsl::any_pc(ts, v);
      case SpatialCheck::no_potential_collision: return !mlsl::any_pc(ts, v);
      case SpatialCheck::any_collision: break;
    }
    return false;
  }

  bool guard_holds(std::size_t a, const acta::Guard& g, const SystemState& s) const {
    for (const auto& atom : g.atoms) {
      const bool ok = std::visit(
          [&](const auto& x) -> bool {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, acta::ClockConstraint>) return acta::compare(s.clock[a], x.op, x.bound);
            else if constexpr (std::is_same_v<T, acta::DataConstraint>) {
              const auto d = data(a, s);
              return acta::compare(x.lhs.evaluate(d), x.op, x.rhs.evaluate(d));
            } else return spatial_holds(a, x, s);
          },
          atom);
      if (!ok) return false;
    }
    return true;
  }

  bool invariant_holds(std::size_t a, acta::LocationId q, const SystemState& s, bool with_spatial) const {
    for (const auto& atom : automata_[a].locations[q].invariant.atoms) {
      if (const auto* c = std::get_if<acta::ClockConstraint>(&atom)) {
        if (!acta::compare(s.clock[a], c->op, c->bound)) return false;
      } else if (const auto* d = std::get_if<acta::DataConstraint>(&atom)) {
        const auto v = data(a, s);
        if (!acta::compare(d->lhs.evaluate(v), d->op, d->rhs.evaluate(v))) return false;
      } else if (with_spatial && !spatial_holds(a, std::get<acta::SpatialConstraint>(atom), s)) {
        return false;
      }
    }
    return true;
  }

  // Applies the edge's action and updates; nullopt when the action's
  // precondition fails or an assignment leaves the road.
  std::optional<SystemState> fire(std::size_t a, const acta::Edge& e, const SystemState& s,
                                  ControllerAction& act) const {
    const auto& aut = automata_[a];
    const auto d = data(a, s);
    SystemState t = s;
    act = e.action.resolve(d);
    if (aut.owner) {
      const auto k = e.action.lane.evaluate(d);
      if (k < 0 || k > static_cast<std::int64_t>(s.snapshot.top_lane())) {
        if (e.action.kind == ControllerAction::Kind::claim ||
            e.action.kind == ControllerAction::Kind::withdraw_reservation)
          return std::nullopt;
      }
      if (action_precondition_failure(t.snapshot, *aut.owner, act)) return std::nullopt;
      t.snapshot = apply_action(std::move(t.snapshot), *aut.owner, act);
    }
    for (const auto& u : e.updates) {
      if (std::holds_alternative<acta::ClockReset>(u)) {
        t.clock[a] = 0;
      } else {
        const auto& as = std::get<acta::Assign>(u);
        const auto v = as.value.evaluate(data(a, t));
        if (v < 0 || v > static_cast<std::int64_t>(s.snapshot.top_lane())) return std::nullopt;
        (as.target == acta::DataVar::n ? t.n[a] : t.l[a]) = v;
      }
    }
    t.loc[a] = e.target;
    normalize_clock(a, t);
    normalize_data(a, t);
    return t;
  }

  std::optional<SystemState> delay(const SystemState& s, const std::vector<bool>& acted) const {
    for (std::size_t a = 0; a < automata_.size(); ++a) {
      const acta::Location& q = automata_[a].locations[s.loc[a]];
      if (q.eager && acted[a]) return std::nullopt;
      for (const auto& atom : q.invariant.atoms) {
        if (const auto* c = std::get_if<acta::ClockConstraint>(&atom)) {
          if (c->op != acta::Cmp::ge && !acta::compare(s.clock[a] + 1, c->op, c->bound)) return std::nullopt;
        } else if (const auto* sc = std::get_if<acta::SpatialConstraint>(&atom)) {
          if (!spatial_holds(a, *sc, s)) return std::nullopt;
        }
      }
    }
    SystemState t = s;
    for (std::size_t a = 0; a < automata_.size(); ++a) {
      if (!automata_[a].has_clock) continue;
      t.clock[a] += 1;
      normalize_clock(a, t);
    }
    return t;
  }

  TrafficSnapshot initial_;
  std::vector<std::string> car_names_;
  std::int64_t horizon_;
  Options opts_;
  View global_view_;
  std::vector<acta::Automaton> automata_;
  std::vector<std::vector<std::vector<std::uint32_t>>> edges_from_;
  std::vector<std::vector<std::int64_t>> relevance_;
  std::vector<std::vector<std::uint8_t>> data_live_;  // bit 0: n, bit 1: l
  bool finalized_ = false;
};

using StatePredicate = std::function<bool(const SystemState&)>;

// ---------------------------------------------------------------------------
// State storage
// ---------------------------------------------------------------------------

// Bit-packs the variable part of a SystemState into a fixed number of words.
// Positions and sizes never change and come from the network.
class StateCodec {
 public:
  explicit StateCodec(const Network& net) : net_(net) {
    const auto& ts = net.initial_snapshot();
    lane_bits_ = ts.lane_count();
    auto width = [](std::uint64_t max_value) {
      int b = 1;
      while (b < 63 && (std::uint64_t{1} << b) <= max_value) ++b;
      return b;
    };
    loc_bits_.resize(net.automaton_count());
    clock_bits_.resize(net.automaton_count());
    data_bits_ = width(ts.top_lane());
    std::size_t total = 2 * lane_bits_ * ts.car_count();
    for (std::size_t a = 0; a < net.automaton_count(); ++a) {
      const auto& aut = net.automaton(a);
      loc_bits_[a] = width(aut.locations.size() - 1);
      if (aut.has_clock) {
        std::int64_t cap = 0;
        for (std::size_t q = 0; q < aut.locations.size(); ++q)
          cap = std::max(cap, net.clock_relevance(a, static_cast<acta::LocationId>(q)) + 1);
        clock_bits_[a] = net.options().clock_abstraction ? width(static_cast<std::uint64_t>(cap)) : 24;
      }
      total += loc_bits_[a] + clock_bits_[a] + (aut.owner ? 2 * data_bits_ : 0);
    }
    words_ = std::max<std::size_t>(1, (total + 63) / 64);
  }

  std::size_t words() const { return words_; }

  void encode(const SystemState& s, std::uint64_t* out) const {
    std::fill(out, out + words_, 0);
    std::size_t bit = 0;
    auto put = [&](std::uint64_t v, int bits) {
      if (bits < 64 && (v >> bits) != 0) throw Error("state value exceeds its encoding width");
      const std::size_t w = bit / 64, off = bit % 64;
      out[w] |= v << off;
      if (off + bits > 64) out[w + 1] |= v >> (64 - off);
      bit += bits;
    };
    for (const CarState& c : s.snapshot.cars()) {
      put(c.res.bits(), static_cast<int>(lane_bits_));
      put(c.clm.bits(), static_cast<int>(lane_bits_));
    }
    for (std::size_t a = 0; a < loc_bits_.size(); ++a) {
      put(s.loc[a], loc_bits_[a]);
      put(static_cast<std::uint64_t>(s.clock[a]), clock_bits_[a]);
      if (net_.automaton(a).owner) {
        put(static_cast<std::uint64_t>(s.n[a]), data_bits_);
        put(static_cast<std::uint64_t>(s.l[a]), data_bits_);
      }
    }
  }

  SystemState decode(const std::uint64_t* in) const {
    std::size_t bit = 0;
    auto get = [&](int bits) {
      const std::size_t w = bit / 64, off = bit % 64;
      std::uint64_t v = in[w] >> off;
      if (off + bits > 64) v |= in[w + 1] << (64 - off);
      bit += bits;
      return bits == 64 ? v : v & ((std::uint64_t{1} << bits) - 1);
    };
    const auto& ts0 = net_.initial_snapshot();
    std::vector<CarState> cars(ts0.cars().begin(), ts0.cars().end());
    for (CarState& c : cars) {
      c.res = LaneSet::from_bits(static_cast<std::uint32_t>(get(static_cast<int>(lane_bits_))));
      c.clm = LaneSet::from_bits(static_cast<std::uint32_t>(get(static_cast<int>(lane_bits_))));
    }
    SystemState s;
    s.snapshot = TrafficSnapshot(ts0.lane_count(), std::move(cars));
    for (std::size_t a = 0; a < loc_bits_.size(); ++a) {
      s.loc.push_back(static_cast<acta::LocationId>(get(loc_bits_[a])));
      s.clock.push_back(static_cast<std::int64_t>(get(clock_bits_[a])));
      if (net_.automaton(a).owner) {
        s.n.push_back(static_cast<std::int64_t>(get(data_bits_)));
        s.l.push_back(static_cast<std::int64_t>(get(data_bits_)));
      } else {
        s.n.push_back(0);
        s.l.push_back(0);
      }
    }
    return s;
  }

 private:
  const Network& net_;
  std::uint32_t lane_bits_ = 0;
  std::vector<int> loc_bits_;
  std::vector<int> clock_bits_;
  int data_bits_ = 1;
  std::size_t words_ = 1;
};

// Open-addressing set of fixed-width keys; indices are dense and stable.
class StateStore {
 public:
  explicit StateStore(std::size_t words) : words_(words), table_(1024, kEmpty) {}

  std::size_t size() const { return count_; }
  const std::uint64_t* key(std::uint32_t i) const { return arena_.data() + static_cast<std::size_t>(i) * words_; }

  // Index of the key and whether it was newly inserted.
  std::pair<std::uint32_t, bool> insert(const std::uint64_t* k) {
    if ((count_ + 1) * 2 > table_.size()) grow();
    std::size_t mask = table_.size() - 1;
    for (std::size_t h = hash(k) & mask;; h = (h + 1) & mask) {
      if (table_[h] == kEmpty) {
        const auto idx = static_cast<std::uint32_t>(count_++);
        arena_.insert(arena_.end(), k, k + words_);
        table_[h] = idx;
        return {idx, true};
      }
      if (std::equal(k, k + words_, key(table_[h]))) return {table_[h], false};
    }
  }

  std::optional<std::uint32_t> find(const std::uint64_t* k) const {
    std::size_t mask = table_.size() - 1;
    for (std::size_t h = hash(k) & mask;; h = (h + 1) & mask) {
      if (table_[h] == kEmpty) return std::nullopt;
      if (std::equal(k, k + words_, key(table_[h]))) return table_[h];
    }
  }

 private:
  static constexpr std::uint32_t kEmpty = std::numeric_limits<std::uint32_t>::max();

  std::uint64_t hash(const std::uint64_t* k) const {
    std::uint64_t h = 0x9e3779b97f4a7c15ull;
    for (std::size_t i = 0; i < words_; ++i) {
      std::uint64_t z = k[i] + h + 0x9e3779b97f4a7c15ull;
      z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
      z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
      h = z ^ (z >> 31);
    }
    return h;
  }

  void grow() {
    std::vector<std::uint32_t> bigger(table_.size() * 2, kEmpty);
    const std::size_t mask = bigger.size() - 1;
    for (std::uint32_t i = 0; i < count_; ++i) {
      std::size_t h = hash(key(i)) & mask;
      while (bigger[h] != kEmpty) h = (h + 1) & mask;
      bigger[h] = i;
    }
    table_.swap(bigger);
  }

  std::size_t words_;
  std::vector<std::uint64_t> arena_;
  std::vector<std::uint32_t> table_;
  std::size_t count_ = 0;
};

// ---------------------------------------------------------------------------
// Verdicts and traces
// ---------------------------------------------------------------------------

enum class Outcome : std::uint8_t { holds, fails, inconclusive };

inline std::string to_string(Outcome o) {
  switch (o) {
    case Outcome::holds: return "holds";
    case Outcome::fails: return "fails";
    case Outcome::inconclusive: return "inconclusive";
  }
  return "?";
}

struct TraceStep {
  Step step;
  SystemState state;  // state after the step
};

struct Trace {
  enum class Kind : std::uint8_t { path, lasso, dead_end };
  Kind kind = Kind::path;
  SystemState initial;
  std::vector<TraceStep> stem;
  std::vector<TraceStep> cycle;  // lasso only; ends in the state that starts it
};

inline std::string to_string(Trace::Kind k) {
  switch (k) {
    case Trace::Kind::path: return "path";
    case Trace::Kind::lasso: return "lasso";
    case Trace::Kind::dead_end: return "dead-end";
  }
  return "?";
}

struct Verdict {
  Outcome outcome = Outcome::inconclusive;
  std::optional<Trace> witness;  // present iff outcome == fails
  std::size_t states = 0;
  std::string note;
};

struct Options {
  std::size_t max_states = 10'000'000;
  unsigned workers = 1;
};

// Replays a witness step by step against the successor relation.
inline bool replays(const Network& net, const Trace& tr) {
  if (!net.invariants_hold(tr.initial)) return false;
  SystemState cur = tr.initial;
  auto walk = [&](const std::vector<TraceStep>& steps) {
    for (const TraceStep& ts : steps) {
      bool found = false;
      for (const Transition& t : net.successors(cur)) {
        if (t.step == ts.step && t.target == ts.state) {
          found = true;
          break;
        }
      }
      if (!found) return false;
      cur = ts.state;
    }
    return true;
  };
  if (!walk(tr.stem)) return false;
  switch (tr.kind) {
    case Trace::Kind::path: return tr.cycle.empty();
    case Trace::Kind::dead_end: return tr.cycle.empty() && net.successors(cur).empty();
    case Trace::Kind::lasso: {
      if (tr.cycle.empty()) return false;
      const SystemState start = cur;
      return walk(tr.cycle) && cur == start;
    }
  }
  return false;
}

namespace detail {

// Compact step: automaton | edge | partner | partner edge, one byte each.
inline std::uint32_t pack(const Step& s) {
  if (s.kind == Step::Kind::delay) return 0xFFFFFFFFu;
  auto byte = [](std::uint32_t v) { return v == Step::kNone ? 0xFFu : (v & 0xFFu); };
  return byte(s.automaton) << 24 | byte(s.edge) << 16 | byte(s.partner) << 8 | byte(s.partner_edge);
}

inline constexpr std::uint32_t kDelay = 0xFFFFFFFFu;
inline constexpr std::uint32_t kNoParent = 0xFFFFFFFFu;

struct GraphEdge {
  std::uint32_t target;
  std::uint32_t step;
};

// Level-synchronous breadth-first exploration. Successors of a batch of
// frontier states may be computed by several workers; they are merged in
// frontier order, so results do not depend on the worker count.
class Explorer {
 public:
  Explorer(const Network& net, const Options& opts, bool record_edges)
      : net_(net), codec_(net), store_(codec_.words()), opts_(opts), record_(record_edges) {}

  struct Result {
    std::optional<std::uint32_t> hit;
    bool budget_exceeded = false;
  };

  // Stops at the first stored state satisfying `stop`; states satisfying
  // `frozen` are stored but not expanded.
  Result run(const SystemState& init, const StatePredicate& stop, const StatePredicate& frozen) {
    Result res;
    std::vector<std::uint64_t> key(codec_.words());
    codec_.encode(init, key.data());
    store_.insert(key.data());
    parent_.push_back(kNoParent);
    parent_step_.push_back(kDelay);
    expanded_.push_back(false);
    if (stop && stop(init)) {
      res.hit = 0;
      return res;
    }
    std::vector<std::uint32_t> frontier;
    if (!(frozen && frozen(init))) frontier.push_back(0);
    if (record_) offsets_.assign(1, 0);

    const std::size_t batch = 4096;
    while (!frontier.empty()) {
      std::vector<std::uint32_t> next;
      for (std::size_t lo = 0; lo < frontier.size(); lo += batch) {
        const std::size_t hi = std::min(frontier.size(), lo + batch);
        auto succ = expand_batch(frontier, lo, hi);
        for (std::size_t i = lo; i < hi; ++i) {
          const std::uint32_t u = frontier[i];
          expanded_[u] = true;
          if (record_) begin_edges(u);
          const auto& list = succ[i - lo];
          const std::size_t w = codec_.words() + 1;
          for (std::size_t j = 0; j + w <= list.size(); j += w) {
            const auto step = static_cast<std::uint32_t>(list[j]);
            auto [v, fresh] = store_.insert(list.data() + j + 1);
            if (fresh) {
              parent_.push_back(u);
              parent_step_.push_back(step);
              expanded_.push_back(false);
              if (store_.size() > opts_.max_states) {
                res.budget_exceeded = true;
                return res;
              }
              const bool need_state = stop || frozen;
              if (need_state) {
                const SystemState s = codec_.decode(list.data() + j + 1);
                if (stop && stop(s)) {
                  res.hit = v;
                  return res;
                }
                if (!(frozen && frozen(s))) next.push_back(v);
              } else {
                next.push_back(v);
              }
            }
            if (record_) edges_.push_back({v, step});
          }
        }
      }
      frontier.swap(next);
    }
    if (record_) begin_edges(static_cast<std::uint32_t>(store_.size()));
    return res;
  }

  std::size_t size() const { return store_.size(); }
  SystemState state(std::uint32_t i) const { return codec_.decode(store_.key(i)); }
  bool expanded(std::uint32_t i) const { return expanded_[i]; }

  // Out-edges of an expanded state (recording mode).
  std::pair<const GraphEdge*, const GraphEdge*> out(std::uint32_t u) const {
    if (u + 1 >= offsets_.size()) return {nullptr, nullptr};
    return {edges_.data() + offsets_[u], edges_.data() + offsets_[u + 1]};
  }

  // (parent state, packed step) pairs from the root to i.
  std::vector<std::pair<std::uint32_t, std::uint32_t>> path_to(std::uint32_t i) const {
    std::vector<std::pair<std::uint32_t, std::uint32_t>> rev;
    while (parent_[i] != kNoParent) {
      rev.emplace_back(parent_[i], parent_step_[i]);
      i = parent_[i];
    }
    std::reverse(rev.begin(), rev.end());
    return rev;
  }

  // Resolves a packed step from state `from` into a full trace step.
  TraceStep resolve(std::uint32_t from, std::uint32_t packed, std::uint32_t to) const {
    const SystemState s = state(from);
    std::vector<std::uint64_t> want(store_.key(to), store_.key(to) + codec_.words());
    std::vector<std::uint64_t> key(codec_.words());
    for (Transition& t : net_.successors(s)) {
      if (pack(t.step) != packed) continue;
      codec_.encode(t.target, key.data());
      if (key == want) return {t.step, std::move(t.target)};
    }
    throw Error("internal: could not resolve trace step");
  }

 private:
  // Edges are appended in expansion order; offsets_[u] marks where u's begin.
  void begin_edges(std::uint32_t u) {
    while (offsets_.size() <= u) offsets_.push_back(static_cast<std::uint32_t>(edges_.size()));
    offsets_[u] = static_cast<std::uint32_t>(edges_.size());
  }

  std::vector<std::vector<std::uint64_t>> expand_batch(const std::vector<std::uint32_t>& frontier, std::size_t lo,
                                                       std::size_t hi) const {
    std::vector<std::vector<std::uint64_t>> out(hi - lo);
    auto work = [&](std::size_t from, std::size_t to) {
      for (std::size_t i = from; i < to; ++i) {
        const SystemState s = codec_.decode(store_.key(frontier[i]));
        auto& list = out[i - lo];
        for (const Transition& t : net_.successors(s)) {
          list.push_back(pack(t.step));
          const std::size_t at = list.size();
          list.resize(at + codec_.words());
          codec_.encode(t.target, list.data() + at);
        }
      }
    };
    const unsigned workers = std::max(1u, opts_.workers);
    if (workers == 1 || hi - lo < 64) {
      work(lo, hi);
      return out;
    }
    std::vector<std::thread> pool;
    const std::size_t chunk = (hi - lo + workers - 1) / workers;
    for (unsigned w = 0; w < workers; ++w) {
      const std::size_t a = lo + w * chunk, b = std::min(hi, a + chunk);
      if (a < b) pool.emplace_back(work, a, b);
    }
    for (auto& t : pool) t.join();
    return out;
  }

  const Network& net_;
  StateCodec codec_;
  StateStore store_;
  Options opts_;
  bool record_;
  std::vector<std::uint32_t> parent_;
  std::vector<std::uint32_t> parent_step_;
  std::vector<bool> expanded_;
  std::vector<std::uint32_t> offsets_;
  std::vector<GraphEdge> edges_;
};

inline std::vector<TraceStep> resolve_path(const Explorer& ex, std::uint32_t to) {
  std::vector<TraceStep> steps;
  auto path = ex.path_to(to);
  for (std::size_t i = 0; i < path.size(); ++i) {
    const std::uint32_t next = i + 1 < path.size() ? path[i + 1].first : to;
    steps.push_back(ex.resolve(path[i].first, path[i].second, next));
  }
  return steps;
}

inline std::uint32_t actor_of(std::uint32_t packed) { return packed == kDelay ? 0xFFu : packed >> 24; }
inline std::uint32_t partner_of(std::uint32_t packed) { return packed == kDelay ? 0xFFu : (packed >> 8) & 0xFFu; }
inline bool involves(std::uint32_t packed, std::uint32_t a) { return actor_of(packed) == a || partner_of(packed) == a; }

using Cycle = std::vector<std::pair<std::uint32_t, GraphEdge>>;
using EdgeFilter = std::function<bool(const GraphEdge&)>;

// Strongly connected components of the expanded states under `use`.
// comp[v] is unset for states on no cycle.
inline std::vector<std::uint32_t> cyclic_components(const Explorer& ex, const EdgeFilter& use) {
  const auto n = static_cast<std::uint32_t>(ex.size());
  constexpr std::uint32_t kUnset = std::numeric_limits<std::uint32_t>::max();
  auto usable = [&](const GraphEdge& e) { return use(e) && ex.expanded(e.target); };

  std::vector<std::uint32_t> index(n, kUnset), low(n, 0), comp(n, kUnset);
  std::vector<std::uint32_t> stack;
  std::vector<bool> on_stack(n, false);
  struct Frame {
    std::uint32_t node;
    const GraphEdge* it;
    const GraphEdge* end;
  };
  std::vector<Frame> calls;
  std::uint32_t counter = 0, comps = 0;
  auto enter = [&](std::uint32_t v) {
    index[v] = low[v] = counter++;
    stack.push_back(v);
    on_stack[v] = true;
    auto [b, e] = ex.out(v);
    calls.push_back({v, b, e});
  };
  for (std::uint32_t root = 0; root < n; ++root) {
    if (index[root] != kUnset || !ex.expanded(root)) continue;
    enter(root);
    while (!calls.empty()) {
      Frame& f = calls.back();
      if (f.it != f.end) {
        const GraphEdge& e = *f.it++;
        if (!usable(e)) continue;
        if (index[e.target] == kUnset) enter(e.target);
        else if (on_stack[e.target]) low[f.node] = std::min(low[f.node], index[e.target]);
        continue;
      }
      const std::uint32_t v = f.node;
      calls.pop_back();
      if (!calls.empty()) low[calls.back().node] = std::min(low[calls.back().node], low[v]);
      if (low[v] != index[v]) continue;
      std::vector<std::uint32_t> members;
      std::uint32_t w;
      do {
        w = stack.back();
        stack.pop_back();
        on_stack[w] = false;
        members.push_back(w);
      } while (w != v);
      bool cyclic = members.size() > 1;
      auto [b, e] = ex.out(v);
      for (auto it = b; it != e && !cyclic; ++it) cyclic = usable(*it) && it->target == v;
      if (!cyclic) continue;
      for (auto m : members) comp[m] = comps;
      ++comps;
    }
  }
  return comp;
}

// Shortest non-empty path inside component `c` from `from` whose last edge
// is accepted by `goal`.
inline std::optional<Cycle> path_within(const Explorer& ex, const EdgeFilter& use, const std::vector<std::uint32_t>& comp,
                                        std::uint32_t c, std::uint32_t from,
                                        const std::function<bool(std::uint32_t, const GraphEdge&)>& goal) {
  const auto n = static_cast<std::uint32_t>(ex.size());
  std::vector<std::pair<std::uint32_t, GraphEdge>> via(n);
  std::vector<bool> seen(n, false);
  std::vector<std::uint32_t> queue{from};
  seen[from] = true;
  for (std::size_t qi = 0; qi < queue.size(); ++qi) {
    const std::uint32_t u = queue[qi];
    auto [b, e] = ex.out(u);
    for (auto it = b; it != e; ++it) {
      if (!use(*it) || !ex.expanded(it->target) || comp[it->target] != c) continue;
      if (goal(u, *it)) {
        Cycle path{{u, *it}};
        for (std::uint32_t v = u; v != from; v = via[v].first) path.push_back(via[v]);
        std::reverse(path.begin(), path.end());
        return path;
      }
      if (seen[it->target]) continue;
      seen[it->target] = true;
      via[it->target] = {u, *it};
      queue.push_back(it->target);
    }
  }
  return std::nullopt;
}

// A cycle in the earliest-discovered component admitting one. With
// `fair_to` set, the cycle must be weakly fair to those automata: each one
// either fires on it or, somewhere on it, rests in its initial location or
// has nothing enabled. Without fairness it is the shortest cycle through the
// component's earliest state.
inline std::optional<Cycle> find_cycle(const Explorer& ex, const EdgeFilter& use,
                                       const std::vector<std::pair<std::uint32_t, acta::LocationId>>* fair_to = nullptr) {
  const auto comp = cyclic_components(ex, use);
  const auto n = static_cast<std::uint32_t>(ex.size());
  constexpr std::uint32_t kUnset = std::numeric_limits<std::uint32_t>::max();

  auto rests = [&](std::uint32_t v, std::uint32_t a, acta::LocationId home) {
    if (ex.state(v).loc[a] == home) return true;
    auto [b, e] = ex.out(v);
    for (auto it = b; it != e; ++it)
      if (involves(it->step, a)) return false;
    return true;
  };

  std::vector<std::vector<std::uint32_t>> members;
  for (std::uint32_t v = 0; v < n; ++v) {
    if (comp[v] == kUnset) continue;
    if (comp[v] >= members.size()) members.resize(comp[v] + 1);
    members[comp[v]].push_back(v);
  }
  std::vector<bool> tried(members.size(), false);
  for (std::uint32_t start = 0; start < n; ++start) {
    const std::uint32_t c = comp[start];
    if (c == kUnset || tried[c]) continue;
    tried[c] = true;

    auto back = [&](std::uint32_t, const GraphEdge& e) { return e.target == start; };
    if (!fair_to) return path_within(ex, use, comp, c, start, back);

    // Component-level feasibility, then stitch witnesses together.
    std::vector<bool> done(fair_to->size(), false);
    bool feasible = true;
    for (std::size_t k = 0; k < fair_to->size() && feasible; ++k) {
      const auto [a, home] = (*fair_to)[k];
      bool ok = false;
      for (std::uint32_t v : members[c]) {
        if (ok) break;
        if (rests(v, a, home)) ok = true;
        auto [b, e] = ex.out(v);
        for (auto it = b; it != e && !ok; ++it)
          ok = use(*it) && ex.expanded(it->target) && comp[it->target] == c && involves(it->step, a);
      }
      feasible = ok;
    }
    if (!feasible) continue;

    Cycle cycle;
    std::uint32_t cur = start;
    auto mark = [&](std::uint32_t v, const GraphEdge* e) {
      for (std::size_t k = 0; k < fair_to->size(); ++k) {
        const auto [a, home] = (*fair_to)[k];
        done[k] = done[k] || rests(v, a, home) || (e && involves(e->step, a));
      }
    };
    mark(start, nullptr);
    for (std::size_t k = 0; k < fair_to->size(); ++k) {
      if (done[k]) continue;
      const auto [a, home] = (*fair_to)[k];
      auto seg = path_within(ex, use, comp, c, cur, [&](std::uint32_t, const GraphEdge& e) {
        return involves(e.step, a) || rests(e.target, a, home);
      });
      if (!seg) return std::nullopt;  // unreachable: the component is strongly connected
      for (const auto& [u, e] : *seg) mark(e.target, &e);
      cur = seg->back().second.target;
      cycle.insert(cycle.end(), seg->begin(), seg->end());
    }
    if (cur != start || cycle.empty()) {
      auto seg = path_within(ex, use, comp, c, cur, back);
      if (!seg) return std::nullopt;
      cycle.insert(cycle.end(), seg->begin(), seg->end());
    }
    return cycle;
  }
  return std::nullopt;
}

}  // namespace detail

inline Verdict check_ag(const Network& net, const SystemState& initial, const StatePredicate& bad,
                        const Options& opts = {}) {
  detail::Explorer ex(net, opts, false);
  auto r = ex.run(initial, bad, nullptr);
  Verdict v;
  v.states = ex.size();
  if (r.hit) {
    v.outcome = Outcome::fails;
    Trace tr;
    tr.kind = Trace::Kind::path;
    tr.initial = initial;
    tr.stem = detail::resolve_path(ex, *r.hit);
    v.witness = std::move(tr);
  } else if (r.budget_exceeded) {
    v.outcome = Outcome::inconclusive;
    v.note = "state budget of " + std::to_string(opts.max_states) + " exceeded";
  } else {
    v.outcome = Outcome::holds;
  }
  return v;
}

inline Verdict check_af(const Network& net, const SystemState& initial, const StatePredicate& good,
                        const Options& opts = {}) {
  Verdict v;
  if (good(initial)) {
    v.outcome = Outcome::holds;
    v.states = 1;
    return v;
  }
  detail::Explorer ex(net, opts, true);
  auto r = ex.run(initial, nullptr, good);
  v.states = ex.size();
  if (r.budget_exceeded) {
    v.outcome = Outcome::inconclusive;
    v.note = "state budget of " + std::to_string(opts.max_states) + " exceeded";
    return v;
  }

  auto lasso = [&](const std::vector<std::pair<std::uint32_t, detail::GraphEdge>>& cyc) {
    Trace tr;
    tr.kind = Trace::Kind::lasso;
    tr.initial = initial;
    tr.stem = detail::resolve_path(ex, cyc.front().first);
    for (const auto& [from, e] : cyc) tr.cycle.push_back(ex.resolve(from, e.step, e.target));
    return tr;
  };

  // Controllers rest in their initial location; fairness is only owed to
  // those busy with a manoeuvre.
  std::vector<std::pair<std::uint32_t, acta::LocationId>> controllers;
  for (std::size_t a = 0; a < net.automaton_count(); ++a)
    if (net.automaton(a).owner) controllers.emplace_back(static_cast<std::uint32_t>(a), net.automaton(a).initial);
  const detail::EdgeFilter timeless = [](const detail::GraphEdge& e) { return e.step != detail::kDelay; };
  const detail::EdgeFilter any = [](const detail::GraphEdge&) { return true; };

  auto cyc = detail::find_cycle(ex, timeless, &controllers);
  if (!cyc) cyc = detail::find_cycle(ex, timeless);
  if (!cyc) cyc = detail::find_cycle(ex, any);
  if (cyc) {
    v.outcome = Outcome::fails;
    v.witness = lasso(*cyc);
    return v;
  }
  for (std::uint32_t u = 0; u < ex.size(); ++u) {
    auto [b, e] = ex.out(u);
    if (ex.expanded(u) && b == e) {
      v.outcome = Outcome::fails;
      Trace tr;
      tr.kind = Trace::Kind::dead_end;
      tr.initial = initial;
      tr.stem = detail::resolve_path(ex, u);
      v.witness = std::move(tr);
      return v;
    }
  }
  v.outcome = Outcome::holds;
  return v;
}

}  // namespace lanecheck::checker

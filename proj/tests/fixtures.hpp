// Shared test data and random generators.
#pragma once

#include <random>
#include <string>
#include <vector>

#include "lanecheck/lanecheck.hpp"

namespace fixtures {

using namespace lanecheck;

inline const CarId A{0}, B{1}, E{2}, D{3};

// Four lanes; A and B both claim lane 1 from lanes 2 and 0, E drives alone
// on lane 3 and D is on lane 1 far ahead, outside E's view.
inline TrafficSnapshot claims_snapshot() {
  return TrafficSnapshot(4, {
                                CarState{10, 5, LaneSet::of(LaneId{2}), LaneSet::of(LaneId{1})},
                                CarState{12, 5, LaneSet::of(LaneId{0}), LaneSet::of(LaneId{1})},
                                CarState{40, 5, LaneSet::of(LaneId{3}), {}},
                                CarState{120, 5, LaneSet::of(LaneId{1}), {}},
                            });
}
inline constexpr std::int64_t kClaimsHorizon = 35;  // E sees [5, 75]

inline mlsl::Valuation claims_valuation() {
  mlsl::Valuation v = mlsl::Valuation::with_ego(E);
  v.bind_car("a", A).bind_car("b", B).bind_car("d", D);
  return v;
}

inline Scenario fig1(acta::Variant v = acta::Variant::live) {
  Scenario s = load_scenario(std::string(LANECHECK_SCENARIO_DIR) + "/fig1.scn");
  s.variant = v;
  return s;
}

inline Scenario load(const std::string& name) { return load_scenario(std::string(LANECHECK_SCENARIO_DIR) + "/" + name); }

// Random snapshot respecting the per-car invariants. Cars may overlap each
// other arbitrarily.
inline TrafficSnapshot random_snapshot(std::mt19937& rng, std::uint32_t max_cars, std::uint32_t max_lanes,
                                       std::int64_t max_pos = 20, std::int64_t max_size = 6) {
  auto pick = [&](std::int64_t lo, std::int64_t hi) { return std::uniform_int_distribution<std::int64_t>(lo, hi)(rng); };
  const auto lanes = static_cast<std::uint32_t>(pick(1, max_lanes));
  const auto cars = static_cast<std::uint32_t>(pick(1, max_cars));
  std::vector<CarState> out;
  for (std::uint32_t i = 0; i < cars; ++i) {
    CarState c;
    c.pos = pick(0, max_pos);
    c.size = pick(1, max_size);
    const auto k = static_cast<std::uint32_t>(pick(0, lanes - 1));
    c.res = LaneSet::of(LaneId{k});
    std::vector<std::uint32_t> nb;
    if (k > 0) nb.push_back(k - 1);
    if (k + 1 < lanes) nb.push_back(k + 1);
    const auto mode = pick(0, 2);  // 0 plain, 1 claim, 2 two reservations
    if (!nb.empty() && mode > 0) {
      const auto other = nb[static_cast<std::size_t>(pick(0, static_cast<std::int64_t>(nb.size()) - 1))];
      if (mode == 1) c.clm = LaneSet::of(LaneId{other});
      else c.res.insert(LaneId{other});
    }
    out.push_back(c);
  }
  return TrafficSnapshot(lanes, std::move(out));
}

// Smallest horizon for which every standard view covers every car.
inline std::int64_t covering_horizon(const TrafficSnapshot& ts) {
  std::int64_t h = 1;
  for (const auto& e : ts.cars())
    for (const auto& c : ts.cars()) h = std::max({h, e.pos - c.pos, c.pos + c.size - e.pos});
  return h;
}

// Random formula over car variables `cars` (plus ego) with at most
// `chops` nested horizontal chops.
class FormulaGen {
 public:
  FormulaGen(std::mt19937& rng, std::vector<std::string> cars) : rng_(rng), cars_(std::move(cars)) {
    cars_.push_back("ego");
  }

  mlsl::Formula operator()(int depth, int chops) { return gen(depth, chops, {}); }

 private:
  int pick(int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng_); }

  std::string var(const std::vector<std::string>& bound) {
    const auto n = static_cast<int>(cars_.size() + bound.size());
    const int i = pick(n);
    return i < static_cast<int>(cars_.size()) ? cars_[static_cast<std::size_t>(i)]
                                              : bound[static_cast<std::size_t>(i) - cars_.size()];
  }

  mlsl::Formula atom(const std::vector<std::string>& bound) {
    switch (pick(5)) {
      case 0: return mlsl::truth();
      case 1: return mlsl::free();
      case 2: return mlsl::re(var(bound));
      case 3: return mlsl::cl(var(bound));
      default: return mlsl::var_eq(var(bound), var(bound));
    }
  }

  mlsl::Formula gen(int depth, int chops, std::vector<std::string> bound) {
    if (depth <= 0) return atom(bound);
    switch (pick(8)) {
      case 0: return atom(bound);
      case 1: return mlsl::neg(gen(depth - 1, chops, bound));
      case 2: return mlsl::conj(gen(depth - 1, chops, bound), gen(depth - 1, chops, bound));
      case 3: return mlsl::disj(gen(depth - 1, chops, bound), gen(depth - 1, chops, bound));
      case 4: {
        const std::string v = "x" + std::to_string(bound.size());
        bound.push_back(v);
        return mlsl::exists(v, gen(depth - 1, chops, bound));
      }
      case 5:
        if (chops > 0) return mlsl::hchop(gen(depth - 1, chops - 1, bound), gen(depth - 1, chops - 1, bound));
        return atom(bound);
      case 6: return mlsl::vchop(gen(depth - 1, chops, bound), gen(depth - 1, chops, bound));
      default:
        if (chops >= 2) return mlsl::somewhere(gen(depth - 1, chops - 2, bound));
        return atom(bound);
    }
  }

  std::mt19937& rng_;
  std::vector<std::string> cars_;
};

}  // namespace fixtures

// Scenario files: a line-oriented description of the initial road picture and
// the controller to verify.
//
//   # three cars, four lanes
//   lanes 4
//   car A lane 2 pos 10 size 5
//   variant live
//   const t_w 2
//   horizon 60
//
// Cars get ids in order of appearance. Without `horizon` every car's
// standard view covers the whole scenario.
#pragma once

#include <cctype>
#include <charconv>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "lanecheck/acta.hpp"
#include "lanecheck/mlsl.hpp"
#include "lanecheck/traffic.hpp"

namespace lanecheck {

struct ScenarioCar {
  std::string name;
  std::uint32_t lane = 0;
  std::int64_t pos = 0;
  std::int64_t size = 1;

  friend bool operator==(const ScenarioCar&, const ScenarioCar&) = default;
};

struct Scenario {
  std::uint32_t lane_count = 1;
  std::vector<ScenarioCar> cars;
  acta::Variant variant = acta::Variant::live;
  acta::Constants constants;
  std::optional<std::int64_t> horizon;

  friend bool operator==(const Scenario&, const Scenario&) = default;

  TrafficSnapshot snapshot() const {
    std::vector<CarState> cs;
    for (const auto& c : cars) cs.push_back(CarState{c.pos, c.size, LaneSet::of(LaneId{c.lane}), {}});
    return TrafficSnapshot(lane_count, std::move(cs));
  }

  std::vector<std::string> car_names() const {
    std::vector<std::string> out;
    for (const auto& c : cars) out.push_back(c.name);
    return out;
  }

  std::optional<CarId> find_car(std::string_view name) const {
    for (std::size_t i = 0; i < cars.size(); ++i)
      if (cars[i].name == name) return CarId{static_cast<std::uint32_t>(i)};
    return std::nullopt;
  }

  // Smallest horizon for which every standard view sees every car in full.
  std::int64_t covering_horizon() const {
    std::int64_t h = 1;
    for (const auto& e : cars)
      for (const auto& c : cars) h = std::max({h, e.pos - c.pos, c.pos + c.size - e.pos});
    return h;
  }

  std::int64_t effective_horizon() const { return horizon.value_or(covering_horizon()); }
};

class ScenarioError : public Error {
 public:
  explicit ScenarioError(const std::string& what, std::size_t line = 0)
      : Error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Throws ScenarioError naming the first violated invariant.
inline void validate(const Scenario& s) {
  if (s.lane_count == 0 || s.lane_count > kMaxLanes)
    throw ScenarioError("lane count must be in 1.." + std::to_string(kMaxLanes));
  if (s.cars.empty()) throw ScenarioError("scenario has no cars");
  for (std::size_t i = 0; i < s.cars.size(); ++i) {
    const auto& c = s.cars[i];
    if (c.lane >= s.lane_count) throw ScenarioError("car " + c.name + ": lane outside the road");
    if (c.size <= 0) throw ScenarioError("car " + c.name + ": size must be positive");
    for (std::size_t j = 0; j < i; ++j)
      if (s.cars[j].name == c.name) throw ScenarioError("duplicate car name " + c.name);
  }
  if (s.horizon && *s.horizon <= 0) throw ScenarioError("horizon must be positive");
  try {
    acta::validate(s.constants, acta::features_of(s.variant));
  } catch (const Error& e) {
    throw ScenarioError(e.what());
  }
  if (mlsl::collision(s.snapshot())) throw ScenarioError("initial cc violated");
}

namespace detail {

inline bool valid_name(std::string_view n) {
  if (n.empty() || n == "ego" || !(std::isalpha(static_cast<unsigned char>(n[0])) || n[0] == '_')) return false;
  for (char ch : n)
    if (!(std::isalnum(static_cast<unsigned char>(ch)) || ch == '_')) return false;
  return true;
}

template <class Int>
Int number(const std::string& tok, std::size_t line) {
  Int v{};
  auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc{} || p != tok.data() + tok.size()) throw ScenarioError("expected a number, got '" + tok + "'", line);
  return v;
}

}  // namespace detail

inline Scenario parse_scenario(std::istream& in) {
  Scenario s;
  bool have_lanes = false;
  std::string raw;
  for (std::size_t line = 1; std::getline(in, raw); ++line) {
    if (auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    std::istringstream ls(raw);
    std::vector<std::string> tok;
    for (std::string t; ls >> t;) tok.push_back(t);
    if (tok.empty()) continue;
    const std::string& kw = tok[0];
    auto expect = [&](std::size_t n) {
      if (tok.size() != n) throw ScenarioError("'" + kw + "' takes " + std::to_string(n - 1) + " arguments", line);
    };
    if (kw == "lanes") {
      expect(2);
      s.lane_count = detail::number<std::uint32_t>(tok[1], line);
      have_lanes = true;
    } else if (kw == "car") {
      expect(8);
      if (tok[2] != "lane" || tok[4] != "pos" || tok[6] != "size")
        throw ScenarioError("expected 'car <name> lane <i> pos <p> size <s>'", line);
      if (!detail::valid_name(tok[1])) throw ScenarioError("invalid car name '" + tok[1] + "'", line);
      s.cars.push_back({tok[1], detail::number<std::uint32_t>(tok[3], line), detail::number<std::int64_t>(tok[5], line),
                        detail::number<std::int64_t>(tok[7], line)});
    } else if (kw == "variant") {
      expect(2);
      auto v = acta::parse_variant(tok[1]);
      if (!v) throw ScenarioError("unknown variant '" + tok[1] + "'", line);
      s.variant = *v;
    } else if (kw == "const") {
      expect(3);
      const auto v = detail::number<std::int64_t>(tok[2], line);
      auto& k = s.constants;
      if (tok[1] == "t") k.t = v;
      else if (tok[1] == "t_lc") k.t_lc = v;
      else if (tok[1] == "t_w") k.t_w = v;
      else if (tok[1] == "wait_lo") k.wait_lo = v;
      else if (tok[1] == "wait_hi") k.wait_hi = v;
      else throw ScenarioError("unknown constant '" + tok[1] + "'", line);
    } else if (kw == "horizon") {
      expect(2);
      s.horizon = detail::number<std::int64_t>(tok[1], line);
    } else {
      throw ScenarioError("unknown keyword '" + kw + "'", line);
    }
  }
  if (!have_lanes) throw ScenarioError("missing 'lanes'");
  validate(s);
  return s;
}

inline Scenario parse_scenario(const std::string& text) {
  std::istringstream in(text);
  return parse_scenario(in);
}

inline Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError("cannot open " + path);
  try {
    return parse_scenario(in);
  } catch (const ScenarioError& e) {
    throw ScenarioError(path + ": " + e.what());
  }
}

inline std::string write_scenario(const Scenario& s) {
  std::ostringstream out;
  out << "lanes " << s.lane_count << "\n";
  for (const auto& c : s.cars) out << "car " << c.name << " lane " << c.lane << " pos " << c.pos << " size " << c.size << "\n";
  out << "variant " << acta::to_string(s.variant) << "\n";
  const auto& k = s.constants;
  out << "const t " << k.t << "\nconst t_lc " << k.t_lc << "\nconst t_w " << k.t_w << "\nconst wait_lo " << k.wait_lo
      << "\nconst wait_hi " << k.wait_hi << "\n";
  if (s.horizon) out << "horizon " << *s.horizon << "\n";
  return out.str();
}

}  // namespace lanecheck

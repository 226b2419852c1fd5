// Acceptance gate: one PASS/FAIL line per criterion, exit status 1 if any fails.
#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>

#include "brute_force.hpp"
#include "fixtures.hpp"

using namespace lanecheck;
using checker::Outcome;
using Clock = std::chrono::steady_clock;

namespace {

struct Result {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string outcome(const checker::Verdict& v) { return checker::to_string(v.outcome); }

Result example_formulas() {
  Result r;
  const auto ts = fixtures::claims_snapshot();
  const View v = standard_view(ts, fixtures::E, fixtures::kClaimsHorizon);
  const auto val = fixtures::claims_valuation();
  const bool p1 = mlsl::eval(ts, v, val, mlsl::parse("<re(ego) ; free>"));
  const bool p2 = mlsl::eval(ts, v, val, mlsl::parse("<cl(a) & cl(b) ; !cl(a) & cl(b)>"));
  const bool p3 = mlsl::eval(ts, v, val, mlsl::parse("<cl(b) ; free ; re(d)>"));
  r.detail << "phi1=" << p1 << " phi2=" << p2 << " phi3=" << p3;
  r.require(p1 && p2 && !p3, "expected true, true, false");
  return r;
}

Result safety_sweep() {
  Result r;
  int runs = 0;
  std::size_t max_states = 0;
  for (acta::Variant v : {acta::Variant::original, acta::Variant::live})
    for (std::int64_t t = 1; t <= 3; ++t)
      for (std::int64_t t_lc = 1; t_lc <= 3; ++t_lc)
        for (std::int64_t t_w = 1; t_w <= 3; ++t_w) {
          Scenario s = fixtures::fig1(v);
          s.constants = {t, t_lc, t_w, 1, 4};
          const auto res = run_query(s, SafetyNoCollision{});
          ++runs;
          max_states = std::max(max_states, res.verdict.states);
          if (res.verdict.outcome != Outcome::holds) {
            std::ostringstream what;
            what << acta::to_string(v) << " t=" << t << " t_lc=" << t_lc << " t_w=" << t_w << ": " << outcome(res.verdict);
            r.require(false, what.str());
          }
        }
  r.detail << runs << " runs, largest " << max_states << " states";
  return r;
}

Result deadlock_freedom() {
  Result r;
  for (acta::Variant v : {acta::Variant::original, acta::Variant::live}) {
    const auto res = run_query(fixtures::fig1(v), NoDeadlock{});
    r.detail << acta::to_string(v) << "=" << outcome(res.verdict) << " ";
    r.require(res.verdict.outcome == Outcome::holds, acta::to_string(v));
  }
  return r;
}

Result livelock() {
  Result r;
  const auto res = run_query(fixtures::fig1(acta::Variant::original), LivenessAny{});
  r.require(res.verdict.outcome == Outcome::fails, "liveness-any must fail");
  if (!res.verdict.witness) {
    r.require(false, "no witness");
    return r;
  }
  const auto& tr = *res.verdict.witness;
  const auto& net = res.network;
  r.require(tr.kind == checker::Trace::Kind::lasso && !tr.cycle.empty(), "witness is a lasso");
  r.require(checker::replays(net, tr), "witness replays");

  const auto a = *net.find("LCP(A)"), b = *net.find("LCP(B)");
  const std::set<std::string> allowed{"q0", "q1", "q2"};
  std::set<std::string> seen_a, seen_b;
  bool zero_delay = true, only_ab = true;
  for (const auto& st : tr.cycle) {
    if (st.step.kind == checker::Step::Kind::delay) zero_delay = false;
    else if (st.step.automaton != a && st.step.automaton != b) only_ab = false;
    seen_a.insert(net.automaton(a).locations[st.state.loc[a]].name);
    seen_b.insert(net.automaton(b).locations[st.state.loc[b]].name);
  }
  auto within = [&](const std::set<std::string>& s) {
    return std::includes(allowed.begin(), allowed.end(), s.begin(), s.end()) && s.count("q0") && s.count("q1");
  };
  r.detail << "stem " << tr.stem.size() << ", cycle " << tr.cycle.size() << " steps";
  r.require(zero_delay, "cycle has only zero-delay steps");
  r.require(only_ab, "cycle moves only A and B");
  r.require(within(seen_a) && within(seen_b), "A and B both cycle through q0, q1 (and possibly q2)");
  return r;
}

Result wait_bound_sufficiency() {
  Result r;
  const auto res = run_query(fixtures::fig1(acta::Variant::original_plus_tw), LivenessAny{});
  r.detail << "liveness-any=" << outcome(res.verdict);
  r.require(res.verdict.outcome == Outcome::holds, "liveness-any must hold");
  return r;
}

Result backoff() {
  Result r;
  const auto tw = run_query(fixtures::fig1(acta::Variant::original_plus_tw), LivenessCar{"A"});
  r.detail << "original-plus-tw A=" << outcome(tw.verdict);
  r.require(tw.verdict.outcome == Outcome::fails, "original-plus-tw liveness-car=A must fail");
  if (tw.verdict.witness) r.require(checker::replays(tw.network, *tw.verdict.witness), "witness replays");
  r.detail << "; live";
  for (const char* car : {"A", "B", "E"}) {
    const auto res = run_query(fixtures::fig1(acta::Variant::live), LivenessCar{car});
    r.detail << " " << car << "=" << outcome(res.verdict);
    r.require(res.verdict.outcome == Outcome::holds, std::string("live liveness-car=") + car + " must hold");
  }
  return r;
}

Result oracle_equivalence() {
  Result r;
  std::mt19937 rng(99);
  int snapshots = 0, disagreements = 0, comparisons = 0;
  for (; snapshots < 1000; ++snapshots) {
    const auto ts = fixtures::random_snapshot(rng, 5, 6);
    const auto h = fixtures::covering_horizon(ts);
    for (std::uint32_t e = 0; e < ts.car_count(); ++e) {
      const CarId ego{e};
      const View v = standard_view(ts, ego, h);
      auto val = mlsl::Valuation::with_ego(ego);
      comparisons += 2;
      disagreements += mlsl::cc(ts, ego) != mlsl::eval(ts, v, val, mlsl::cc_formula());
      disagreements += mlsl::any_pc(ts, ego) != mlsl::eval(ts, v, val, mlsl::exists_pc_formula());
      for (std::uint32_t c = 0; c < ts.car_count(); ++c) {
        val.bind_car("c", CarId{c});
        ++comparisons;
        disagreements += mlsl::pc(ts, ego, CarId{c}) != mlsl::eval(ts, v, val, mlsl::pc_formula("c"));
      }
    }
  }
  r.detail << snapshots << " snapshots, " << comparisons << " comparisons, " << disagreements << " disagreements";
  r.require(disagreements == 0, "100% agreement");
  return r;
}

Result scaling() {
  Result r;
  VerifyOptions big;
  big.search.max_states = 50'000'000;
  const Scenario wide = fixtures::load("fig1_16lanes.scn");
  for (acta::Variant v : {acta::Variant::original, acta::Variant::live}) {
    Scenario s = wide;
    s.variant = v;
    for (const Query& q : std::vector<Query>{SafetyNoCollision{}, NoDeadlock{}}) {
      const auto t0 = Clock::now();
      const auto res = run_query(s, q, big);
      std::fprintf(stderr, "  16 lanes %s %s: %s, %zu states, %.1f s\n", acta::to_string(v).c_str(), to_string(q).c_str(),
                   outcome(res.verdict).c_str(), res.verdict.states, seconds_since(t0));
      r.require(res.verdict.outcome == Outcome::holds, "16 lanes " + acta::to_string(v) + " " + to_string(q));
    }
  }
  const Scenario four = fixtures::load("four_cars.scn");
  std::vector<Query> queries{SafetyNoCollision{}, NoDeadlock{}, LivenessAny{}};
  for (const auto& c : four.cars) queries.push_back(LivenessCar{c.name});
  int finished = 0;
  for (const Query& q : queries) {
    const auto t0 = Clock::now();
    const auto res = run_query(four, q, big);
    std::fprintf(stderr, "  four cars %s: %s, %zu states, %.1f s\n", to_string(q).c_str(), outcome(res.verdict).c_str(),
                 res.verdict.states, seconds_since(t0));
    finished += res.verdict.outcome != Outcome::inconclusive;
    r.require(res.verdict.outcome != Outcome::inconclusive, "four cars " + to_string(q) + " within budget");
    if (std::holds_alternative<SafetyNoCollision>(q) || std::holds_alternative<NoDeadlock>(q))
      r.require(res.verdict.outcome == Outcome::holds, "four cars " + to_string(q) + " holds");
  }
  r.detail << "16 lanes: 4 runs; four cars: " << finished << "/" << queries.size() << " queries decided";
  return r;
}

Result brute_force() {
  Result r;
  std::mt19937 rng(4711);
  auto pick = [&](std::int64_t lo, std::int64_t hi) { return std::uniform_int_distribution<std::int64_t>(lo, hi)(rng); };
  int scenarios = 0, checks = 0, mismatches = 0;
  while (scenarios < 100) {
    Scenario s;
    s.lane_count = static_cast<std::uint32_t>(pick(1, 3));
    for (std::int64_t i = 0, n = pick(1, 2); i < n; ++i)
      s.cars.push_back({std::string(1, static_cast<char>('A' + i)), static_cast<std::uint32_t>(pick(0, s.lane_count - 1)),
                        pick(0, 8), pick(1, 4)});
    s.variant = static_cast<acta::Variant>(pick(0, 3));
    s.constants = {pick(1, 2), pick(1, 2), pick(1, 2), 1, pick(1, 2)};
    try {
      validate(s);
    } catch (const ScenarioError&) {
      continue;
    }
    ++scenarios;
    for (const Query& q : std::vector<Query>{NoDeadlock{}, SafetyNoCollision{}, LivenessAny{}, LivenessCar{"A"}}) {
      const auto net = build_network(s, q);
      const auto got = run_query(net, q);
      const auto init = net.initial_state();
      bool agree = false;
      if (std::holds_alternative<LivenessAny>(q) || std::holds_alternative<LivenessCar>(q)) {
        const auto success = locations_named(net, "Observer(", "success");
        const bool want = brute::af(net, init, [&](const checker::SystemState& st) {
          for (auto [a, l] : success)
            if (st.loc[a] == l) return true;
          return false;
        });
        agree = (got.outcome == Outcome::holds) == want;
      } else {
        checker::StatePredicate bad;
        if (std::holds_alternative<NoDeadlock>(q)) {
          bad = [&](const checker::SystemState& st) { return net.deadlock(st); };
        } else {
          const auto obs = *net.find("Observer1");
          bad = [obs](const checker::SystemState& st) { return st.loc[obs] == 1; };
        }
        const auto want = brute::ag(net, init, bad);
        agree = (got.outcome == Outcome::holds) == want.holds &&
                (want.holds || (got.witness && got.witness->stem.size() == want.shortest));
      }
      ++checks;
      mismatches += !agree;
    }
  }
  r.detail << scenarios << " scenarios, " << checks << " verdicts, " << mismatches << " mismatches";
  r.require(mismatches == 0, "all verdicts agree");
  return r;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Result()>>> criteria{
      {"example formulas in E's view", example_formulas},
      {"safety over the constant sweep", safety_sweep},
      {"deadlock freedom", deadlock_freedom},
      {"livelock of the original controller", livelock},
      {"wait bound restores liveness-any", wait_bound_sufficiency},
      {"back-off needed for per-car liveness", backoff},
      {"interval checks match the formulas", oracle_equivalence},
      {"sixteen lanes and four cars", scaling},
      {"exhaustive cross-check", brute_force},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = Clock::now();
    Result r;
    try {
      r = criteria[i].second();
    } catch (const std::exception& e) {
      r.require(false, std::string("exception: ") + e.what());
    }
    failed += !r.pass;
    std::printf("%s %zu %s: %s (%.1f s)\n", r.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                r.detail.str().c_str(), seconds_since(t0));
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria failed\n", failed, criteria.size());
  return failed ? 1 : 0;
}

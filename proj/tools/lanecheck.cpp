// lanecheck — verify lane-change controllers on a scenario file.
//
//   lanecheck check fig1.scn --query liveness-any --variant original
//   lanecheck eval fig1.scn --car E --formula "<re(ego) ; free>"
//   echo "<cl(b) ; free ; re(d)>" | lanecheck eval fig1.scn --car E --formula -
//   lanecheck info fig1.scn
#include <fstream>
#include <iostream>
#include <iterator>
#include <map>

#include "CLI11.hpp"
#include "lanecheck/lanecheck.hpp"

using namespace lanecheck;

namespace {

int do_check(const std::string& path, const std::string& query_text, const std::string& variant_text,
             const std::string& trace_path, bool json, std::size_t max_states, unsigned workers) {
  Scenario s = load_scenario(path);
  if (!variant_text.empty()) {
    auto v = acta::parse_variant(variant_text);
    if (!v) throw CLI::ValidationError("--variant", "unknown variant '" + variant_text + "'");
    s.variant = *v;
  }
  auto q = parse_query(query_text);
  if (!q) throw CLI::ValidationError("--query", "unknown query '" + query_text + "'");

  VerifyOptions opts;
  opts.search = search_options_from_env();
  if (max_states) opts.search.max_states = max_states;
  opts.search.workers = workers;

  QueryResult r = run_query(s, *q, opts);
  const std::string label = to_string(*q) + " [" + acta::to_string(s.variant) + "]";
  if (json) std::cout << verdict_json(r.network, label, r.verdict).dump(2) << "\n";
  else std::cout << verdict_text(r.network, label, r.verdict);

  if (!trace_path.empty() && r.verdict.witness) {
    std::ofstream out(trace_path);
    if (!out) throw Error("cannot write " + trace_path);
    if (json) out << trace_json(r.network, *r.verdict.witness).dump(2) << "\n";
    else out << trace_text(r.network, *r.verdict.witness);
  }
  return exit_code(r.verdict);
}

int do_eval(const std::string& path, const std::string& car, std::string text,
            const std::vector<std::string>& binds, std::int64_t horizon) {
  if (text == "-") text.assign(std::istreambuf_iterator<char>(std::cin), {});
  const Scenario s = load_scenario(path);
  const auto ego = s.find_car(car);
  if (!ego) throw CLI::ValidationError("--car", "unknown car '" + car + "'");

  // Lower-case car names are usable as car variables without --bind.
  mlsl::Valuation val = mlsl::Valuation::with_ego(*ego);
  for (std::size_t i = 0; i < s.cars.size(); ++i) {
    std::string lower = s.cars[i].name;
    for (char& ch : lower) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    val.bind_car(lower, CarId{static_cast<std::uint32_t>(i)});
  }
  mlsl::ParseOptions popts;
  for (const std::string& b : binds) {
    const auto eq = b.find('=');
    if (eq == std::string::npos) throw CLI::ValidationError("--bind", "expected name=value, got '" + b + "'");
    const std::string name = b.substr(0, eq), value = b.substr(eq + 1);
    if (auto c = s.find_car(value)) {
      val.bind_car(name, *c);
    } else {
      val.bind_lane(name, LaneId{static_cast<std::uint32_t>(std::stoul(value))});
      popts.lane_variables.insert(name);
    }
  }
  const mlsl::Formula f = mlsl::parse(text, popts);
  const TrafficSnapshot ts = s.snapshot();
  const View v = standard_view(ts, *ego, horizon > 0 ? horizon : s.effective_horizon());
  const bool result = mlsl::eval(ts, v, val, f);
  std::cout << mlsl::to_string(f) << " in V(" << car << "): " << (result ? "true" : "false") << "\n";
  return result ? kHolds : kFails;
}

int do_info(const std::string& path) {
  const Scenario s = load_scenario(path);
  std::cout << "lanes " << s.lane_count << " (top lane " << s.lane_count - 1 << ")\n";
  for (const auto& c : s.cars)
    std::cout << "car " << c.name << " lane " << c.lane << " extent [" << c.pos << "," << c.pos + c.size << "]\n";
  const auto& k = s.constants;
  std::cout << "variant " << acta::to_string(s.variant) << "\n"
            << "constants t=" << k.t << " t_lc=" << k.t_lc << " t_w=" << k.t_w << " wait=[" << k.wait_lo << ","
            << k.wait_hi << "]\n"
            << "horizon " << s.effective_horizon() << (s.horizon ? "" : " (covering)") << "\n";

  const auto net = build_network(s, NoDeadlock{});
  for (std::size_t a = 0; a < net.automaton_count(); ++a) {
    const auto& aut = net.automaton(a);
    std::cout << aut.name << ":";
    for (const auto& q : aut.locations) {
      std::cout << " " << q.name;
      if (!q.invariant.empty()) std::cout << "{" << acta::to_string(q.invariant) << "}";
    }
    std::cout << "\n";
    for (const auto& e : aut.edges)
      std::cout << "  " << aut.locations[e.source].name << " -> " << aut.locations[e.target].name << "  " << e.name
                << (e.guard.empty() ? "" : "  [" + acta::to_string(e.guard) + "]") << "\n";
  }
  return kHolds;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Explicit-state verification of multi-lane lane-change controllers"};
  app.require_subcommand(1);

  std::string path, query, variant, trace, car, formula;
  std::vector<std::string> binds;
  bool json = false;
  std::size_t max_states = 0;
  unsigned workers = 1;
  std::int64_t horizon = 0;

  auto* check = app.add_subcommand("check", "check a query on a scenario");
  check->add_option("scenario", path, "scenario file")->required()->check(CLI::ExistingFile);
  check->add_option("--query", query, "no-deadlock | safety | liveness-any | liveness-car=<name>")->required();
  check->add_option("--variant", variant, "original | original-plus-tw | live-no-qwait | live");
  check->add_option("--trace", trace, "write the witness trace to this file");
  check->add_flag("--json", json, "machine-readable output");
  check->add_option("--max-states", max_states, "state budget (default 10^7, or LANECHECK_MAX_STATES)");
  check->add_option("--workers", workers, "successor workers")->check(CLI::Range(1u, 64u));

  auto* eval = app.add_subcommand("eval", "evaluate an MLSL formula in a car's standard view");
  eval->add_option("scenario", path, "scenario file")->required()->check(CLI::ExistingFile);
  eval->add_option("--car", car, "view owner (bound to ego)")->required();
  eval->add_option("--formula", formula, "MLSL formula, or - to read it from stdin")->required();
  eval->add_option("--bind", binds, "name=car or name=lane");
  eval->add_option("--horizon", horizon, "override the view horizon");

  auto* info = app.add_subcommand("info", "print the parsed scenario and its controllers");
  info->add_option("scenario", path, "scenario file")->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (check->parsed()) return do_check(path, query, variant, trace, json, max_states, workers);
    if (eval->parsed()) return do_eval(path, car, formula, binds, horizon);
    if (info->parsed()) return do_info(path);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}

#include <catch2/catch_amalgamated.hpp>

#include "fixtures.hpp"
#include "reference_mlsl.hpp"

using namespace lanecheck;
using namespace lanecheck::mlsl;
using fixtures::A;
using fixtures::B;
using fixtures::E;

namespace {

bool holds_for_e(const std::string& text) {
  const auto ts = fixtures::claims_snapshot();
  const View v = standard_view(ts, E, fixtures::kClaimsHorizon);
  return eval(ts, v, fixtures::claims_valuation(), parse(text));
}

}  // namespace

TEST_CASE("parser precedence: ! over & over | over ;") {
  CHECK(parse("!free & free") == conj(neg(free()), free()));
  CHECK(parse("free & free | true") == disj(conj(free(), free()), truth()));
  CHECK(parse("re(a) & free ; cl(b)") == hchop(conj(re("a"), free()), cl("b")));
  CHECK(parse("free ; free ; free") == hchop(free(), hchop(free(), free())));
  CHECK(parse("exists c. re(c) ; free") == exists("c", hchop(re("c"), free())));
  CHECK(parse("[cl(a) / re(a)]") == vchop(re("a"), cl("a")));
  CHECK(parse("<re(ego)>") == somewhere(re("ego")));
  CHECK(parse("a != b") == neg(var_eq("a", "b")));
  CHECK(parse("false") == neg(truth()));
  CHECK(parse("n = l") == var_eq("n", "l"));
}

TEST_CASE("printing round-trips through the parser") {
  for (const char* text : {"<re(ego) ; free>", "<cl(a) & cl(b) ; !cl(a) & cl(b)>", "<cl(b) ; free ; re(d)>",
                           "!(exists c. !(c = ego) & <re(ego) & re(c)>)", "[true / free | re(a)]", "n = l"}) {
    const Formula f = parse(text);
    CHECK(parse(to_string(f)) == f);
  }
  CHECK(to_string(parse("<re(ego)>")) == "<re(ego)>");
}

TEST_CASE("parse errors report a position") {
  CHECK_THROWS_AS(parse(""), ParseError);
  CHECK_THROWS_AS(parse("re(a"), ParseError);
  CHECK_THROWS_AS(parse("free free"), ParseError);
  CHECK_THROWS_AS(parse("re(n)"), ParseError);  // n is a lane variable
  CHECK_THROWS_AS(parse("n = a"), ParseError);  // mixed sorts
  CHECK_THROWS_AS(parse("exists n. true"), ParseError);
  try {
    parse("free & ");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.position() == 7);
  }
  ParseOptions opts;
  opts.lane_variables = {"k"};
  CHECK_NOTHROW(parse("re(n)", opts));
  CHECK_THROWS_AS(parse("re(k)", opts), ParseError);
}

TEST_CASE("the three example formulas in E's view") {
  CHECK(holds_for_e("<re(ego) ; free>"));
  CHECK(holds_for_e("<cl(a) & cl(b) ; !cl(a) & cl(b)>"));
  CHECK_FALSE(holds_for_e("<cl(b) ; free ; re(d)>"));
}

TEST_CASE("a far-away car becomes visible with a larger horizon") {
  const auto ts = fixtures::claims_snapshot();
  const View wide = standard_view(ts, E, 200);
  CHECK(eval(ts, wide, fixtures::claims_valuation(), parse("<cl(b) ; free ; re(d)>")));
}

TEST_CASE("somewhere and atoms") {
  const auto ts = fixtures::claims_snapshot();
  const View v = standard_view(ts, E, fixtures::kClaimsHorizon);
  const auto val = fixtures::claims_valuation();
  CHECK(eval(ts, v, val, parse("<re(ego)>")));
  CHECK(eval(ts, v, val, parse("<cl(a)>")));
  CHECK_FALSE(eval(ts, v, val, parse("<cl(ego)>")));
  CHECK_FALSE(eval(ts, v, val, parse("<re(d)>")));
  CHECK(eval(ts, v, val, parse("<re(a) ; free>")));
  // The whole view is not a single-lane segment.
  CHECK_FALSE(eval(ts, v, val, parse("free")));
  CHECK_FALSE(eval(ts, v, val, parse("re(ego)")));
  // a and b claim overlapping space on lane 1.
  CHECK(eval(ts, v, val, parse("<cl(a) & cl(b)>")));
  CHECK_FALSE(eval(ts, v, val, parse("<re(a) & re(b)>")));
}

TEST_CASE("ego defaults to the view owner") {
  const auto ts = fixtures::claims_snapshot();
  const View v = standard_view(ts, A, fixtures::kClaimsHorizon);
  CHECK(eval(ts, v, Valuation{}, parse("<cl(ego)>")));
  CHECK_THROWS_AS(eval(ts, v, Valuation{}, parse("<cl(zz)>")), UnboundVariable);
}

TEST_CASE("lane variables compare lanes") {
  const auto ts = fixtures::claims_snapshot();
  const View v = standard_view(ts, E, fixtures::kClaimsHorizon);
  Valuation val;
  val.bind_lane("n", LaneId{1}).bind_lane("l", LaneId{1});
  CHECK(eval(ts, v, val, parse("n = l")));
  val.bind_lane("l", LaneId{2});
  CHECK(eval(ts, v, val, parse("n != l")));
}

TEST_CASE("chop witness lies between the two segments") {
  const auto ts = fixtures::claims_snapshot();
  const View v{LaneRange{3, 3}, Extent{40, 75}, E};
  const auto s = chop_witness(ts, v, fixtures::claims_valuation(), parse("re(ego) ; free"));
  REQUIRE(s);
  CHECK(*s == Catch::Approx(45.0));
  CHECK_FALSE(chop_witness(ts, v, fixtures::claims_valuation(), parse("free ; re(ego)")));
}

TEST_CASE("dense chop points: free ; free on a unit segment") {
  const TrafficSnapshot ts(1, {CarState{0, 1, LaneSet::of(LaneId{0}), {}}});
  const View v{LaneRange{0, 0}, Extent{5, 6}, CarId{0}};
  CHECK(eval(ts, v, Valuation{}, parse("free ; free")));
  CHECK(eval(ts, v, Valuation{}, parse("free ; free ; free")));
  CHECK(reference::eval(ts, v, Valuation{}, parse("free ; free ; free")));
}

TEST_CASE("vertical chop may split off an empty band") {
  const auto ts = fixtures::claims_snapshot();
  const View v{LaneRange{3, 3}, Extent{40, 45}, E};
  CHECK(eval(ts, v, Valuation{}, parse("[re(ego) / true]")));  // lower empty band, upper re(ego)
  CHECK(eval(ts, v, Valuation{}, parse("[true / re(ego)]")));  // upper empty band
  CHECK_FALSE(eval(ts, v, Valuation{}, parse("[re(ego) / re(ego)]")));
}

TEST_CASE("length is relative to the segment") {
  // B's claim extends beyond the segment [15, 17]: cl(b) still holds there.
  const auto ts = fixtures::claims_snapshot();
  const View v{LaneRange{1, 1}, Extent{15, 17}, E};
  CHECK(eval(ts, v, fixtures::claims_valuation(), parse("cl(b) & !cl(a)")));
}

TEST_CASE("controller formulas on the claims snapshot") {
  const auto ts = fixtures::claims_snapshot();
  for (CarId ego : {A, B, E}) {
    const View v = standard_view(ts, ego, 200);
    const auto val = Valuation::with_ego(ego);
    CHECK(eval(ts, v, val, cc_formula()) == mlsl::cc(ts, ego));
    CHECK(eval(ts, v, val, exists_pc_formula()) == mlsl::any_pc(ts, ego));
  }
  CHECK(mlsl::any_pc(ts, A));
  CHECK(mlsl::pc(ts, A, B));
  CHECK_FALSE(mlsl::pc(ts, A, A));
  CHECK_FALSE(mlsl::any_pc(ts, E));
  CHECK_FALSE(mlsl::collision(ts));
}

TEST_CASE("touching intervals do not intersect") {
  const PositionRecord a{LaneSet::of(LaneId{1}), 0, 5}, b{LaneSet::of(LaneId{1}), 5, 5};
  CHECK_FALSE(intersect(a, b));
  CHECK(intersect(a, PositionRecord{LaneSet::of(LaneId{1}), 4, 5}));
  CHECK_FALSE(intersect(a, PositionRecord{LaneSet::of(LaneId{2}), 4, 5}));
  // Same in the logic: the two reservations only share a point.
  const TrafficSnapshot ts(2, {CarState{0, 5, LaneSet::of(LaneId{1}), {}}, CarState{5, 5, LaneSet::of(LaneId{1}), {}}});
  CHECK(eval(ts, standard_view(ts, CarId{0}, 20), Valuation{}, cc_formula()));
}

TEST_CASE("view-restricted checks ignore what lies outside the view") {
  const TrafficSnapshot ts(2, {CarState{0, 5, LaneSet::of(LaneId{0}), LaneSet::of(LaneId{1})},
                               CarState{4, 5, LaneSet::of(LaneId{1}), {}}});
  CHECK(mlsl::any_pc(ts, CarId{0}));
  const View narrow{LaneRange{0, 1}, Extent{-3, 3}, CarId{0}};
  CHECK_FALSE(mlsl::any_pc(ts, narrow));
  CHECK_FALSE(eval(ts, narrow, Valuation::with_ego(CarId{0}), exists_pc_formula()));
}

TEST_CASE("evaluator agrees with the grid reference on random formulas") {
  std::mt19937 rng(20240611);
  fixtures::FormulaGen gen(rng, {"a", "b"});
  int checked = 0;
  for (int i = 0; i < 600; ++i) {
    const auto ts = fixtures::random_snapshot(rng, 3, 3, 10, 5);
    const auto cars = static_cast<std::uint32_t>(ts.car_count());
    const CarId owner{std::uniform_int_distribution<std::uint32_t>(0, cars - 1)(rng)};
    Valuation val = Valuation::with_ego(owner);
    val.bind_car("a", CarId{std::uniform_int_distribution<std::uint32_t>(0, cars - 1)(rng)});
    val.bind_car("b", CarId{std::uniform_int_distribution<std::uint32_t>(0, cars - 1)(rng)});
    const auto lo = std::uniform_int_distribution<std::int64_t>(0, 8)(rng);
    const auto hi = lo + std::uniform_int_distribution<std::int64_t>(0, 8)(rng);
    const auto l0 = std::uniform_int_distribution<std::int64_t>(0, ts.top_lane())(rng);
    const auto l1 = std::uniform_int_distribution<std::int64_t>(l0, ts.top_lane())(rng);
    const View v{LaneRange{l0, l1}, Extent{lo, hi}, owner};
    const Formula f = gen(4, 2);
    INFO(to_string(f) << " lanes " << l0 << ".." << l1 << " extent [" << lo << "," << hi << "]");
    CHECK(eval(ts, v, val, f) == reference::eval(ts, v, val, f));
    ++checked;
  }
  CHECK(checked == 600);
}

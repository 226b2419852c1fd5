// ============================================================================
// mlsl.hpp — Multi-lane Spatial Logic: formulas, concrete syntax, evaluation
// over traffic snapshots and views, and the interval-based fast checks for
// the collision and potential-collision formulas.
// ============================================================================
//
// Concrete syntax (loosest binding first):
//
//   phi ::= phi ; phi            horizontal chop (right associative)
//         | phi | phi            disjunction, sugar for !(!phi & !phi)
//         | phi & phi
//         | !phi | exists c. phi  (exists extends as far right as possible)
//         | true | false | free | re(c) | cl(c) | u = v | u != v
//         | (phi) | [upper / lower] | <phi>
//
// `[upper / lower]` is the vertical chop written as a stack; `<phi>` is
// "somewhere", expanded at parse time.
//
// Space is integer valued but chop points range over the reals. Truth of a
// sub-formula is invariant under order-preserving maps fixing every car
// endpoint, so the candidate chop points are the car endpoints inside the
// extent plus one midpoint per gap. The evaluator scales all coordinates by
// 2^d (d = horizontal chop depth) so every midpoint it ever needs is integral.
// ============================================================================
#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "lanecheck/traffic.hpp"

namespace lanecheck::mlsl {

class Formula;

struct True {};
struct Free {};
struct VarEq {
  std::string lhs, rhs;
};
struct Reserved {
  std::string car;
};
struct Claimed {
  std::string car;
};

// A Formula is an immutable, cheaply copyable handle to a syntax tree.
class Formula {
 public:
  struct Node;

  Formula();  // true
  explicit Formula(Node node);

  const Node& node() const { return *node_; }

  template <class T>
  const T* as() const;

 private:
  std::shared_ptr<const Node> node_;
};

struct Not {
  Formula operand;
};
struct And {
  Formula lhs, rhs;
};
struct Exists {
  std::string var;
  Formula body;
};
struct HChop {
  Formula left, right;
};
// Lower band first; the concrete syntax writes the upper band first.
struct VChop {
  Formula lower, upper;
};

struct Formula::Node {
  std::variant<True, VarEq, Free, Reserved, Claimed, Not, And, Exists, HChop, VChop> v;
};

inline Formula::Formula() : node_(std::make_shared<const Node>(Node{True{}})) {}
inline Formula::Formula(Node node) : node_(std::make_shared<const Node>(std::move(node))) {}

template <class T>
const T* Formula::as() const {
  return std::get_if<T>(&node_->v);
}

// Constructors.
inline Formula truth() { return Formula{}; }
inline Formula free() { return Formula{{Free{}}}; }
inline Formula var_eq(std::string u, std::string v) { return Formula{{VarEq{std::move(u), std::move(v)}}}; }
inline Formula re(std::string c) { return Formula{{Reserved{std::move(c)}}}; }
inline Formula cl(std::string c) { return Formula{{Claimed{std::move(c)}}}; }
inline Formula neg(Formula f) { return Formula{{Not{std::move(f)}}}; }
inline Formula conj(Formula a, Formula b) { return Formula{{And{std::move(a), std::move(b)}}}; }
inline Formula disj(Formula a, Formula b) { return neg(conj(neg(std::move(a)), neg(std::move(b)))); }
inline Formula exists(std::string c, Formula body) { return Formula{{Exists{std::move(c), std::move(body)}}}; }
inline Formula hchop(Formula left, Formula right) { return Formula{{HChop{std::move(left), std::move(right)}}}; }
inline Formula vchop(Formula lower, Formula upper) { return Formula{{VChop{std::move(lower), std::move(upper)}}}; }

// <phi>: phi holds on some sub-view, i.e. true / (true ; phi ; true) / true.
inline Formula somewhere(Formula f) {
  return vchop(truth(), vchop(hchop(truth(), hchop(std::move(f), truth())), truth()));
}

bool operator==(const Formula& a, const Formula& b);

namespace detail {

template <class T>
bool node_eq(const T& a, const T& b) {
  if constexpr (std::is_same_v<T, True> || std::is_same_v<T, Free>) return true;
  else if constexpr (std::is_same_v<T, VarEq>) return a.lhs == b.lhs && a.rhs == b.rhs;
  else if constexpr (std::is_same_v<T, Reserved> || std::is_same_v<T, Claimed>) return a.car == b.car;
  else if constexpr (std::is_same_v<T, Not>) return a.operand == b.operand;
  else if constexpr (std::is_same_v<T, And>) return a.lhs == b.lhs && a.rhs == b.rhs;
  else if constexpr (std::is_same_v<T, Exists>) return a.var == b.var && a.body == b.body;
  else if constexpr (std::is_same_v<T, HChop>) return a.left == b.left && a.right == b.right;
  else return a.lower == b.lower && a.upper == b.upper;
}

// Matches the exact shape produced by somewhere(); returns the inner formula.
inline std::optional<Formula> match_somewhere(const Formula& f) {
  const auto* outer = f.as<VChop>();
  if (!outer || !outer->lower.as<True>()) return std::nullopt;
  const auto* mid = outer->upper.as<VChop>();
  if (!mid || !mid->upper.as<True>()) return std::nullopt;
  const auto* h1 = mid->lower.as<HChop>();
  if (!h1 || !h1->left.as<True>()) return std::nullopt;
  const auto* h2 = h1->right.as<HChop>();
  if (!h2 || !h2->right.as<True>()) return std::nullopt;
  return h2->left;
}

}  // namespace detail

inline bool operator==(const Formula& a, const Formula& b) {
  if (&a.node() == &b.node()) return true;
  if (a.node().v.index() != b.node().v.index()) return false;
  return std::visit(
      [&](const auto& x) {
        using T = std::decay_t<decltype(x)>;
        return detail::node_eq(x, std::get<T>(b.node().v));
      },
      a.node().v);
}

// Concrete syntax accepted by parse(); parse(to_string(f)) == f.
inline std::string to_string(const Formula& f) {
  if (auto inner = detail::match_somewhere(f)) return "<" + to_string(*inner) + ">";
  return std::visit(
      [](const auto& x) -> std::string {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, True>) return "true";
        else if constexpr (std::is_same_v<T, Free>) return "free";
        else if constexpr (std::is_same_v<T, VarEq>) return x.lhs + " = " + x.rhs;
        else if constexpr (std::is_same_v<T, Reserved>) return "re(" + x.car + ")";
        else if constexpr (std::is_same_v<T, Claimed>) return "cl(" + x.car + ")";
        else if constexpr (std::is_same_v<T, Not>) return "!(" + to_string(x.operand) + ")";
        else if constexpr (std::is_same_v<T, And>) return "(" + to_string(x.lhs) + " & " + to_string(x.rhs) + ")";
        else if constexpr (std::is_same_v<T, Exists>) return "(exists " + x.var + ". " + to_string(x.body) + ")";
        else if constexpr (std::is_same_v<T, HChop>) return "(" + to_string(x.left) + " ; " + to_string(x.right) + ")";
        else return "[" + to_string(x.upper) + " / " + to_string(x.lower) + "]";
      },
      f.node().v);
}

// Number of nested horizontal chops on the deepest path.
inline int chop_depth(const Formula& f) {
  return std::visit(
      [](const auto& x) -> int {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, Not>) return chop_depth(x.operand);
        else if constexpr (std::is_same_v<T, And>) return std::max(chop_depth(x.lhs), chop_depth(x.rhs));
        else if constexpr (std::is_same_v<T, Exists>) return chop_depth(x.body);
        else if constexpr (std::is_same_v<T, HChop>) return 1 + std::max(chop_depth(x.left), chop_depth(x.right));
        else if constexpr (std::is_same_v<T, VChop>) return std::max(chop_depth(x.lower), chop_depth(x.upper));
        else return 0;
      },
      f.node().v);
}

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

class ParseError : public Error {
 public:
  ParseError(std::size_t position, const std::string& what)
      : Error("syntax error at " + std::to_string(position) + ": " + what), position_(position) {}
  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

struct ParseOptions {
  // Every other identifier is a car variable.
  std::set<std::string, std::less<>> lane_variables{"n", "l"};
};

namespace detail {

class Parser {
 public:
  Parser(std::string_view text, const ParseOptions& opts) : text_(text), opts_(opts) {}

  Formula parse_all() {
    Formula f = chop();
    skip_ws();
    if (pos_ != text_.size()) fail("unexpected '" + std::string(1, text_[pos_]) + "'");
    return f;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const { throw ParseError(pos_, what); }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool peek(std::string_view tok) {
    skip_ws();
    return text_.substr(pos_, tok.size()) == tok;
  }

  bool accept(std::string_view tok) {
    if (!peek(tok)) return false;
    pos_ += tok.size();
    return true;
  }

  void expect(std::string_view tok) {
    if (!accept(tok)) fail("expected '" + std::string(tok) + "'");
  }

  static bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
  static bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

  std::optional<std::string> peek_ident() {
    skip_ws();
    if (pos_ >= text_.size() || !ident_start(text_[pos_])) return std::nullopt;
    std::size_t end = pos_;
    while (end < text_.size() && ident_char(text_[end])) ++end;
    return std::string(text_.substr(pos_, end - pos_));
  }

  std::string ident() {
    auto id = peek_ident();
    if (!id) fail("expected identifier");
    pos_ += id->size();
    return *id;
  }

  bool is_lane_var(const std::string& v) const { return opts_.lane_variables.count(v) != 0; }

  std::string car_var() {
    const std::size_t at = pos_;
    std::string v = ident();
    if (is_lane_var(v)) throw ParseError(at, "'" + v + "' is a lane variable, expected a car variable");
    return v;
  }

  Formula chop() {
    Formula lhs = disjunction();
    if (accept(";")) return hchop(std::move(lhs), chop());
    return lhs;
  }

  Formula disjunction() {
    Formula f = conjunction();
    while (accept("|")) f = disj(std::move(f), conjunction());
    return f;
  }

  Formula conjunction() {
    Formula f = unary();
    while (accept("&")) f = conj(std::move(f), unary());
    return f;
  }

  Formula unary() {
    skip_ws();
    if (peek("!=")) fail("unexpected '!='");
    if (accept("!")) return neg(unary());
    if (auto id = peek_ident(); id && *id == "exists") {
      pos_ += id->size();
      std::string v = car_var();
      expect(".");
      return exists(std::move(v), chop());
    }
    return primary();
  }

  Formula primary() {
    if (accept("(")) {
      Formula f = chop();
      expect(")");
      return f;
    }
    if (accept("[")) {
      Formula upper = chop();
      expect("/");
      Formula lower = chop();
      expect("]");
      return vchop(std::move(lower), std::move(upper));
    }
    if (accept("<")) {
      Formula f = chop();
      expect(">");
      return somewhere(std::move(f));
    }
    const std::size_t at = pos_;
    auto id = peek_ident();
    if (!id) {
      skip_ws();
      fail(pos_ < text_.size() ? "unexpected '" + std::string(1, text_[pos_]) + "'" : "unexpected end of input");
    }
    if (*id == "true" || *id == "false" || *id == "free") {
      pos_ += id->size();
      if (*id == "true") return truth();
      if (*id == "false") return neg(truth());
      return free();
    }
    if (*id == "re" || *id == "cl") {
      pos_ += 2;
      expect("(");
      std::string c = car_var();
      expect(")");
      return *id == "re" ? re(std::move(c)) : cl(std::move(c));
    }
    std::string u = ident();
    bool negated = false;
    if (accept("!=")) negated = true;
    else expect("=");
    std::string v = ident();
    if (is_lane_var(u) != is_lane_var(v))
      throw ParseError(at, "comparison of variables of different sorts: " + u + " and " + v);
    Formula eq = var_eq(std::move(u), std::move(v));
    return negated ? neg(std::move(eq)) : eq;
  }

  std::string_view text_;
  const ParseOptions& opts_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline Formula parse(std::string_view text, const ParseOptions& opts = {}) {
  return detail::Parser(text, opts).parse_all();
}

// ---------------------------------------------------------------------------
// Valuations
// ---------------------------------------------------------------------------

class UnboundVariable : public Error {
 public:
  explicit UnboundVariable(const std::string& v) : Error("unbound variable '" + v + "'") {}
};

class Valuation {
 public:
  Valuation() = default;
  static Valuation with_ego(CarId e) { return Valuation{}.bind_car("ego", e); }

  Valuation& bind_car(std::string name, CarId c) {
    cars_[std::move(name)] = c;
    return *this;
  }
  Valuation& bind_lane(std::string name, LaneId k) {
    lanes_[std::move(name)] = k;
    return *this;
  }
  std::optional<CarId> car(std::string_view name) const {
    auto it = cars_.find(name);
    return it == cars_.end() ? std::nullopt : std::optional<CarId>(it->second);
  }
  std::optional<LaneId> lane(std::string_view name) const {
    auto it = lanes_.find(name);
    return it == lanes_.end() ? std::nullopt : std::optional<LaneId>(it->second);
  }

 private:
  std::map<std::string, CarId, std::less<>> cars_;
  std::map<std::string, LaneId, std::less<>> lanes_;
};

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

namespace detail {

// Formula flattened into an array with variables resolved to slots.
class Evaluator {
 public:
  Evaluator(const TrafficSnapshot& ts, const View& view, const Valuation& val, const Formula& f)
      : ts_(ts) {
    const int depth = std::min(chop_depth(f), 40);
    scale_ = std::int64_t{1} << depth;
    for (const CarState& c : ts.cars()) {
      ext_.push_back({c.pos * scale_, (c.pos + c.size) * scale_});
      ends_.push_back(ext_.back().lo);
      ends_.push_back(ext_.back().hi);
    }
    std::sort(ends_.begin(), ends_.end());
    ends_.erase(std::unique(ends_.begin(), ends_.end()), ends_.end());

    std::vector<std::string> bound;
    root_ = compile(f, val, view.owner, bound);
    lanes_ = view.lanes;
    r_ = view.extent.lo * scale_;
    t_ = view.extent.hi * scale_;
  }

  bool run() { return eval(root_, lanes_, r_, t_); }

  // First chop point (unscaled) at which both halves of a root HChop hold.
  std::optional<double> chop_witness() {
    const Node& n = nodes_[root_];
    if (n.kind != Kind::hchop) return std::nullopt;
    for (std::int64_t s : candidates(r_, t_))
      if (eval(n.a, lanes_, r_, s) && eval(n.b, lanes_, s, t_)) return static_cast<double>(s) / static_cast<double>(scale_);
    return std::nullopt;
  }

 private:
  enum class Kind : std::uint8_t { truth, car_eq, lane_eq, free, re, cl, neg, conj, exists, hchop, vchop };
  struct Node {
    Kind kind;
    int a = -1, b = -1;  // children, or variable slots / fixed values
  };
  int add(Node n) {
    nodes_.push_back(n);
    return static_cast<int>(nodes_.size()) - 1;
  }

  // Car references are encoded as: >= 0 fixed car id; < 0 exists slot -(k+1).
  int car_ref(const std::string& v, const Valuation& val, CarId owner, const std::vector<std::string>& bound) {
    for (std::size_t i = bound.size(); i-- > 0;)
      if (bound[i] == v) return -static_cast<int>(i) - 1;
    if (auto c = val.car(v)) return static_cast<int>(c->value);
    if (v == "ego") return static_cast<int>(owner.value);
    throw UnboundVariable(v);
  }

  int compile(const Formula& f, const Valuation& val, CarId owner, std::vector<std::string>& bound) {
    return std::visit(
        [&](const auto& x) -> int {
          using T = std::decay_t<decltype(x)>;
          if constexpr (std::is_same_v<T, True>) return add({Kind::truth});
          else if constexpr (std::is_same_v<T, Free>) return add({Kind::free});
          else if constexpr (std::is_same_v<T, VarEq>) {
            auto lu = val.lane(x.lhs);
            auto lv = val.lane(x.rhs);
            if (lu || lv) {
              if (!lu) throw UnboundVariable(x.lhs);
              if (!lv) throw UnboundVariable(x.rhs);
              return add({Kind::lane_eq, static_cast<int>(lu->index), static_cast<int>(lv->index)});
            }
            return add({Kind::car_eq, car_ref(x.lhs, val, owner, bound), car_ref(x.rhs, val, owner, bound)});
          } else if constexpr (std::is_same_v<T, Reserved>) return add({Kind::re, car_ref(x.car, val, owner, bound)});
          else if constexpr (std::is_same_v<T, Claimed>) return add({Kind::cl, car_ref(x.car, val, owner, bound)});
          else if constexpr (std::is_same_v<T, Not>) {
            int c = compile(x.operand, val, owner, bound);
            return add({Kind::neg, c});
          } else if constexpr (std::is_same_v<T, And>) {
            int l = compile(x.lhs, val, owner, bound);
            int r = compile(x.rhs, val, owner, bound);
            return add({Kind::conj, l, r});
          } else if constexpr (std::is_same_v<T, Exists>) {
            bound.push_back(x.var);
            const int slot = static_cast<int>(bound.size()) - 1;
            int body = compile(x.body, val, owner, bound);
            bound.pop_back();
            slots_ = std::max(slots_, slot + 1);
            return add({Kind::exists, body, slot});
          } else if constexpr (std::is_same_v<T, HChop>) {
            int l = compile(x.left, val, owner, bound);
            int r = compile(x.right, val, owner, bound);
            return add({Kind::hchop, l, r});
          } else {
            int lo = compile(x.lower, val, owner, bound);
            int up = compile(x.upper, val, owner, bound);
            return add({Kind::vchop, lo, up});
          }
        },
        f.node().v);
  }

  std::uint32_t car_of(int ref) const {
    return ref >= 0 ? static_cast<std::uint32_t>(ref) : slot_values_[static_cast<std::size_t>(-ref - 1)];
  }

  // Cars occupying (by reservation or claim) a lane of the band and whose
  // extent meets [r, t].
  bool visible(std::uint32_t c, LaneRange lanes, std::int64_t r, std::int64_t t) const {
    const CarState& s = ts_.cars()[c];
    if (((s.res | s.clm) & lanes.as_set()).empty()) return false;
    return ext_[c].lo <= t && ext_[c].hi >= r;
  }

  std::vector<std::int64_t> candidates(std::int64_t r, std::int64_t t) const {
    std::vector<std::int64_t> pts{r};
    for (auto it = std::upper_bound(ends_.begin(), ends_.end(), r); it != ends_.end() && *it < t; ++it)
      pts.push_back(*it);
    if (t > r) pts.push_back(t);
    std::vector<std::int64_t> out;
    out.reserve(pts.size() * 2);
    for (std::size_t i = 0; i < pts.size(); ++i) {
      out.push_back(pts[i]);
      if (i + 1 < pts.size() && pts[i + 1] - pts[i] >= 2) out.push_back(pts[i] + (pts[i + 1] - pts[i]) / 2);
    }
    return out;
  }

  bool atom_covers(std::uint32_t c, bool reserved, LaneRange lanes, std::int64_t r, std::int64_t t) const {
    if (lanes.size() != 1 || t <= r) return false;
    const CarState& s = ts_.cars()[c];
    const LaneSet set = reserved ? s.res : s.clm;
    if (!set.contains(LaneId{static_cast<std::uint32_t>(lanes.lo)})) return false;
    return ext_[c].lo <= r && ext_[c].hi >= t;
  }

  bool eval(int id, LaneRange lanes, std::int64_t r, std::int64_t t) {
    const Node n = nodes_[static_cast<std::size_t>(id)];
    switch (n.kind) {
      case Kind::truth: return true;
      case Kind::car_eq: return car_of(n.a) == car_of(n.b);
      case Kind::lane_eq: return n.a == n.b;
      case Kind::free: {
        if (lanes.size() != 1 || t <= r) return false;
        const LaneSet band = lanes.as_set();
        for (std::uint32_t c = 0; c < ts_.car_count(); ++c) {
          const CarState& s = ts_.cars()[c];
          if (((s.res | s.clm) & band).empty()) continue;
          if (ext_[c].lo < t && ext_[c].hi > r) return false;
        }
        return true;
      }
      case Kind::re: return atom_covers(car_of(n.a), true, lanes, r, t);
      case Kind::cl: return atom_covers(car_of(n.a), false, lanes, r, t);
      case Kind::neg: return !eval(n.a, lanes, r, t);
      case Kind::conj: return eval(n.a, lanes, r, t) && eval(n.b, lanes, r, t);
      case Kind::exists: {
        if (slot_values_.size() < static_cast<std::size_t>(slots_)) slot_values_.resize(static_cast<std::size_t>(slots_));
        const std::uint32_t saved = slot_values_[static_cast<std::size_t>(n.b)];
        bool found = false;
        for (std::uint32_t c = 0; c < ts_.car_count() && !found; ++c) {
          if (!visible(c, lanes, r, t)) continue;
          slot_values_[static_cast<std::size_t>(n.b)] = c;
          found = eval(n.a, lanes, r, t);
        }
        slot_values_[static_cast<std::size_t>(n.b)] = saved;
        return found;
      }
      case Kind::hchop:
        for (std::int64_t s : candidates(r, t))
          if (eval(n.a, lanes, r, s) && eval(n.b, lanes, s, t)) return true;
        return false;
      case Kind::vchop: {
        if (lanes.empty()) return eval(n.a, lanes, r, t) && eval(n.b, lanes, r, t);
        // m = hi + 1 would name a band beyond the view; it coincides with m = hi.
        for (std::int64_t m = lanes.lo - 1; m <= lanes.hi; ++m)
          if (eval(n.a, LaneRange{lanes.lo, m}, r, t) && eval(n.b, LaneRange{m + 1, lanes.hi}, r, t)) return true;
        return false;
      }
    }
    return false;
  }

  const TrafficSnapshot& ts_;
  std::int64_t scale_ = 1;
  std::vector<Extent> ext_;
  std::vector<std::int64_t> ends_;
  std::vector<Node> nodes_;
  std::vector<std::uint32_t> slot_values_;
  int slots_ = 0;
  int root_ = 0;
  LaneRange lanes_;
  std::int64_t r_ = 0, t_ = 0;
};

}  // namespace detail

// TS, V, nu |= phi. `ego` defaults to the view's owner when the valuation
// leaves it unbound. Throws UnboundVariable for other free variables.
inline bool eval(const TrafficSnapshot& ts, const View& view, const Valuation& val, const Formula& f) {
  detail::Evaluator ev(ts, view, val, f);
  return ev.run();
}

// For a formula phi1 ; phi2 that holds, a chop point s with both halves
// satisfied; nullopt when the formula is not a horizontal chop or fails.
inline std::optional<double> chop_witness(const TrafficSnapshot& ts, const View& view, const Valuation& val,
                                          const Formula& f) {
  detail::Evaluator ev(ts, view, val, f);
  return ev.chop_witness();
}

// ---------------------------------------------------------------------------
// Controller formulas
// ---------------------------------------------------------------------------

// Safe(ego): no other car's reservation overlaps ego's.
inline Formula safe_formula() {
  return neg(exists("c", conj(neg(var_eq("c", "ego")), somewhere(conj(re("ego"), re("c"))))));
}

// Collision check; textually the same formula as Safe(ego).
inline Formula cc_formula() { return safe_formula(); }

// pc(c): c is another car whose claim or reservation overlaps ego's claim.
inline Formula pc_formula(const std::string& c = "c") {
  return conj(neg(var_eq(c, "ego")), somewhere(conj(cl("ego"), disj(re(c), cl(c)))));
}

inline Formula exists_pc_formula() { return exists("c", pc_formula("c")); }

// ---------------------------------------------------------------------------
// Interval-based fast checks (the encoding used for model checking)
// ---------------------------------------------------------------------------

// One lane record of the encoding: marked lanes plus the occupied interval.
struct PositionRecord {
  LaneSet lanes;
  std::int64_t pos = 0;
  std::int64_t size = 0;
};

inline PositionRecord res_record(const TrafficSnapshot& ts, CarId c) {
  const CarState& s = ts.car(c);
  return {s.res, s.pos, s.size};
}
inline PositionRecord clm_record(const TrafficSnapshot& ts, CarId c) {
  const CarState& s = ts.car(c);
  return {s.clm, s.pos, s.size};
}

// Records share a marked lane and their intervals overlap with positive
// length. Intervals that merely touch do not intersect, in agreement with
// re(c) requiring a sub-view of positive length.
inline bool intersect(const PositionRecord& p1, const PositionRecord& p2) {
  if ((p1.lanes & p2.lanes).empty()) return false;
  return p1.pos < p2.pos + p2.size && p2.pos < p1.pos + p1.size;
}

inline bool cc(const TrafficSnapshot& ts, CarId ego) {
  for (std::uint32_t c = 0; c < ts.car_count(); ++c)
    if (CarId{c} != ego && intersect(res_record(ts, ego), res_record(ts, CarId{c}))) return false;
  return true;
}

inline bool pc(const TrafficSnapshot& ts, CarId ego, CarId c) {
  ts.car(c);
  if (c == ego) return false;
  const PositionRecord mine = clm_record(ts, ego);
  return intersect(mine, res_record(ts, c)) || intersect(mine, clm_record(ts, c));
}

inline bool any_pc(const TrafficSnapshot& ts, CarId ego) {
  for (std::uint32_t c = 0; c < ts.car_count(); ++c)
    if (pc(ts, ego, CarId{c})) return true;
  return false;
}

// Some pair of distinct cars has intersecting reservations.
inline bool collision(const TrafficSnapshot& ts) {
  for (std::uint32_t c = 0; c < ts.car_count(); ++c)
    if (!cc(ts, CarId{c})) return true;
  return false;
}

// Versions restricted to a view: only the parts of the records inside the
// view's lanes and extent count. With a view covering every car these agree
// with the global checks above.
namespace detail {

inline bool overlap_in_view(const View& v, const CarState& a, LaneSet la, const CarState& b, LaneSet lb) {
  if ((la & lb & v.lanes.as_set()).empty()) return false;
  const std::int64_t lo = std::max({a.pos, b.pos, v.extent.lo});
  const std::int64_t hi = std::min({a.pos + a.size, b.pos + b.size, v.extent.hi});
  return lo < hi;
}

}  // namespace detail

inline bool cc(const TrafficSnapshot& ts, const View& v) {
  const CarState& e = ts.car(v.owner);
  for (std::uint32_t c = 0; c < ts.car_count(); ++c) {
    if (CarId{c} == v.owner) continue;
    const CarState& o = ts.cars()[c];
    if (detail::overlap_in_view(v, e, e.res, o, o.res)) return false;
  }
  return true;
}

inline bool pc(const TrafficSnapshot& ts, const View& v, CarId c) {
  const CarState& e = ts.car(v.owner);
  const CarState& o = ts.car(c);
  if (c == v.owner) return false;
  return detail::overlap_in_view(v, e, e.clm, o, o.res | o.clm);
}

inline bool any_pc(const TrafficSnapshot& ts, const View& v) {
  for (std::uint32_t c = 0; c < ts.car_count(); ++c)
    if (pc(ts, v, CarId{c})) return true;
  return false;
}

}  // namespace lanecheck::mlsl

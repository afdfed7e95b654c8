#include <sstream>

#include "doctest.h"
#include "sl/desugar.hpp"
#include "sl/interp.hpp"
#include "sl/ir_validate.hpp"
#include "sl/lower.hpp"
#include "sl/parser.hpp"

using namespace sl;

namespace {

IRProgram compile(const std::string& src) {
  IRProgram ir = lower_program(desugar_program(parse_source(src)));
  REQUIRE(validate_ir(ir).empty());
  return ir;
}

struct Run {
  std::string output;
  ReuseStats stats;
  std::string exit;
  int64_t live = -1;
};

Run run_src(const std::string& src, bool reuse = true,
            std::optional<uint64_t> max_steps = {}) {
  IRProgram ir = compile(src);
  std::ostringstream out;
  EvalConfig cfg;
  cfg.reuse_enabled = reuse;
  cfg.max_steps = max_steps;
  Interpreter interp(ir, cfg, out);
  Run r;
  {
    CallOutcome o = interp.run();
    r.exit = format_value(o.result);
    r.stats = o.stats;
  }
  r.output = out.str();
  r.live = interp.live_cells();
  return r;
}

Value arr(Heap& h, std::vector<Value> elems) {
  return Value::adopt(h.new_array(std::move(elems)));
}
Value rec(Heap& h, std::vector<std::pair<std::string, Value>> fields) {
  return Value::adopt(h.new_record(std::move(fields)));
}

EvalErrorKind error_kind_of(const std::string& src) {
  IRProgram ir = compile(src);
  std::ostringstream out;
  Interpreter interp(ir, {}, out);
  try {
    interp.run();
  } catch (const EvalError& e) {
    return e.kind();
  }
  FAIL("expected EvalError");
  return EvalErrorKind::Internal;
}

}  // namespace

TEST_CASE("switch swaps its arguments") {
  IRProgram ir = compile(
      "fn switch(&x, &y) {\n  [x, y] = [y, x]\n  return\n}\n");
  std::ostringstream out;
  Interpreter interp(ir, {}, out);
  auto o = interp.call("switch", {Value(int64_t{1}), Value(int64_t{2})});
  CHECK(o.result.kind() == ValueKind::Unit);
  REQUIRE(o.swapped.size() == 2);
  CHECK(o.swapped[0].as_int() == 2);
  CHECK(o.swapped[1].as_int() == 1);
}

TEST_CASE("pow computes 2^10") {
  IRProgram ir = compile(
      "fn pow(x, n) {\n  r = 1\n  while n > 0 {\n    r *= x\n    n -= 1\n  }\n"
      "  return r\n}\n");
  std::ostringstream out;
  Interpreter interp(ir, {}, out);
  auto o = interp.call("pow", {Value(int64_t{2}), Value(int64_t{10})});
  CHECK(o.result.as_int() == 1024);
  CHECK(o.swapped.empty());
}

TEST_CASE("aliased bindings never observe mutation") {
  Run r = run_src(
      "fn main() {\n  a = [1, 2]\n  b = a\n  append(&a, 3)\n  print(b)\n}\n");
  CHECK(r.output == "[1, 2]\n");
  CHECK(r.live == 0);
}

TEST_CASE("append on a unique array updates in place") {
  IRProgram empty;
  Heap h;
  Value a = arr(h, {Value(int64_t{1}), Value(int64_t{2})});
  uint64_t copies0 = h.stats().copies;
  uint64_t inplace0 = h.stats().in_place;
  Value b = builtin_append(h, std::move(a), Value(int64_t{3}));
  CHECK(format_value(b) == "[1, 2, 3]");
  CHECK(h.stats().copies == copies0);
  CHECK(h.stats().in_place == inplace0 + 1);
  b = Value();
  CHECK(h.live_cells() == 0);
}

TEST_CASE("append on an aliased array copies once and leaves the alias") {
  Heap h;
  Value a = arr(h, {Value(int64_t{1}), Value(int64_t{2})});
  Value alias = a;  // refcount 2
  uint64_t copies0 = h.stats().copies;
  Value b = builtin_append(h, std::move(a), Value(int64_t{3}));
  CHECK(format_value(b) == "[1, 2, 3]");
  CHECK(format_value(alias) == "[1, 2]");
  CHECK(h.stats().copies == copies0 + 1);
  b = Value();
  alias = Value();
  CHECK(h.live_cells() == 0);
}

TEST_CASE("append to an empty array") {
  Heap h;
  Value a = arr(h, {});
  Value b = builtin_append(h, std::move(a), Value(std::string("x")));
  CHECK(format_value(b) == "[\"x\"]");
}

TEST_CASE("set on arrays and records") {
  Heap h;
  SUBCASE("unique array set is in place") {
    Value a = arr(h, {Value(int64_t{1}), Value(int64_t{2}), Value(int64_t{3})});
    uint64_t inplace0 = h.stats().in_place;
    Value b = builtin_set(h, std::move(a), Value(int64_t{0}), Value(int64_t{9}));
    CHECK(format_value(b) == "[9, 2, 3]");
    CHECK(h.stats().in_place == inplace0 + 1);
  }
  SUBCASE("identity write still counts as a write") {
    Value r = rec(h, {{"a", Value(int64_t{1})}});
    uint64_t inplace0 = h.stats().in_place;
    Value r2 = builtin_set(h, std::move(r), Value(std::string("a")),
                           Value(int64_t{1}));
    CHECK(format_value(r2) == "{a: 1}");
    CHECK(h.stats().in_place == inplace0 + 1);
  }
  SUBCASE("replacing a component releases the old one") {
    Value r = rec(h, {{"xs", arr(h, {Value(int64_t{1})})}});
    Value xs2 = arr(h, {Value(int64_t{1}), Value(int64_t{2})});
    Value r2 = builtin_set(h, std::move(r), Value(std::string("xs")),
                           std::move(xs2));
    CHECK(format_value(r2) == "{xs: [1, 2]}");
    r2 = Value();
    CHECK(h.live_cells() == 0);
  }
  SUBCASE("setting an unknown record field inserts it") {
    Value r = rec(h, {{"a", Value(int64_t{1})}});
    Value r2 = builtin_set(h, std::move(r), Value(std::string("b")),
                           Value(int64_t{2}));
    CHECK(format_value(r2) == "{a: 1, b: 2}");
  }
  SUBCASE("set on a tuple is a type error") {
    Value t = Value::adopt(h.new_tuple({Value(int64_t{1})}));
    CHECK_THROWS_AS(
        builtin_set(h, std::move(t), Value(int64_t{0}), Value(int64_t{2})),
        EvalError);
  }
}

TEST_CASE("extract removes the component and transfers the reference") {
  Heap h;
  SUBCASE("record slot becomes unit") {
    Value r = rec(h, {{"xs", arr(h, {Value(int64_t{1})})}});
    auto [r2, xs] = builtin_extract(h, std::move(r), Value(std::string("xs")));
    CHECK(format_value(r2) == "{xs: ()}");
    CHECK(format_value(xs) == "[1]");
    // the payoff that makes reuse reliable: the component is unique
    CHECK(xs.cell()->rc == 1);
  }
  SUBCASE("array slot becomes unit") {
    Value a = arr(h, {Value(int64_t{7})});
    auto [a2, v] = builtin_extract(h, std::move(a), Value(int64_t{0}));
    CHECK(format_value(a2) == "[()]");
    CHECK(v.as_int() == 7);
  }
  SUBCASE("unknown field") {
    Value r = rec(h, {{"a", Value(int64_t{1})}});
    CHECK_THROWS_AS(builtin_extract(h, std::move(r), Value(std::string("b"))),
                    EvalError);
  }
}

TEST_CASE("get, len and primitive application") {
  Heap h;
  Value a = arr(h, {Value(int64_t{5}), Value(int64_t{6})});
  CHECK(builtin_get(a, Value(int64_t{1})).as_int() == 6);
  CHECK(apply_prim(PrimOp::Lt, Value(int64_t{2}), Value(int64_t{3})).as_bool());
  CHECK(builtin_len(Value(std::string("ab"))).as_int() == 2);
  CHECK(builtin_len(a).as_int() == 2);
  CHECK(apply_prim(PrimOp::Add, Value(std::string("a")), Value(std::string("b")))
            .as_str() == "ab");
  CHECK(apply_prim(PrimOp::Div, Value(int64_t{7}), Value(int64_t{2})).as_int() ==
        3);
  CHECK(apply_prim(PrimOp::Div, Value(1.0), Value(int64_t{2})).as_float() ==
        0.5);
  CHECK(deep_equal(Value(int64_t{1}), Value(1.0)));
  CHECK_THROWS_AS(
      deep_equal(Value::adopt(h.new_closure(0, {})), Value(int64_t{1})),
      EvalError);
}

TEST_CASE("closures capture by value") {
  SUBCASE("loop counter snapshot") {
    Run r = run_src(
        "fn main() {\n  fs = []\n  i = 0\n  while i < 3 {\n"
        "    append(&fs, fn() { return i })\n    i += 1\n  }\n"
        "  print(fs[0]())\n  print(fs[1]())\n  print(fs[2]())\n}\n");
    CHECK(r.output == "0\n1\n2\n");
  }
  SUBCASE("captured array is immune to later appends") {
    Run r = run_src(
        "fn main() {\n  a = [1]\n  f = fn() { return a }\n"
        "  append(&a, 2)\n  print(f())\n  print(a)\n}\n");
    CHECK(r.output == "[1]\n[1, 2]\n");
  }
  SUBCASE("capture-free closure behaves as a plain function") {
    Run r = run_src(
        "fn main() {\n  f = fn(x) { return x * 2 }\n  print(f(21))\n}\n");
    CHECK(r.output == "42\n");
  }
  SUBCASE("top-level functions are first-class") {
    Run r = run_src(
        "fn double(x) { return x * 2 }\n"
        "fn main() {\n  f = double\n  print(f(4))\n}\n");
    CHECK(r.output == "8\n");
  }
}

TEST_CASE("nested-update reuse counters match the claim") {
  const char* sugared =
      "fn main() {\n  foo = {xs: [1], ys: 2}\n  append(&foo.xs, 3)\n"
      "  print(foo)\n}\n";
  const char* naive =
      "fn main() {\n  foo = {xs: [1], ys: 2}\n  xs = foo.xs\n"
      "  append(&xs, 3)\n  foo.xs = xs\n  print(foo)\n}\n";
  Run s = run_src(sugared);
  Run n = run_src(naive);
  CHECK(s.output == n.output);
  CHECK(s.stats.copies == 0);
  CHECK(s.stats.in_place >= 2);
  CHECK(n.stats.copies == 1);
  CHECK(s.live == 0);
  CHECK(n.live == 0);
}

TEST_CASE("deep nesting still updates in place") {
  Run r = run_src(
      "fn main() {\n  s = {a: {b: {c: [1]}}}\n  append(&s.a.b.c, 2)\n"
      "  print(s)\n}\n");
  CHECK(r.output == "{a: {b: {c: [1, 2]}}}\n");
  CHECK(r.stats.copies == 0);
}

TEST_CASE("disabling reuse changes counters but never output") {
  const char* src =
      "fn main() {\n  foo = {xs: [1], ys: 2}\n  append(&foo.xs, 3)\n"
      "  i = 0\n  while i < 5 {\n    append(&foo.xs, i)\n    i += 1\n  }\n"
      "  print(foo)\n}\n";
  Run on = run_src(src, true);
  Run off = run_src(src, false);
  CHECK(on.output == off.output);
  CHECK(off.stats.in_place == 0);
  CHECK(on.stats.copies == 0);
  CHECK(on.live == 0);
  CHECK(off.live == 0);
}

TEST_CASE("uniqueness reuse: first update after sharing copies, later ones reuse") {
  Heap h;
  Value a = arr(h, {Value(int64_t{1})});
  Value alias = a;
  Value b = builtin_append(h, std::move(a), Value(int64_t{2}));
  CHECK(h.stats().copies == 1);
  uint64_t inplace0 = h.stats().in_place;
  b = builtin_append(h, std::move(b), Value(int64_t{3}));
  CHECK(h.stats().copies == 1);  // still one: the copy made b unique
  CHECK(h.stats().in_place == inplace0 + 1);
  CHECK(format_value(alias) == "[1]");
  CHECK(format_value(b) == "[1, 2, 3]");
}

TEST_CASE("runtime errors carry their kind") {
  CHECK(error_kind_of("fn main() { print(1 / 0) }") ==
        EvalErrorKind::DivisionByZero);
  CHECK(error_kind_of("fn main() { a = [1]\n print(a[3]) }") ==
        EvalErrorKind::IndexOutOfBounds);
  CHECK(error_kind_of("fn main() { a = [1]\n print(a[0 - 1]) }") ==
        EvalErrorKind::IndexOutOfBounds);
  CHECK(error_kind_of("fn main() { r = {a: 1}\n print(r.b) }") ==
        EvalErrorKind::UnknownField);
  CHECK(error_kind_of("fn main() { print(1 + \"s\") }") ==
        EvalErrorKind::TypeError);
  CHECK(error_kind_of("fn main() { f = fn(a, b) { return a }\n f(1) }") ==
        EvalErrorKind::ArityMismatch);
  CHECK(error_kind_of("fn main() { f = fn(&a) { a += 1 }\n x = 1\n f(x) }") ==
        EvalErrorKind::SwapArityMismatch);
  CHECK(error_kind_of("fn main() { f = 3\n f(1) }") ==
        EvalErrorKind::NotCallable);
  CHECK(error_kind_of("fn main() { [x, y] = [1, 2, 3] }") ==
        EvalErrorKind::DestructureMismatch);
  CHECK(error_kind_of("fn main() { [x, y] = 7 }") ==
        EvalErrorKind::DestructureMismatch);
  CHECK(error_kind_of("fn main() { if 3 { print(1) } }") ==
        EvalErrorKind::TypeError);
}

TEST_CASE("no-main and wrong main shape") {
  IRProgram ir = compile("fn f() { return 1 }");
  std::ostringstream out;
  Interpreter interp(ir, {}, out);
  CHECK_THROWS_AS(interp.run(), EvalError);
  IRProgram ir2 = compile("fn main(x) { return x }");
  Interpreter interp2(ir2, {}, out);
  try {
    interp2.run();
    FAIL("expected EvalError");
  } catch (const EvalError& e) {
    CHECK(e.kind() == EvalErrorKind::NoMain);
  }
}

TEST_CASE("step budget interrupts runaway loops") {
  CHECK_THROWS_AS(
      run_src("fn main() { while true { } }", true, uint64_t{1000}),
      EvalError);
  // and a budget large enough lets a loop finish
  Run r = run_src("fn main() { i = 0\n while i < 5 { i += 1 }\n print(i) }",
                  true, uint64_t{1000});
  CHECK(r.output == "5\n");
}

TEST_CASE("error context names the active function") {
  IRProgram ir = compile("fn inner() { return 1 / 0 }\nfn main() { inner() }");
  std::ostringstream out;
  Interpreter interp(ir, {}, out);
  try {
    interp.run();
    FAIL("expected EvalError");
  } catch (const EvalError& e) {
    CHECK(e.context() == "fn inner");
  }
}

TEST_CASE("frame single-write assertion fires on malformed hand-built IR") {
  IRFunction fn;
  fn.name = "bad";
  fn.n_params = 0;
  fn.n_values = 2;
  fn.value_names = {"x", "y"};
  IRBlock b;
  // both writes of %0 are live: the first feeds the neg, the second returns
  b.instrs.push_back(Instr{{0}, ConstInstr{int64_t{1}}});
  b.instrs.push_back(Instr{{1}, PrimInstr{PrimOp::Neg, {0}}});
  b.instrs.push_back(Instr{{0}, PrimInstr{PrimOp::Neg, {1}}});
  b.term = ReturnTerm{0, {}};
  fn.blocks.push_back(std::move(b));
  IRProgram p;
  p.fn_index.emplace("bad", 0);
  p.functions.push_back(std::move(fn));
  REQUIRE(!validate_ir(p).empty());  // the validator rejects it, and
  std::ostringstream out;
  Interpreter interp(p, {}, out);   // the runtime assertion also catches it
  try {
    interp.call("bad", {});
    FAIL("expected EvalError");
  } catch (const EvalError& e) {
    CHECK(e.kind() == EvalErrorKind::Internal);
  }
}

TEST_CASE("value trees are acyclic") {
  Run ok = run_src(
      "fn main() {\n  a = [1]\n  append(&a, a)\n  print(a)\n}\n");
  // the old value is appended; the result shares nothing cyclic
  CHECK(ok.output == "[1, [1]]\n");

  Heap h;
  Value inner = arr(h, {Value(int64_t{1})});
  Value outer = arr(h, {inner, inner});
  CHECK(Heap::is_acyclic(outer));
}

TEST_CASE("swap write-backs through while conditions") {
  Run r = run_src(
      "fn tick(&n) {\n  n -= 1\n  return n > 0\n}\n"
      "fn main() {\n  i = 4\n  c = 0\n  while tick(&i) {\n    c += 1\n  }\n"
      "  print(i)\n  print(c)\n}\n");
  CHECK(r.output == "0\n3\n");
}

TEST_CASE("records print in insertion order and compare unordered") {
  Run r = run_src(
      "fn main() {\n  a = {x: 1, y: 2}\n  b = {y: 2, x: 1}\n"
      "  print(a)\n  print(b)\n  print(a == b)\n}\n");
  CHECK(r.output == "{x: 1, y: 2}\n{y: 2, x: 1}\ntrue\n");
}

TEST_CASE("string indexing and tuple access") {
  Run r = run_src(
      "fn main() {\n  s = \"abc\"\n  t = (10, \"x\")\n"
      "  print(s[1])\n  print(t[0])\n  print(len(t))\n}\n");
  CHECK(r.output == "b\n10\n2\n");
}

#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"
#include "sl/autodiff.hpp"
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

double call1(const IRProgram& p, const std::string& fn, double x) {
  std::ostringstream out;
  Interpreter interp(p, {}, out);
  auto o = interp.call(fn, {Value(x)});
  REQUIRE(o.result.kind() == ValueKind::Float);
  return o.result.as_float();
}

// (value, derivative) of the derived function at x
std::pair<double, double> diff1(const IRProgram& p, const std::string& fn,
                                double x) {
  auto res = forward_diff(p, fn, 0);
  CHECK(purity_gate(res.program).empty());
  std::ostringstream out;
  Interpreter interp(res.program, {}, out);
  auto o = interp.call(res.derived_name, {Value(x)});
  REQUIRE(o.result.kind() == ValueKind::Tuple);
  Value v = builtin_get(o.result, Value(int64_t{0}));
  Value d = builtin_get(o.result, Value(int64_t{1}));
  double dv = d.kind() == ValueKind::Int ? static_cast<double>(d.as_int())
                                         : d.as_float();
  double pv = v.kind() == ValueKind::Int ? static_cast<double>(v.as_int())
                                         : v.as_float();
  return {pv, dv};
}

double central_diff(const IRProgram& p, const std::string& fn, double x,
                    double h = 1e-6) {
  return (call1(p, fn, x + h) - call1(p, fn, x - h)) / (2 * h);
}

const char* kPow5 =
    "fn pow5(x) {\n  r = 1.0\n  n = 5\n  while n > 0 {\n    r *= x\n"
    "    n -= 1\n  }\n  return r\n}\n";

}  // namespace

TEST_CASE("derivative of x^5 at 2 is exactly 80") {
  IRProgram p = compile(kPow5);
  auto [v, d] = diff1(p, "pow5", 2.0);
  CHECK(v == 32.0);
  CHECK(d == 80.0);
}

TEST_CASE("derivative of a constant function is zero") {
  IRProgram p = compile("fn c(x) { return 7.5 }");
  auto [v, d] = diff1(p, "c", 3.0);
  CHECK(v == 7.5);
  CHECK(d == 0.0);
}

TEST_CASE("derivative of x*x at 3 is 6") {
  IRProgram p = compile("fn sq(x) { return x * x }");
  auto [v, d] = diff1(p, "sq", 3.0);
  CHECK(v == 9.0);
  CHECK(d == 6.0);
}

TEST_CASE("quotient rule") {
  IRProgram p = compile("fn rat(x) { return x / (1.0 + x) }");
  auto [v, d] = diff1(p, "rat", 1.0);
  CHECK(v == 0.5);
  CHECK(d == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("gradient check against central differences") {
  struct Case {
    const char* src;
    const char* fn;
    double lo, hi;
  };
  const Case cases[] = {
      {kPow5, "pow5", -2.0, 2.0},
      {"fn sq(x) { return x * x }", "sq", -3.0, 3.0},
      {"fn rat(x) { return x / (1.0 + x) }", "rat", -0.5, 3.0},
      {"fn accum(x) {\n  s = 0.0\n  i = 0\n  while i < 10 {\n"
       "    s = s / 2.0 + x * x - s * x / 8.0\n    i += 1\n  }\n  return s\n}\n",
       "accum", -1.0, 1.0},
  };
  std::mt19937 rng(20240817);
  for (const auto& c : cases) {
    CAPTURE(c.fn);
    IRProgram p = compile(c.src);
    std::uniform_real_distribution<double> dist(c.lo, c.hi);
    for (int k = 0; k < 20; ++k) {
      double x = dist(rng);
      CAPTURE(x);
      auto [v, d] = diff1(p, c.fn, x);
      double fd = central_diff(p, c.fn, x);
      CHECK(std::abs(d - fd) <= 1e-6 * std::max(1.0, std::abs(d)));
      CHECK(v == call1(p, c.fn, x));  // primal preserved bit for bit
    }
  }
}

TEST_CASE("tangents thread through loop headers") {
  IRProgram p = compile(kPow5);
  auto res = forward_diff(p, "pow5", 0);
  const IRFunction* d = res.program.find(res.derived_name);
  REQUIRE(d != nullptr);
  const IRFunction* orig = p.find("pow5");
  // find the loop headers: block 1 in both, by construction
  REQUIRE(orig->blocks.size() >= 2);
  REQUIRE(d->blocks.size() == orig->blocks.size());
  CHECK(d->blocks[1].params.size() == 2 * orig->blocks[1].params.size());
}

TEST_CASE("derived functions pass the purity gate and run like the original") {
  const char* src =
      "fn helper(a, b) { return a * b - b }\n"
      "fn f(x) { return helper(x, 2.0) + helper(1.0, x) }\n";
  IRProgram p = compile(src);
  auto res = forward_diff(p, "f", 0);
  CHECK(purity_gate(res.program).empty());
  auto [v, d] = diff1(p, "f", 4.0);
  CHECK(v == call1(p, "f", 4.0));
  CHECK(d == doctest::Approx(2.0).epsilon(1e-12));  // d/dx ((2x-2) + (x-x)) = 2
}

TEST_CASE("calls through the derivative print only once") {
  const char* src = "fn f(x) {\n  print(x)\n  return x * x\n}\n";
  IRProgram p = compile(src);
  auto res = forward_diff(p, "f", 0);
  std::ostringstream out;
  Interpreter interp(res.program, {}, out);
  interp.call(res.derived_name, {Value(2.0)});
  CHECK(out.str() == "2.0\n");
}

TEST_CASE("recursive functions differentiate through their dual") {
  const char* src =
      "fn powr(x, n) {\n  if n == 0 {\n    return 1.0\n  }\n"
      "  return x * powr(x, n - 1)\n}\n";
  IRProgram p = compile(src);
  auto res = forward_diff(p, "powr", 0);
  CHECK(purity_gate(res.program).empty());
  std::ostringstream out;
  Interpreter interp(res.program, {}, out);
  auto o = interp.call(res.derived_name, {Value(2.0), Value(int64_t{5})});
  Value d = builtin_get(o.result, Value(int64_t{1}));
  CHECK(d.as_float() == 80.0);
}

TEST_CASE("nondifferentiable positions are rejected") {
  SUBCASE("derivative-carrying container key") {
    IRProgram p = compile("fn f(x) {\n  a = [1, 2]\n  return a[x]\n}\n");
    CHECK_THROWS_AS(forward_diff(p, "f", 0), CompileError);
  }
  SUBCASE("derivative-carrying value stored in an aggregate") {
    IRProgram p = compile("fn f(x) {\n  a = [x]\n  return 1.0\n}\n");
    CHECK_THROWS_AS(forward_diff(p, "f", 0), CompileError);
  }
  SUBCASE("closures in differentiated code") {
    IRProgram p = compile("fn f(x) {\n  g = fn() { return 1.0 }\n  return x\n}\n");
    CHECK_THROWS_AS(forward_diff(p, "f", 0), CompileError);
  }
  SUBCASE("inactive aggregates are fine") {
    IRProgram p = compile(
        "fn f(x) {\n  a = [1.0, 2.0]\n  return x * a[0] + a[1]\n}\n");
    auto [v, d] = diff1(p, "f", 3.0);
    CHECK(v == 5.0);
    CHECK(d == 1.0);
  }
}

TEST_CASE("errors for unknown functions and bad parameter indexes") {
  IRProgram p = compile("fn f(x) { return x }");
  CHECK_THROWS_AS(forward_diff(p, "nope", 0), CompileError);
  CHECK_THROWS_AS(forward_diff(p, "f", 3), CompileError);
}

TEST_CASE("purity gate reports malformed input instead of transforming") {
  IRProgram p = compile("fn f(x) { return x }");
  std::get<ReturnTerm>(p.functions[0].blocks[0].term).swapped.push_back(0);
  CHECK(!purity_gate(p).empty());
  CHECK_THROWS_AS(forward_diff(p, "f", 0), CompileError);
}

TEST_CASE("integer-typed flows keep integer primals") {
  // the loop counter stays an int in the primal while its tangent is carried
  IRProgram p = compile(kPow5);
  auto res = forward_diff(p, "pow5", 0);
  std::ostringstream out;
  Interpreter interp(res.program, {}, out);
  auto o = interp.call(res.derived_name, {Value(2.0)});
  Value v = builtin_get(o.result, Value(int64_t{0}));
  CHECK(v.kind() == ValueKind::Float);  // r became float via r *= x
  CHECK(v.as_float() == 32.0);
}

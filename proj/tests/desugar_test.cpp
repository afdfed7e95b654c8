#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "oracle.hpp"
#include "sl/ast_printer.hpp"
#include "sl/desugar.hpp"
#include "sl/parser.hpp"
#include "sl/resolver.hpp"

using namespace sl;

namespace {

// Parses the body of `fn f(...) { <stmt> }` and returns its single statement.
StmtPtr stmt_of(const std::string& body, const std::string& params = "") {
  Program p = parse_source("fn f(" + params + ") { " + body + " }");
  REQUIRE(p.functions[0].body->stmts.size() == 1);
  return p.functions[0].body->stmts[0];
}

Program desugar_src(const std::string& src) {
  return desugar_program(parse_source(src));
}

std::string run_oracle(const Program& p) {
  std::ostringstream out;
  oracle::Oracle o(p, out);
  o.run();
  return out.str();
}

DiagKind desugar_error_kind(const std::string& src) {
  try {
    desugar_src(src);
  } catch (const CompileError& e) {
    return e.first().kind;
  }
  FAIL("expected CompileError");
  return DiagKind::ParseError;
}

}  // namespace

TEST_CASE("compound assignment expands to a plain assignment") {
  TempNames temps;
  SUBCASE("r *= x") {
    auto out = expand_compound_assign(*stmt_of("r *= x"), temps);
    REQUIRE(out.size() == 1);
    CHECK(equal(*out[0], *stmt_of("r = r * x")));
  }
  SUBCASE("n -= 1") {
    auto out = expand_compound_assign(*stmt_of("n -= 1"), temps);
    REQUIRE(out.size() == 1);
    CHECK(equal(*out[0], *stmt_of("n = n - 1")));
  }
  SUBCASE("z += 0") {
    auto out = expand_compound_assign(*stmt_of("z += 0"), temps);
    REQUIRE(out.size() == 1);
    CHECK(equal(*out[0], *stmt_of("z = z + 0")));
  }
  SUBCASE("effectful index is evaluated once") {
    auto out = expand_compound_assign(*stmt_of("a[f()] += 1"), temps);
    REQUIRE(out.size() == 2);
    CHECK(equal(*out[0], *stmt_of("_t0 = f()")));
    CHECK(equal(*out[1], *stmt_of("a[_t0] = a[_t0] + 1")));
  }
}

TEST_CASE("path assignment expands to a set call") {
  TempNames temps;
  SUBCASE("A[i] = x") {
    auto out = expand_assignment_path(*stmt_of("A[i] = x"), temps);
    REQUIRE(out.size() == 1);
    CHECK(equal(*out[0], *stmt_of("set(&A, i, x)")));
  }
  SUBCASE("x = 1 is unchanged") {
    auto out = expand_assignment_path(*stmt_of("x = 1"), temps);
    REQUIRE(out.size() == 1);
    CHECK(equal(*out[0], *stmt_of("x = 1")));
  }
  SUBCASE("foo.bar = baz") {
    auto out = expand_assignment_path(*stmt_of("foo.bar = baz"), temps);
    REQUIRE(out.size() == 1);
    CHECK(equal(*out[0], *stmt_of("set(&foo, \"bar\", baz)")));
  }
}

TEST_CASE("swap argument expansion decomposes and rebuilds") {
  TempNames temps;
  SUBCASE("append(&foo.xs, x)") {
    auto st = stmt_of("append(&foo.xs, x)");
    const auto& call = std::get<CallStmt>(st->node).call;
    auto exp = expand_swap_args(call, temps);
    REQUIRE(exp.pre.size() == 1);
    REQUIRE(exp.post.size() == 1);
    CHECK(equal(*exp.pre[0], *stmt_of("_t0 = extract(&foo, \"xs\")")));
    CHECK(equal(*exp.call, *std::get<CallStmt>(stmt_of("append(&_t0, x)")->node).call));
    CHECK(equal(*exp.post[0], *stmt_of("set(&foo, \"xs\", _t0)")));
  }
  SUBCASE("bar(x) is unchanged") {
    auto st = stmt_of("bar(x)");
    const auto& call = std::get<CallStmt>(st->node).call;
    auto exp = expand_swap_args(call, temps);
    CHECK(exp.pre.empty());
    CHECK(exp.post.empty());
    CHECK(equal(*exp.call, *call));
  }
  SUBCASE("plain-variable swap arguments stay put") {
    auto st = stmt_of("result = foo(&a, b, &c)");
    const auto& call = std::get<AssignStmt>(st->node).value;
    auto exp = expand_swap_args(call, temps);
    CHECK(exp.pre.empty());
    CHECK(exp.post.empty());
    CHECK(equal(*exp.call, *call));
  }
  SUBCASE("deep nesting recurses outermost-first") {
    auto st = stmt_of("append(&a.b.c, x)");
    const auto& call = std::get<CallStmt>(st->node).call;
    auto exp = expand_swap_args(call, temps);
    REQUIRE(exp.pre.size() == 2);
    REQUIRE(exp.post.size() == 2);
    CHECK(equal(*exp.pre[0], *stmt_of("_t0 = extract(&a, \"b\")")));
    CHECK(equal(*exp.pre[1], *stmt_of("_t1 = extract(&_t0, \"c\")")));
    CHECK(equal(*exp.post[0], *stmt_of("set(&_t0, \"c\", _t1)")));
    CHECK(equal(*exp.post[1], *stmt_of("set(&a, \"b\", _t0)")));
  }
}

TEST_CASE("desugared programs satisfy the core invariants") {
  const char* sources[] = {
      "fn switch(&x, &y) {\n  [x, y] = [y, x]\n  return\n}\n",
      "fn main() {\n  foo = {xs: [1], ys: 2}\n  append(&foo.xs, 3)\n"
      "  print(foo)\n}\n",
      "fn main() {\n  m = [[1, 2], [3, 4]]\n  m[0][1] = 9\n  m[1][0] *= 10\n"
      "  print(m)\n}\n",
      "fn f(&a) { a += 1 }\nfn main() { x = 1\n y = f(&x) \n print(x) }\n",
  };
  for (const char* src : sources) {
    CAPTURE(src);
    Program core = desugar_src(src);
    std::string why;
    CHECK_MESSAGE(is_core_form(core, &why), why);
  }
}

TEST_CASE("an already-core program is unchanged") {
  Program p = parse_source(
      "fn switch(&x, &y) {\n  [x, y] = [y, x]\n  return\n}\n");
  Program core = desugar_program(p);
  CHECK(equal(p, core));
}

TEST_CASE("nested update desugars to the extract/append/set form") {
  Program core = desugar_src(
      "fn main() {\n"
      "  foo = {xs: [1], ys: 2}\n"
      "  append(&foo.xs, 3)\n"
      "}\n");
  Program expected = parse_source(
      "fn main() {\n"
      "  foo = {xs: [1], ys: 2}\n"
      "  _t0 = extract(&foo, \"xs\")\n"
      "  append(&_t0, 3)\n"
      "  set(&foo, \"xs\", _t0)\n"
      "}\n");
  CHECK(equal(core, expected));
}

TEST_CASE("container is dead between extract and final set") {
  // the liveness property that makes the inner update unique: after the
  // extract, the container variable appears only in the final set
  Program core = desugar_src(
      "fn main() {\n"
      "  foo = {xs: [1]}\n"
      "  append(&foo.xs, 3)\n"
      "}\n");
  const auto& stmts = core.functions[0].body->stmts;
  REQUIRE(stmts.size() == 4);
  // statements between the extract (index 1) and the set (index 3) must not
  // mention foo at all
  std::string middle = pretty_print(Program{{FnDecl{
      "f", {}, {}, std::make_shared<Block>(Block{{stmts[2]}})}}});
  CHECK(middle.find("foo") == std::string::npos);
  // and in extract/set, foo occurs only as the swap operand
  const auto& extract_call =
      std::get<CallExpr>(std::get<AssignStmt>(stmts[1]->node).value->node);
  REQUIRE(extract_call.args.size() == 2);
  CHECK(extract_call.args[0].is_swap());
  CHECK(extract_call.args[0].path().root == "foo");
  const auto& set_call =
      std::get<CallExpr>(std::get<CallStmt>(stmts[3]->node).call->node);
  CHECK(set_call.args[0].is_swap());
  CHECK(set_call.args[0].path().root == "foo");
}

TEST_CASE("desugaring is idempotent") {
  const char* sources[] = {
      "fn main() {\n  foo = {xs: [1], ys: 2}\n  append(&foo.xs, 3)\n"
      "  print(foo)\n}\n",
      "fn main() {\n  m = [[1, 2], [3, 4]]\n  m[0][1] = 9\n  print(m)\n}\n",
      "fn pow(x, n) {\n  r = 1\n  while n > 0 {\n    r *= x\n    n -= 1\n  }\n"
      "  return r\n}\nfn main() { print(pow(2, 10)) }\n",
  };
  for (const char* src : sources) {
    CAPTURE(src);
    Program once = desugar_src(src);
    Program twice = desugar_program(once);
    CHECK(equal(once, twice));
  }
}

TEST_CASE("semantic preservation under the copy-everything oracle") {
  const char* sources[] = {
      "fn main() {\n  foo = {xs: [1], ys: 2}\n  append(&foo.xs, 3)\n"
      "  print(foo)\n}\n",
      "fn main() {\n  m = [[1, 2], [3, 4]]\n  m[0][1] = 9\n  m[1][0] *= 10\n"
      "  print(m)\n}\n",
      "fn pow(x, n) {\n  r = 1\n  while n > 0 {\n    r *= x\n    n -= 1\n  }\n"
      "  return r\n}\nfn main() { print(pow(2, 10)) }\n",
      "fn bump(&v) {\n  append(&v, len(v))\n  return len(v)\n}\n"
      "fn main() {\n  s = {a: [0]}\n  n = bump(&s.a) + bump(&s.a)\n"
      "  print(s)\n  print(n)\n}\n",
      "fn main() {\n  a = [1]\n  b = [a, a]\n  append(&b[0], 2)\n"
      "  print(b)\n  print(a)\n}\n",
  };
  for (const char* src : sources) {
    CAPTURE(src);
    Program surface = parse_source(src);
    Program core = desugar_program(surface);
    CHECK(run_oracle(surface) == run_oracle(core));
  }
}

TEST_CASE("swap arity is checked statically for known callees") {
  CHECK(desugar_error_kind("fn f(&a) { a += 1 }\nfn main() { x = 1\n f(x) }") ==
        DiagKind::SwapArityMismatch);
  CHECK(desugar_error_kind("fn f(a) { return a }\nfn main() { x = 1\n f(&x) }") ==
        DiagKind::SwapArityMismatch);
  CHECK(desugar_error_kind("fn main() { xs = []\n append(xs, 1) }") ==
        DiagKind::SwapArityMismatch);
  CHECK(desugar_error_kind("fn f(a, b) { return a }\nfn main() { f(1) }") ==
        DiagKind::ArityMismatch);
  CHECK(desugar_error_kind("fn main() { xs = []\n len(&xs) }") ==
        DiagKind::SwapArityMismatch);
}

TEST_CASE("overlapping swap paths are rejected") {
  CHECK(desugar_error_kind(
            "fn f(&a, &b) { return }\nfn main() { x = [1]\n f(&x, &x) }") ==
        DiagKind::OverlappingSwapPaths);
  CHECK(desugar_error_kind("fn f(&a, &b) { return }\n"
                           "fn main() { x = {y: {z: 1}}\n f(&x.y, &x.y.z) }") ==
        DiagKind::OverlappingSwapPaths);
  CHECK(desugar_error_kind("fn f(&a, &b) { return }\n"
                           "fn main() { x = [1, 2]\n i = 0\n j = 1\n"
                           " f(&x[i], &x[j]) }") ==
        DiagKind::OverlappingSwapPaths);
  // provably disjoint locations are fine
  CHECK_NOTHROW(desugar_src("fn f(&a, &b) { return }\n"
                            "fn main() { x = {y: 1, z: 2}\n f(&x.y, &x.z) }"));
  CHECK_NOTHROW(desugar_src("fn f(&a, &b) { return }\n"
                            "fn main() { x = [1, 2]\n f(&x[0], &x[1]) }"));
}

TEST_CASE("calls through closure values are not statically checked") {
  CHECK_NOTHROW(desugar_src(
      "fn main() {\n  g = fn(&a) { a += 1 }\n  x = 1\n  g(&x)\n}"));
}

TEST_CASE("shadowing set/extract blocks path updates") {
  CHECK(desugar_error_kind("fn main() { set = 1\n a = [0]\n a[0] = set }") ==
        DiagKind::UnknownVariable);
}

TEST_CASE("swap calls nested in expressions preserve evaluation order") {
  const char* src =
      "fn take(&v) {\n  r = v\n  v = v + 100\n  return r\n}\n"
      "fn main() {\n  s = {n: 5}\n  x = take(&s.n) * 10 + take(&s.n)\n"
      "  print(x)\n  print(s)\n}\n";
  Program surface = parse_source(src);
  Program core = desugar_program(surface);
  std::string why;
  CHECK_MESSAGE(is_core_form(core, &why), why);
  CHECK(run_oracle(surface) == run_oracle(core));
  CHECK(run_oracle(surface) == "155\n{n: 205}\n");
}

TEST_CASE("short-circuit operands with path swaps stay conditional") {
  const char* src =
      "fn bump(&v) {\n  v = v + 1\n  return true\n}\n"
      "fn main() {\n  s = {n: 0}\n  c = false and bump(&s.n)\n"
      "  d = true or bump(&s.n)\n  print(s)\n  print(c)\n  print(d)\n}\n";
  Program surface = parse_source(src);
  Program core = desugar_program(surface);
  CHECK(run_oracle(surface) == run_oracle(core));
  CHECK(run_oracle(core) == "{n: 0}\nfalse\ntrue\n");
}

TEST_CASE("corpus-wide: preservation, idempotence, core form, reprint") {
  namespace fs = std::filesystem;
  for (const auto& entry : fs::directory_iterator(SL_CORPUS_DIR)) {
    if (entry.path().extension() != ".sl") continue;
    std::ifstream in(entry.path(), std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    CAPTURE(entry.path().filename().string());
    Program surface = parse_source(ss.str());
    Program core = desugar_program(surface);

    std::string why;
    CHECK_MESSAGE(is_core_form(core, &why), why);
    CHECK(equal(desugar_program(core), core));
    // the printed core form is itself a valid program
    CHECK(equal(parse_source(pretty_print(core)), core));

    bool has_main = false;
    for (const auto& f : surface.functions) has_main |= f.name == "main";
    if (has_main) CHECK(run_oracle(surface) == run_oracle(core));
  }
}

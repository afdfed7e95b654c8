#include "doctest.h"
#include "sl/parser.hpp"
#include "sl/resolver.hpp"

using namespace sl;

namespace {

std::vector<Diag> resolve_src(const std::string& src) {
  return resolve(parse_source(src));
}

bool has_kind(const std::vector<Diag>& ds, DiagKind k) {
  for (const auto& d : ds)
    if (d.kind == k) return true;
  return false;
}

}  // namespace

TEST_CASE("valid programs resolve cleanly") {
  CHECK(resolve_src("fn f(a) { b = a + 1\n return b }").empty());
  CHECK(resolve_src("fn f() { g() }\nfn g() { f() }").empty());
  CHECK(resolve_src("fn f() { xs = []\n append(&xs, 1) }").empty());
  // reading a name that is assigned later in the function
  CHECK(resolve_src("fn f() { g = fn() { return x }\n x = 1\n return g }").empty());
}

TEST_CASE("unknown variables are reported with a position") {
  auto ds = resolve_src("fn f() { return nope }");
  REQUIRE(has_kind(ds, DiagKind::UnknownVariable));
  CHECK(ds[0].loc.line == 1);
  CHECK(ds[0].loc.column > 0);
}

TEST_CASE("duplicate functions and parameters") {
  CHECK(has_kind(resolve_src("fn f() { return 1 }\nfn f() { return 2 }"),
                 DiagKind::DuplicateFunction));
  CHECK(has_kind(resolve_src("fn f(a, a) { return a }"),
                 DiagKind::DuplicateParam));
}

TEST_CASE("swap roots self-declare as locals") {
  // a swap write-back is an assignment: the root becomes a function-scoped
  // local, shadowing any same-named function or builtin
  CHECK(resolve_src("fn g(&v) { v += 1 }\nfn f() { g(&g) }").empty());
  CHECK(resolve_src("fn f() { append(&len, 1) }").empty());
  // a swapped parameter is a fine root
  CHECK(resolve_src("fn f(&xs) { append(&xs, 1) }").empty());
}

TEST_CASE("builtins are callable but not values") {
  CHECK(resolve_src("fn f() { print(1) }").empty());
  CHECK(has_kind(resolve_src("fn f() { p = print\n return p }"),
                 DiagKind::UnknownVariable));
  // shadowing a builtin makes the name an ordinary local
  CHECK(resolve_src("fn f() { print = 1\n return print }").empty());
}

TEST_CASE("closures resolve against enclosing scopes") {
  CHECK(resolve_src("fn f(a) { g = fn() { return a }\n return g() }").empty());
  CHECK(has_kind(resolve_src("fn f() { g = fn() { return zz }\n g() }"),
                 DiagKind::UnknownVariable));
  // names assigned inside the closure are its own locals
  CHECK(resolve_src("fn f() { g = fn() { y = 1\n return y }\n return g() }")
            .empty());
}

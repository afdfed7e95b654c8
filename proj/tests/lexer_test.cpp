#include <string>
#include <vector>

#include "doctest.h"
#include "sl/diag.hpp"
#include "sl/lexer.hpp"

using namespace sl;

namespace {

std::vector<Tok> kinds(const std::vector<Token>& ts) {
  std::vector<Tok> out;
  for (const auto& t : ts)
    if (t.kind != Tok::Eof) out.push_back(t.kind);
  return out;
}

}  // namespace

TEST_CASE("compound assignment lexes as one token") {
  auto ts = tokenize("r *= x");
  REQUIRE(kinds(ts) == std::vector<Tok>{Tok::Ident, Tok::StarEq, Tok::Ident});
  CHECK(ts[0].lexeme == "r");
  CHECK(ts[1].lexeme == "*=");
  CHECK(ts[2].lexeme == "x");
}

TEST_CASE("empty input yields only eof") {
  auto ts = tokenize("");
  REQUIRE(ts.size() == 1);
  CHECK(ts[0].kind == Tok::Eof);
}

TEST_CASE("swap call tokens") {
  auto ts = tokenize("append(&xs, x)");
  REQUIRE(kinds(ts) == std::vector<Tok>{Tok::Ident, Tok::LParen, Tok::Amp,
                                        Tok::Ident, Tok::Comma, Tok::Ident,
                                        Tok::RParen});
  CHECK(ts[0].lexeme == "append");
  CHECK(ts[3].lexeme == "xs");
}

TEST_CASE("line and column are 1-based and point into the source") {
  std::string src = "a = 1\nbb = 22\n";
  auto ts = tokenize(src);
  for (const auto& t : ts) {
    if (t.kind == Tok::Eof) continue;
    CHECK(t.line >= 1);
    CHECK(t.column >= 1);
  }
  // bb starts at line 2, column 1
  CHECK(ts[4].lexeme == "bb");
  CHECK(ts[4].line == 2);
  CHECK(ts[4].column == 1);
}

TEST_CASE("lexemes are exact source slices") {
  std::string src = "fn f() {\n  s = \"a\\nb\" # trailing comment\n  s *= 2\n}\n";
  auto ts = tokenize(src);
  // reconstruct offsets from line/column and compare slices
  std::vector<size_t> line_starts = {0};
  for (size_t i = 0; i < src.size(); ++i)
    if (src[i] == '\n') line_starts.push_back(i + 1);
  for (const auto& t : ts) {
    if (t.kind == Tok::Eof) continue;
    size_t off = line_starts[static_cast<size_t>(t.line - 1)] +
                 static_cast<size_t>(t.column - 1);
    CHECK(src.substr(off, t.lexeme.size()) == t.lexeme);
  }
}

TEST_CASE("comments are skipped to end of line") {
  auto ts = tokenize("switch(&a, &b) # now a = 2, b = 1\n");
  bool has_hash = false;
  for (const auto& t : ts) has_hash |= t.lexeme.find('#') != std::string::npos;
  CHECK(!has_hash);
  CHECK(kinds(ts) == std::vector<Tok>{Tok::Ident, Tok::LParen, Tok::Amp,
                                      Tok::Ident, Tok::Comma, Tok::Amp,
                                      Tok::Ident, Tok::RParen, Tok::Newline});
}

TEST_CASE("unknown character is a lex error with position") {
  try {
    tokenize("a = 1\nb = $2");
    FAIL("expected CompileError");
  } catch (const CompileError& e) {
    CHECK(e.first().kind == DiagKind::LexError);
    CHECK(e.first().loc.line == 2);
    CHECK(e.first().loc.column == 5);
  }
}

TEST_CASE("unterminated string is a lex error") {
  CHECK_THROWS_AS(tokenize("s = \"abc"), CompileError);
  CHECK_THROWS_AS(tokenize("s = \"abc\nd\""), CompileError);
}

TEST_CASE("string escapes decode") {
  auto ts = tokenize("\"a\\tb\\\\c\\\"d\"");
  REQUIRE(ts[0].kind == Tok::StrLit);
  CHECK(ts[0].text == "a\tb\\c\"d");
  CHECK(ts[0].lexeme == "\"a\\tb\\\\c\\\"d\"");
}

TEST_CASE("numeric literals") {
  auto ts = tokenize("1 23.5 0.25 1.5e3 7");
  CHECK(ts[0].kind == Tok::IntLit);
  CHECK(ts[1].kind == Tok::FloatLit);
  CHECK(ts[2].kind == Tok::FloatLit);
  CHECK(ts[3].kind == Tok::FloatLit);
  CHECK(ts[3].lexeme == "1.5e3");
  CHECK(ts[4].kind == Tok::IntLit);
}

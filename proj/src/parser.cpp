#include "sl/parser.hpp"

#include <charconv>

#include "sl/lexer.hpp"

namespace sl {

namespace {

struct Parser {
  const std::vector<Token>& toks;
  size_t pos = 0;
  int group_depth = 0;  // newlines are transparent inside (), [] and record {}
  int loop_depth = 0;

  explicit Parser(const std::vector<Token>& t) : toks(t) {}

  const Token& cur() {
    while (group_depth > 0 && toks[pos].kind == Tok::Newline) ++pos;
    return toks[pos];
  }

  const Token& ahead(size_t k) {
    size_t i = pos;
    size_t seen = 0;
    while (i < toks.size()) {
      if (group_depth > 0 && toks[i].kind == Tok::Newline) {
        ++i;
        continue;
      }
      if (seen == k) return toks[i];
      ++seen;
      ++i;
    }
    return toks.back();
  }

  bool at(Tok k) { return cur().kind == k; }

  Token next() {
    Token t = cur();
    if (t.kind != Tok::Eof) ++pos;
    return t;
  }

  Token expect(Tok k, const char* what) {
    if (!at(k)) {
      fail(std::string("expected ") + what + ", found " +
           tok_name(cur().kind));
    }
    return next();
  }

  [[noreturn]] void fail(std::string msg,
                         DiagKind kind = DiagKind::ParseError) {
    const Token& t = cur();
    throw CompileError(Diag{kind, {t.line, t.column}, std::move(msg), {}});
  }

  SrcLoc loc() {
    const Token& t = cur();
    return {t.line, t.column};
  }

  void skip_newlines() {
    while (toks[pos].kind == Tok::Newline) ++pos;
  }

  // --- program ---------------------------------------------------------

  Program parse_program() {
    Program p;
    skip_newlines();
    while (!at(Tok::Eof)) {
      if (!at(Tok::KwFn)) fail("expected 'fn' at top level");
      p.functions.push_back(parse_fn_decl());
      skip_newlines();
    }
    return p;
  }

  FnDecl parse_fn_decl() {
    SrcLoc l = loc();
    expect(Tok::KwFn, "'fn'");
    Token name = expect(Tok::Ident, "function name");
    auto params = parse_param_list();
    auto body = parse_block();
    return FnDecl{name.lexeme, l, std::move(params), std::move(body)};
  }

  std::vector<Param> parse_param_list() {
    expect(Tok::LParen, "'('");
    ++group_depth;
    std::vector<Param> params;
    if (!at(Tok::RParen)) {
      while (true) {
        bool swapped = false;
        if (at(Tok::Amp)) {
          next();
          swapped = true;
        }
        Token name = expect(Tok::Ident, "parameter name");
        params.push_back(Param{name.lexeme, swapped});
        if (!at(Tok::Comma)) break;
        next();
      }
    }
    --group_depth;
    expect(Tok::RParen, "')'");
    return params;
  }

  // --- statements ------------------------------------------------------

  BlockPtr parse_block() {
    expect(Tok::LBrace, "'{'");
    int saved = group_depth;
    group_depth = 0;
    auto block = std::make_shared<Block>();
    skip_newlines();
    while (!at(Tok::RBrace)) {
      if (at(Tok::Eof)) fail("unterminated block, expected '}'");
      block->stmts.push_back(parse_stmt());
      end_of_stmt();
    }
    next();  // '}'
    group_depth = saved;
    return block;
  }

  void end_of_stmt() {
    if (at(Tok::Semicolon)) next();
    else if (at(Tok::Newline)) next();
    else if (at(Tok::RBrace) || at(Tok::Eof)) { /* block end */ }
    else fail(std::string("expected end of statement, found ") +
              tok_name(cur().kind));
    skip_newlines();
  }

  StmtPtr parse_stmt() {
    SrcLoc l = loc();
    switch (cur().kind) {
      case Tok::KwWhile: {
        next();
        ExprPtr cond = parse_expr();
        ++loop_depth;
        BlockPtr body = parse_block();
        --loop_depth;
        return make_stmt(l, WhileStmt{cond, body});
      }
      case Tok::KwIf:
        return parse_if();
      case Tok::KwReturn: {
        next();
        ExprPtr value;
        if (!at(Tok::Newline) && !at(Tok::Semicolon) && !at(Tok::RBrace) &&
            !at(Tok::Eof)) {
          value = parse_expr();
        }
        return make_stmt(l, ReturnStmt{value});
      }
      case Tok::KwBreak:
        if (loop_depth == 0) fail("'break' outside a loop", DiagKind::StrayBreak);
        next();
        return make_stmt(l, BreakStmt{});
      case Tok::KwContinue:
        if (loop_depth == 0)
          fail("'continue' outside a loop", DiagKind::StrayContinue);
        next();
        return make_stmt(l, ContinueStmt{});
      case Tok::LBracket:
        if (is_destructure_head()) return parse_destructure(l);
        break;
      default:
        break;
    }

    ExprPtr e = parse_expr();
    if (at(Tok::Assign) || at(Tok::PlusEq) || at(Tok::MinusEq) ||
        at(Tok::StarEq) || at(Tok::SlashEq)) {
      auto target = expr_to_path(*e);
      if (!target) fail("invalid assignment target");
      Tok op = next().kind;
      ExprPtr value = parse_expr();
      if (op == Tok::Assign)
        return make_stmt(l, AssignStmt{std::move(*target), value});
      CompoundOp cop = op == Tok::PlusEq    ? CompoundOp::Add
                       : op == Tok::MinusEq ? CompoundOp::Sub
                       : op == Tok::StarEq  ? CompoundOp::Mul
                                            : CompoundOp::Div;
      return make_stmt(l, CompoundStmt{std::move(*target), cop, value});
    }
    if (!std::holds_alternative<CallExpr>(e->node)) {
      fail("expression statement must be a call");
    }
    return make_stmt(l, CallStmt{e});
  }

  // `[ident, ident, ...] =` distinguishes destructuring from a (useless)
  // array-literal statement, which is rejected later anyway.
  bool is_destructure_head() {
    size_t i = pos;
    if (toks[i].kind != Tok::LBracket) return false;
    ++i;
    while (i < toks.size()) {
      if (toks[i].kind == Tok::Newline) { ++i; continue; }
      if (toks[i].kind != Tok::Ident) return false;
      ++i;
      while (i < toks.size() && toks[i].kind == Tok::Newline) ++i;
      if (i >= toks.size()) return false;
      if (toks[i].kind == Tok::Comma) { ++i; continue; }
      if (toks[i].kind == Tok::RBracket) {
        ++i;
        while (i < toks.size() && toks[i].kind == Tok::Newline) ++i;
        return i < toks.size() && toks[i].kind == Tok::Assign;
      }
      return false;
    }
    return false;
  }

  StmtPtr parse_destructure(SrcLoc l) {
    expect(Tok::LBracket, "'['");
    ++group_depth;
    std::vector<std::string> names;
    while (true) {
      names.push_back(expect(Tok::Ident, "variable name").lexeme);
      if (!at(Tok::Comma)) break;
      next();
    }
    --group_depth;
    expect(Tok::RBracket, "']'");
    expect(Tok::Assign, "'='");
    ExprPtr value = parse_expr();
    return make_stmt(l, DestructureStmt{std::move(names), value});
  }

  StmtPtr parse_if() {
    SrcLoc l = loc();
    expect(Tok::KwIf, "'if'");
    ExprPtr cond = parse_expr();
    BlockPtr then_block = parse_block();
    BlockPtr else_block;
    // allow `else` on the next line
    size_t save = pos;
    skip_newlines();
    if (at(Tok::KwElse)) {
      next();
      if (at(Tok::KwIf)) {
        auto nested = parse_if();
        auto blk = std::make_shared<Block>();
        blk->stmts.push_back(nested);
        else_block = blk;
      } else {
        else_block = parse_block();
      }
    } else {
      pos = save;
    }
    return make_stmt(l, IfStmt{cond, then_block, else_block});
  }

  // --- expressions -----------------------------------------------------

  ExprPtr parse_expr() { return parse_or(); }

  ExprPtr parse_or() {
    ExprPtr e = parse_and();
    while (at(Tok::KwOr)) {
      SrcLoc l = loc();
      next();
      ExprPtr rhs = parse_and();
      e = make_expr(l, BinExpr{BinOpKind::Or, e, rhs});
    }
    return e;
  }

  ExprPtr parse_and() {
    ExprPtr e = parse_cmp();
    while (at(Tok::KwAnd)) {
      SrcLoc l = loc();
      next();
      ExprPtr rhs = parse_cmp();
      e = make_expr(l, BinExpr{BinOpKind::And, e, rhs});
    }
    return e;
  }

  ExprPtr parse_cmp() {
    ExprPtr e = parse_add();
    while (true) {
      BinOpKind op;
      switch (cur().kind) {
        case Tok::Lt: op = BinOpKind::Lt; break;
        case Tok::Le: op = BinOpKind::Le; break;
        case Tok::Gt: op = BinOpKind::Gt; break;
        case Tok::Ge: op = BinOpKind::Ge; break;
        case Tok::EqEq: op = BinOpKind::Eq; break;
        case Tok::Ne: op = BinOpKind::Ne; break;
        default: return e;
      }
      SrcLoc l = loc();
      next();
      ExprPtr rhs = parse_add();
      e = make_expr(l, BinExpr{op, e, rhs});
    }
  }

  ExprPtr parse_add() {
    ExprPtr e = parse_mul();
    while (at(Tok::Plus) || at(Tok::Minus)) {
      SrcLoc l = loc();
      BinOpKind op = next().kind == Tok::Plus ? BinOpKind::Add : BinOpKind::Sub;
      ExprPtr rhs = parse_mul();
      e = make_expr(l, BinExpr{op, e, rhs});
    }
    return e;
  }

  ExprPtr parse_mul() {
    ExprPtr e = parse_unary();
    while (at(Tok::Star) || at(Tok::Slash)) {
      SrcLoc l = loc();
      BinOpKind op = next().kind == Tok::Star ? BinOpKind::Mul : BinOpKind::Div;
      ExprPtr rhs = parse_unary();
      e = make_expr(l, BinExpr{op, e, rhs});
    }
    return e;
  }

  ExprPtr parse_unary() {
    if (at(Tok::Minus)) {
      SrcLoc l = loc();
      next();
      return make_expr(l, UnExpr{UnOpKind::Neg, parse_unary()});
    }
    if (at(Tok::KwNot)) {
      SrcLoc l = loc();
      next();
      return make_expr(l, UnExpr{UnOpKind::Not, parse_unary()});
    }
    return parse_postfix();
  }

  ExprPtr parse_postfix() {
    ExprPtr e = parse_primary();
    while (true) {
      if (at(Tok::LParen)) {
        SrcLoc l = loc();
        std::vector<Arg> args = parse_args();
        e = make_expr(l, CallExpr{e, std::move(args)});
      } else if (at(Tok::LBracket)) {
        SrcLoc l = loc();
        next();
        ++group_depth;
        ExprPtr ix = parse_expr();
        --group_depth;
        expect(Tok::RBracket, "']'");
        e = make_expr(l, IndexExpr{e, ix});
      } else if (at(Tok::Dot)) {
        SrcLoc l = loc();
        next();
        Token name = expect(Tok::Ident, "field name");
        e = make_expr(l, FieldExpr{e, name.lexeme});
      } else {
        return e;
      }
    }
  }

  std::vector<Arg> parse_args() {
    expect(Tok::LParen, "'('");
    ++group_depth;
    std::vector<Arg> args;
    if (!at(Tok::RParen)) {
      while (true) {
        if (at(Tok::Amp)) {
          SrcLoc l = loc();
          next();
          if (!at(Tok::Ident)) {
            throw CompileError(Diag{DiagKind::SwapOnNonPath,
                                    {l.line, l.column},
                                    "'&' must be followed by a variable path",
                                    {}});
          }
          args.push_back(Arg{parse_path()});
        } else {
          args.push_back(Arg{parse_expr()});
        }
        if (!at(Tok::Comma)) break;
        next();
      }
    }
    --group_depth;
    expect(Tok::RParen, "')'");
    return args;
  }

  Path parse_path() {
    Token root = expect(Tok::Ident, "variable name");
    Path p{root.lexeme, {root.line, root.column}, {}};
    while (true) {
      if (at(Tok::Dot)) {
        next();
        p.accessors.push_back(
            PathField{expect(Tok::Ident, "field name").lexeme});
      } else if (at(Tok::LBracket)) {
        next();
        ++group_depth;
        ExprPtr ix = parse_expr();
        --group_depth;
        expect(Tok::RBracket, "']'");
        p.accessors.push_back(PathIndex{ix});
      } else {
        return p;
      }
    }
  }

  ExprPtr parse_primary() {
    SrcLoc l = loc();
    switch (cur().kind) {
      case Tok::IntLit: {
        Token t = next();
        int64_t v = 0;
        auto [ptr, ec] =
            std::from_chars(t.lexeme.data(), t.lexeme.data() + t.lexeme.size(), v);
        if (ec != std::errc() || ptr != t.lexeme.data() + t.lexeme.size())
          fail("integer literal out of range: " + t.lexeme);
        return make_expr(l, IntLit{v});
      }
      case Tok::FloatLit: {
        Token t = next();
        double v = 0;
        auto [ptr, ec] =
            std::from_chars(t.lexeme.data(), t.lexeme.data() + t.lexeme.size(), v);
        if (ec != std::errc() || ptr != t.lexeme.data() + t.lexeme.size())
          fail("float literal out of range: " + t.lexeme);
        return make_expr(l, FloatLit{v});
      }
      case Tok::StrLit:
        return make_expr(l, StrLit{next().text});
      case Tok::KwTrue:
        next();
        return make_expr(l, BoolLit{true});
      case Tok::KwFalse:
        next();
        return make_expr(l, BoolLit{false});
      case Tok::Ident:
        return make_expr(l, VarExpr{next().lexeme});
      case Tok::KwFn: {
        next();
        auto params = parse_param_list();
        int saved_loops = loop_depth;
        loop_depth = 0;
        auto body = parse_block();
        loop_depth = saved_loops;
        return make_expr(l, ClosureLit{std::move(params), body});
      }
      case Tok::LParen: {
        next();
        ++group_depth;
        if (at(Tok::RParen)) {
          --group_depth;
          next();
          return make_expr(l, UnitLit{});
        }
        ExprPtr first = parse_expr();
        if (at(Tok::Comma)) {
          TupleLit tup;
          tup.elems.push_back(first);
          while (at(Tok::Comma)) {
            next();
            if (at(Tok::RParen)) break;  // trailing comma: (a,)
            tup.elems.push_back(parse_expr());
          }
          --group_depth;
          expect(Tok::RParen, "')'");
          return make_expr(l, std::move(tup));
        }
        --group_depth;
        expect(Tok::RParen, "')'");
        return first;
      }
      case Tok::LBracket: {
        next();
        ++group_depth;
        ArrayLit arr;
        if (!at(Tok::RBracket)) {
          while (true) {
            arr.elems.push_back(parse_expr());
            if (!at(Tok::Comma)) break;
            next();
            if (at(Tok::RBracket)) break;  // trailing comma
          }
        }
        --group_depth;
        expect(Tok::RBracket, "']'");
        return make_expr(l, std::move(arr));
      }
      case Tok::LBrace: {
        next();
        ++group_depth;
        RecordLit rec;
        if (!at(Tok::RBrace)) {
          while (true) {
            Token key = expect(Tok::Ident, "field name");
            expect(Tok::Colon, "':'");
            rec.fields.emplace_back(key.lexeme, parse_expr());
            if (!at(Tok::Comma)) break;
            next();
            if (at(Tok::RBrace)) break;  // trailing comma
          }
        }
        --group_depth;
        expect(Tok::RBrace, "'}'");
        return make_expr(l, std::move(rec));
      }
      case Tok::Amp:
        fail("'&' is only allowed on call arguments and parameters",
             DiagKind::SwapOnNonPath);
      default:
        fail(std::string("expected expression, found ") + tok_name(cur().kind));
    }
  }
};

}  // namespace

Program parse(const std::vector<Token>& tokens) {
  Parser p(tokens);
  return p.parse_program();
}

Program parse_source(std::string_view source) {
  auto toks = tokenize(source);
  return parse(toks);
}

}  // namespace sl

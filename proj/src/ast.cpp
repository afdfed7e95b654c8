#include "sl/ast.hpp"

#include "sl/util.hpp"

namespace sl {

ExprPtr path_to_expr(const Path& p) {
  ExprPtr e = make_expr(p.loc, VarExpr{p.root});
  for (const auto& acc : p.accessors) {
    if (const auto* f = std::get_if<PathField>(&acc)) {
      e = make_expr(p.loc, FieldExpr{e, f->name});
    } else {
      e = make_expr(p.loc, IndexExpr{e, std::get<PathIndex>(acc).index});
    }
  }
  return e;
}

std::optional<Path> expr_to_path(const Expr& e) {
  if (const auto* v = std::get_if<VarExpr>(&e.node)) {
    return Path{v->name, e.loc, {}};
  }
  if (const auto* f = std::get_if<FieldExpr>(&e.node)) {
    auto base = expr_to_path(*f->base);
    if (!base) return std::nullopt;
    base->accessors.push_back(PathField{f->name});
    return base;
  }
  if (const auto* ix = std::get_if<IndexExpr>(&e.node)) {
    auto base = expr_to_path(*ix->base);
    if (!base) return std::nullopt;
    base->accessors.push_back(PathIndex{ix->index});
    return base;
  }
  return std::nullopt;
}

namespace {

bool eq(const ExprPtr& a, const ExprPtr& b) {
  if (!a || !b) return !a && !b;
  return equal(*a, *b);
}

bool eq_params(const std::vector<Param>& a, const std::vector<Param>& b) {
  if (a.size() != b.size()) return false;
  for (size_t i = 0; i < a.size(); ++i) {
    if (a[i].name != b[i].name || a[i].swapped != b[i].swapped) return false;
  }
  return true;
}

}  // namespace

bool equal(const Path& a, const Path& b) {
  if (a.root != b.root || a.accessors.size() != b.accessors.size())
    return false;
  for (size_t i = 0; i < a.accessors.size(); ++i) {
    if (a.accessors[i].index() != b.accessors[i].index()) return false;
    if (const auto* f = std::get_if<PathField>(&a.accessors[i])) {
      if (f->name != std::get<PathField>(b.accessors[i]).name) return false;
    } else {
      if (!eq(std::get<PathIndex>(a.accessors[i]).index,
              std::get<PathIndex>(b.accessors[i]).index))
        return false;
    }
  }
  return true;
}

bool equal(const Expr& a, const Expr& b) {
  if (a.node.index() != b.node.index()) return false;
  return std::visit(
      overloaded{
          [&](const IntLit& x) { return x.value == std::get<IntLit>(b.node).value; },
          [&](const FloatLit& x) { return x.value == std::get<FloatLit>(b.node).value; },
          [&](const BoolLit& x) { return x.value == std::get<BoolLit>(b.node).value; },
          [&](const StrLit& x) { return x.value == std::get<StrLit>(b.node).value; },
          [&](const UnitLit&) { return true; },
          [&](const VarExpr& x) { return x.name == std::get<VarExpr>(b.node).name; },
          [&](const IndexExpr& x) {
            const auto& y = std::get<IndexExpr>(b.node);
            return eq(x.base, y.base) && eq(x.index, y.index);
          },
          [&](const FieldExpr& x) {
            const auto& y = std::get<FieldExpr>(b.node);
            return x.name == y.name && eq(x.base, y.base);
          },
          [&](const BinExpr& x) {
            const auto& y = std::get<BinExpr>(b.node);
            return x.op == y.op && eq(x.lhs, y.lhs) && eq(x.rhs, y.rhs);
          },
          [&](const UnExpr& x) {
            const auto& y = std::get<UnExpr>(b.node);
            return x.op == y.op && eq(x.operand, y.operand);
          },
          [&](const CallExpr& x) {
            const auto& y = std::get<CallExpr>(b.node);
            if (!eq(x.callee, y.callee) || x.args.size() != y.args.size())
              return false;
            for (size_t i = 0; i < x.args.size(); ++i) {
              if (x.args[i].is_swap() != y.args[i].is_swap()) return false;
              if (x.args[i].is_swap()) {
                if (!equal(x.args[i].path(), y.args[i].path())) return false;
              } else if (!eq(x.args[i].expr(), y.args[i].expr())) {
                return false;
              }
            }
            return true;
          },
          [&](const ArrayLit& x) {
            const auto& y = std::get<ArrayLit>(b.node);
            if (x.elems.size() != y.elems.size()) return false;
            for (size_t i = 0; i < x.elems.size(); ++i)
              if (!eq(x.elems[i], y.elems[i])) return false;
            return true;
          },
          [&](const TupleLit& x) {
            const auto& y = std::get<TupleLit>(b.node);
            if (x.elems.size() != y.elems.size()) return false;
            for (size_t i = 0; i < x.elems.size(); ++i)
              if (!eq(x.elems[i], y.elems[i])) return false;
            return true;
          },
          [&](const RecordLit& x) {
            const auto& y = std::get<RecordLit>(b.node);
            if (x.fields.size() != y.fields.size()) return false;
            for (size_t i = 0; i < x.fields.size(); ++i) {
              if (x.fields[i].first != y.fields[i].first) return false;
              if (!eq(x.fields[i].second, y.fields[i].second)) return false;
            }
            return true;
          },
          [&](const ClosureLit& x) {
            const auto& y = std::get<ClosureLit>(b.node);
            return eq_params(x.params, y.params) && equal(*x.body, *y.body);
          },
      },
      a.node);
}

bool equal(const Stmt& a, const Stmt& b) {
  if (a.node.index() != b.node.index()) return false;
  return std::visit(
      overloaded{
          [&](const AssignStmt& x) {
            const auto& y = std::get<AssignStmt>(b.node);
            return equal(x.target, y.target) && eq(x.value, y.value);
          },
          [&](const DestructureStmt& x) {
            const auto& y = std::get<DestructureStmt>(b.node);
            return x.names == y.names && eq(x.value, y.value);
          },
          [&](const CompoundStmt& x) {
            const auto& y = std::get<CompoundStmt>(b.node);
            return x.op == y.op && equal(x.target, y.target) &&
                   eq(x.value, y.value);
          },
          [&](const CallStmt& x) {
            return eq(x.call, std::get<CallStmt>(b.node).call);
          },
          [&](const WhileStmt& x) {
            const auto& y = std::get<WhileStmt>(b.node);
            return eq(x.cond, y.cond) && equal(*x.body, *y.body);
          },
          [&](const IfStmt& x) {
            const auto& y = std::get<IfStmt>(b.node);
            if (!eq(x.cond, y.cond)) return false;
            if (!equal(*x.then_block, *y.then_block)) return false;
            if (!x.else_block || !y.else_block)
              return !x.else_block && !y.else_block;
            return equal(*x.else_block, *y.else_block);
          },
          [&](const ReturnStmt& x) {
            return eq(x.value, std::get<ReturnStmt>(b.node).value);
          },
          [&](const BreakStmt&) { return true; },
          [&](const ContinueStmt&) { return true; },
      },
      a.node);
}

bool equal(const Block& a, const Block& b) {
  if (a.stmts.size() != b.stmts.size()) return false;
  for (size_t i = 0; i < a.stmts.size(); ++i)
    if (!equal(*a.stmts[i], *b.stmts[i])) return false;
  return true;
}

bool equal(const FnDecl& a, const FnDecl& b) {
  return a.name == b.name && eq_params(a.params, b.params) &&
         equal(*a.body, *b.body);
}

bool equal(const Program& a, const Program& b) {
  if (a.functions.size() != b.functions.size()) return false;
  for (size_t i = 0; i < a.functions.size(); ++i)
    if (!equal(a.functions[i], b.functions[i])) return false;
  return true;
}

}  // namespace sl

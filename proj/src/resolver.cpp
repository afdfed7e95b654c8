#include "sl/resolver.hpp"

#include <functional>

#include "sl/builtins.hpp"
#include "sl/util.hpp"

namespace sl {

namespace {

void collect_assigned(const Block& b, std::set<std::string>& out);

void collect_assigned_expr(const Expr& e, std::set<std::string>& out) {
  std::visit(
      overloaded{
          [&](const IndexExpr& x) {
            collect_assigned_expr(*x.base, out);
            collect_assigned_expr(*x.index, out);
          },
          [&](const FieldExpr& x) { collect_assigned_expr(*x.base, out); },
          [&](const BinExpr& x) {
            collect_assigned_expr(*x.lhs, out);
            collect_assigned_expr(*x.rhs, out);
          },
          [&](const UnExpr& x) { collect_assigned_expr(*x.operand, out); },
          [&](const CallExpr& x) {
            collect_assigned_expr(*x.callee, out);
            for (const auto& a : x.args) {
              if (a.is_swap()) {
                out.insert(a.path().root);  // write-back rebinds the root
                for (const auto& acc : a.path().accessors)
                  if (const auto* ix = std::get_if<PathIndex>(&acc))
                    collect_assigned_expr(*ix->index, out);
              } else {
                collect_assigned_expr(*a.expr(), out);
              }
            }
          },
          [&](const ArrayLit& x) {
            for (const auto& el : x.elems) collect_assigned_expr(*el, out);
          },
          [&](const TupleLit& x) {
            for (const auto& el : x.elems) collect_assigned_expr(*el, out);
          },
          [&](const RecordLit& x) {
            for (const auto& f : x.fields) collect_assigned_expr(*f.second, out);
          },
          [&](const ClosureLit&) { /* separate scope */ },
          [&](const auto&) {},
      },
      e.node);
}

void collect_assigned(const Block& b, std::set<std::string>& out) {
  for (const auto& sp : b.stmts) {
    std::visit(
        overloaded{
            [&](const AssignStmt& x) {
              out.insert(x.target.root);
              for (const auto& acc : x.target.accessors)
                if (const auto* ix = std::get_if<PathIndex>(&acc))
                  collect_assigned_expr(*ix->index, out);
              collect_assigned_expr(*x.value, out);
            },
            [&](const DestructureStmt& x) {
              for (const auto& n : x.names) out.insert(n);
              collect_assigned_expr(*x.value, out);
            },
            [&](const CompoundStmt& x) {
              out.insert(x.target.root);
              for (const auto& acc : x.target.accessors)
                if (const auto* ix = std::get_if<PathIndex>(&acc))
                  collect_assigned_expr(*ix->index, out);
              collect_assigned_expr(*x.value, out);
            },
            [&](const CallStmt& x) { collect_assigned_expr(*x.call, out); },
            [&](const WhileStmt& x) {
              collect_assigned_expr(*x.cond, out);
              collect_assigned(*x.body, out);
            },
            [&](const IfStmt& x) {
              collect_assigned_expr(*x.cond, out);
              collect_assigned(*x.then_block, out);
              if (x.else_block) collect_assigned(*x.else_block, out);
            },
            [&](const ReturnStmt& x) {
              if (x.value) collect_assigned_expr(*x.value, out);
            },
            [&](const auto&) {},
        },
        sp->node);
  }
}

struct Resolver {
  const Program& prog;
  std::set<std::string> fn_names;
  std::vector<Diag> diags;

  // stack of scopes, innermost last; each holds the assignable names
  std::vector<std::set<std::string>> scopes;

  void error(DiagKind k, SrcLoc loc, std::string msg) {
    diags.push_back(Diag{k, loc, std::move(msg), {}});
  }

  bool is_local(const std::string& name) const {
    return scopes.back().count(name) > 0;
  }

  // builtins are callable names, not values; they only resolve in callee
  // position
  bool is_visible_value(const std::string& name) const {
    for (auto it = scopes.rbegin(); it != scopes.rend(); ++it)
      if (it->count(name)) return true;
    return fn_names.count(name) > 0;
  }

  bool is_visible(const std::string& name) const {
    return is_visible_value(name) || builtin_by_name(name).has_value();
  }

  void run() {
    for (const auto& f : prog.functions) {
      if (!fn_names.insert(f.name).second)
        error(DiagKind::DuplicateFunction, f.loc,
              "function '" + f.name + "' is already defined");
    }
    for (const auto& f : prog.functions) check_fn_scope(f.params, *f.body, f.loc);
  }

  void check_fn_scope(const std::vector<Param>& params, const Block& body,
                      SrcLoc loc) {
    std::set<std::string> names;
    for (const auto& p : params) {
      if (!names.insert(p.name).second)
        error(DiagKind::DuplicateParam, loc,
              "duplicate parameter '" + p.name + "'");
    }
    auto scope = assigned_names(body);
    scope.insert(names.begin(), names.end());
    scopes.push_back(std::move(scope));
    check_block(body);
    scopes.pop_back();
  }

  void check_path(const Path& p, bool swap_root) {
    if (swap_root) {
      if (!is_local(p.root)) {
        error(DiagKind::UnknownVariable, p.loc,
              "swap target '" + p.root +
                  "' does not resolve to a local variable");
      }
    } else if (!is_visible(p.root)) {
      error(DiagKind::UnknownVariable, p.loc,
            "unknown variable '" + p.root + "'");
    }
    for (const auto& acc : p.accessors)
      if (const auto* ix = std::get_if<PathIndex>(&acc)) check_expr(*ix->index);
  }

  void check_expr(const Expr& e) {
    std::visit(
        overloaded{
            [&](const VarExpr& x) {
              if (!is_visible_value(x.name)) {
                error(DiagKind::UnknownVariable, e.loc,
                      builtin_by_name(x.name)
                          ? "builtin '" + x.name + "' is not a value"
                          : "unknown variable '" + x.name + "'");
              }
            },
            [&](const IndexExpr& x) {
              check_expr(*x.base);
              check_expr(*x.index);
            },
            [&](const FieldExpr& x) { check_expr(*x.base); },
            [&](const BinExpr& x) {
              check_expr(*x.lhs);
              check_expr(*x.rhs);
            },
            [&](const UnExpr& x) { check_expr(*x.operand); },
            [&](const CallExpr& x) {
              const auto* var = std::get_if<VarExpr>(&x.callee->node);
              if (var) {
                if (!is_visible(var->name))
                  error(DiagKind::UnknownVariable, x.callee->loc,
                        "unknown variable '" + var->name + "'");
              } else {
                check_expr(*x.callee);
              }
              for (const auto& a : x.args) {
                if (a.is_swap()) check_path(a.path(), /*swap_root=*/true);
                else check_expr(*a.expr());
              }
            },
            [&](const ArrayLit& x) {
              for (const auto& el : x.elems) check_expr(*el);
            },
            [&](const TupleLit& x) {
              for (const auto& el : x.elems) check_expr(*el);
            },
            [&](const RecordLit& x) {
              for (const auto& f : x.fields) check_expr(*f.second);
            },
            [&](const ClosureLit& x) { check_fn_scope(x.params, *x.body, e.loc); },
            [&](const auto&) {},
        },
        e.node);
  }

  void check_block(const Block& b) {
    for (const auto& sp : b.stmts) {
      std::visit(
          overloaded{
              [&](const AssignStmt& x) {
                check_path(x.target, /*swap_root=*/false);
                check_expr(*x.value);
              },
              [&](const DestructureStmt& x) { check_expr(*x.value); },
              [&](const CompoundStmt& x) {
                check_path(x.target, /*swap_root=*/false);
                check_expr(*x.value);
              },
              [&](const CallStmt& x) { check_expr(*x.call); },
              [&](const WhileStmt& x) {
                check_expr(*x.cond);
                check_block(*x.body);
              },
              [&](const IfStmt& x) {
                check_expr(*x.cond);
                check_block(*x.then_block);
                if (x.else_block) check_block(*x.else_block);
              },
              [&](const ReturnStmt& x) {
                if (x.value) check_expr(*x.value);
              },
              [&](const auto&) {},
          },
          sp->node);
    }
  }
};

}  // namespace

std::set<std::string> assigned_names(const Block& body) {
  std::set<std::string> out;
  collect_assigned(body, out);
  return out;
}

std::vector<Diag> resolve(const Program& p) {
  Resolver r{p, {}, {}, {}};
  r.run();
  return std::move(r.diags);
}

}  // namespace sl

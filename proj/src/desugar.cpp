#include "sl/desugar.hpp"

#include <map>

#include "sl/builtins.hpp"
#include "sl/resolver.hpp"
#include "sl/util.hpp"

namespace sl {

std::string TempNames::fresh() {
  std::string name;
  do {
    name = "_t" + std::to_string(counter++);
  } while (used.count(name));
  used.insert(name);
  return name;
}

namespace {

bool is_atomic(const Expr& e) {
  return std::visit(
      overloaded{
          [](const IntLit&) { return true; },
          [](const FloatLit&) { return true; },
          [](const BoolLit&) { return true; },
          [](const StrLit&) { return true; },
          [](const UnitLit&) { return true; },
          [](const VarExpr&) { return true; },
          [](const auto&) { return false; },
      },
      e.node);
}

// Any call with a swap argument on an accessor path? Closure bodies are
// separate scopes and are not inspected.
bool contains_path_swap(const Expr& e) {
  return std::visit(
      overloaded{
          [](const IndexExpr& x) {
            return contains_path_swap(*x.base) || contains_path_swap(*x.index);
          },
          [](const FieldExpr& x) { return contains_path_swap(*x.base); },
          [](const BinExpr& x) {
            return contains_path_swap(*x.lhs) || contains_path_swap(*x.rhs);
          },
          [](const UnExpr& x) { return contains_path_swap(*x.operand); },
          [](const CallExpr& x) {
            for (const auto& a : x.args) {
              if (a.is_swap()) {
                if (!a.path().accessors.empty()) return true;
                continue;
              }
              if (contains_path_swap(*a.expr())) return true;
            }
            return contains_path_swap(*x.callee);
          },
          [](const ArrayLit& x) {
            for (const auto& el : x.elems)
              if (contains_path_swap(*el)) return true;
            return false;
          },
          [](const TupleLit& x) {
            for (const auto& el : x.elems)
              if (contains_path_swap(*el)) return true;
            return false;
          },
          [](const RecordLit& x) {
            for (const auto& f : x.fields)
              if (contains_path_swap(*f.second)) return true;
            return false;
          },
          [](const auto&) { return false; },
      },
      e.node);
}

void collect_idents_block(const Block& b, std::set<std::string>& out);

void collect_idents(const Expr& e, std::set<std::string>& out) {
  std::visit(
      overloaded{
          [&](const VarExpr& x) { out.insert(x.name); },
          [&](const IndexExpr& x) {
            collect_idents(*x.base, out);
            collect_idents(*x.index, out);
          },
          [&](const FieldExpr& x) { collect_idents(*x.base, out); },
          [&](const BinExpr& x) {
            collect_idents(*x.lhs, out);
            collect_idents(*x.rhs, out);
          },
          [&](const UnExpr& x) { collect_idents(*x.operand, out); },
          [&](const CallExpr& x) {
            collect_idents(*x.callee, out);
            for (const auto& a : x.args) {
              if (a.is_swap()) {
                out.insert(a.path().root);
                for (const auto& acc : a.path().accessors)
                  if (const auto* ix = std::get_if<PathIndex>(&acc))
                    collect_idents(*ix->index, out);
              } else {
                collect_idents(*a.expr(), out);
              }
            }
          },
          [&](const ArrayLit& x) {
            for (const auto& el : x.elems) collect_idents(*el, out);
          },
          [&](const TupleLit& x) {
            for (const auto& el : x.elems) collect_idents(*el, out);
          },
          [&](const RecordLit& x) {
            for (const auto& f : x.fields) collect_idents(*f.second, out);
          },
          [&](const ClosureLit& x) {
            for (const auto& p : x.params) out.insert(p.name);
            collect_idents_block(*x.body, out);
          },
          [&](const auto&) {},
      },
      e.node);
}

void collect_idents_path(const Path& p, std::set<std::string>& out) {
  out.insert(p.root);
  for (const auto& acc : p.accessors)
    if (const auto* ix = std::get_if<PathIndex>(&acc))
      collect_idents(*ix->index, out);
}

void collect_idents_block(const Block& b, std::set<std::string>& out) {
  for (const auto& sp : b.stmts) {
    std::visit(
        overloaded{
            [&](const AssignStmt& x) {
              collect_idents_path(x.target, out);
              collect_idents(*x.value, out);
            },
            [&](const DestructureStmt& x) {
              for (const auto& n : x.names) out.insert(n);
              collect_idents(*x.value, out);
            },
            [&](const CompoundStmt& x) {
              collect_idents_path(x.target, out);
              collect_idents(*x.value, out);
            },
            [&](const CallStmt& x) { collect_idents(*x.call, out); },
            [&](const WhileStmt& x) {
              collect_idents(*x.cond, out);
              collect_idents_block(*x.body, out);
            },
            [&](const IfStmt& x) {
              collect_idents(*x.cond, out);
              collect_idents_block(*x.then_block, out);
              if (x.else_block) collect_idents_block(*x.else_block, out);
            },
            [&](const ReturnStmt& x) {
              if (x.value) collect_idents(*x.value, out);
            },
            [&](const auto&) {},
        },
        sp->node);
  }
}

ExprPtr key_expr(const Accessor& acc, SrcLoc loc) {
  if (const auto* f = std::get_if<PathField>(&acc))
    return make_expr(loc, StrLit{f->name});
  return std::get<PathIndex>(acc).index;
}

// Hoists non-atomic accessor indexes to temporaries so the rewritten path
// evaluates each index exactly once.
Path hoist_path_indexes(const Path& p, SrcLoc loc, TempNames& temps,
                        std::vector<StmtPtr>& out) {
  Path np{p.root, p.loc, {}};
  for (const auto& acc : p.accessors) {
    if (const auto* f = std::get_if<PathField>(&acc)) {
      np.accessors.push_back(PathField{f->name});
      continue;
    }
    ExprPtr ix = std::get<PathIndex>(acc).index;
    if (!is_atomic(*ix)) {
      std::string t = temps.fresh();
      out.push_back(make_stmt(loc, AssignStmt{Path{t, loc, {}}, ix}));
      ix = make_expr(loc, VarExpr{t});
    }
    np.accessors.push_back(PathIndex{ix});
  }
  return np;
}

ExprPtr builtin_call(SrcLoc loc, const char* name, std::vector<Arg> args) {
  return make_expr(loc, CallExpr{make_expr(loc, VarExpr{name}), std::move(args)});
}

Arg swap_var(SrcLoc loc, const std::string& name) {
  return Arg{Path{name, loc, {}}};
}

// extract/rebuild chain for one accessor-path swap argument; returns the
// fresh variable holding the component.
std::string expand_one_swap_path(const Path& p, SrcLoc loc, TempNames& temps,
                                 std::vector<StmtPtr>& pre,
                                 std::vector<StmtPtr>& post) {
  std::string container = p.root;
  std::vector<StmtPtr> rebuild;
  for (const auto& acc : p.accessors) {
    std::string component = temps.fresh();
    ExprPtr key = key_expr(acc, loc);
    pre.push_back(make_stmt(
        loc, AssignStmt{Path{component, loc, {}},
                        builtin_call(loc, "extract",
                                     {swap_var(loc, container), Arg{key}})}));
    rebuild.push_back(make_stmt(
        loc, CallStmt{builtin_call(
                 loc, "set",
                 {swap_var(loc, container), Arg{key},
                  Arg{make_expr(loc, VarExpr{component})}})}));
    container = component;
  }
  post.insert(post.end(), rebuild.rbegin(), rebuild.rend());
  return container;
}

}  // namespace

std::vector<StmtPtr> expand_compound_assign(const Stmt& s, TempNames& temps) {
  const auto& c = std::get<CompoundStmt>(s.node);
  std::vector<StmtPtr> out;
  Path target = hoist_path_indexes(c.target, s.loc, temps, out);
  BinOpKind op = c.op == CompoundOp::Add   ? BinOpKind::Add
                 : c.op == CompoundOp::Sub ? BinOpKind::Sub
                 : c.op == CompoundOp::Mul ? BinOpKind::Mul
                                           : BinOpKind::Div;
  ExprPtr value =
      make_expr(s.loc, BinExpr{op, path_to_expr(target), c.value});
  out.push_back(make_stmt(s.loc, AssignStmt{std::move(target), value}));
  return out;
}

std::vector<StmtPtr> expand_assignment_path(const Stmt& s, TempNames& temps) {
  const auto& a = std::get<AssignStmt>(s.node);
  if (a.target.accessors.empty()) return {make_stmt(s.loc, a)};
  std::vector<StmtPtr> out;
  Path target = hoist_path_indexes(a.target, s.loc, temps, out);
  Path container{target.root, target.loc,
                 {target.accessors.begin(), target.accessors.end() - 1}};
  ExprPtr key = key_expr(target.accessors.back(), s.loc);
  out.push_back(make_stmt(
      s.loc, CallStmt{builtin_call(s.loc, "set",
                                   {Arg{std::move(container)}, Arg{key},
                                    Arg{a.value}})}));
  return out;
}

SwapExpansion expand_swap_args(const ExprPtr& call, TempNames& temps) {
  const auto& c = std::get<CallExpr>(call->node);
  SwapExpansion res;
  std::vector<Arg> args;
  for (const auto& a : c.args) {
    if (!a.is_swap() || a.path().accessors.empty()) {
      args.push_back(a);
      continue;
    }
    Path p = hoist_path_indexes(a.path(), call->loc, temps, res.pre);
    std::string component =
        expand_one_swap_path(p, call->loc, temps, res.pre, res.post);
    args.push_back(swap_var(call->loc, component));
  }
  res.call = make_expr(call->loc, CallExpr{c.callee, std::move(args)});
  return res;
}

namespace {

struct Desugarer {
  const Program& prog;
  std::map<std::string, const FnDecl*> fns;
  std::vector<Diag> diags;
  std::vector<std::set<std::string>> local_scopes;

  explicit Desugarer(const Program& p) : prog(p) {
    for (const auto& f : p.functions) fns.emplace(f.name, &f);
  }

  void error(DiagKind k, SrcLoc loc, std::string msg) {
    diags.push_back(Diag{k, loc, std::move(msg), {}});
  }

  // The expansion of path updates calls the set/extract builtins by name;
  // a local shadowing them would capture those calls.
  void check_expansion_builtins(SrcLoc loc) {
    for (const char* name : {"set", "extract"}) {
      if (is_local(name))
        error(DiagKind::UnknownVariable, loc,
              std::string("path update needs builtin '") + name +
                  "', which is shadowed by a local variable");
    }
  }

  bool is_local(const std::string& name) const {
    for (auto it = local_scopes.rbegin(); it != local_scopes.rend(); ++it)
      if (it->count(name)) return true;
    return false;
  }

  // --- static call checks -----------------------------------------------

  void check_call(const Expr& call_expr) {
    const auto& c = std::get<CallExpr>(call_expr.node);
    check_swap_overlap(c, call_expr.loc);
    const auto* var = std::get_if<VarExpr>(&c.callee->node);
    if (!var || is_local(var->name)) return;  // dynamic callee

    std::vector<bool> expected;
    if (auto it = fns.find(var->name); it != fns.end()) {
      expected.reserve(it->second->params.size());
      for (const auto& p : it->second->params) expected.push_back(p.swapped);
    } else if (auto b = builtin_by_name(var->name)) {
      const auto& sig = builtin_sig(*b);
      expected.assign(static_cast<size_t>(sig.arity), false);
      for (uint32_t pos : sig.swap_positions) expected[pos] = true;
    } else {
      return;
    }

    if (c.args.size() != expected.size()) {
      error(DiagKind::ArityMismatch, call_expr.loc,
            "'" + var->name + "' expects " + std::to_string(expected.size()) +
                " argument(s), got " + std::to_string(c.args.size()));
      return;
    }
    for (size_t i = 0; i < c.args.size(); ++i) {
      if (c.args[i].is_swap() != expected[i]) {
        error(DiagKind::SwapArityMismatch, call_expr.loc,
              "argument " + std::to_string(i + 1) + " of '" + var->name +
                  (expected[i] ? "' must be marked with '&'"
                               : "' must not be marked with '&'"));
        return;
      }
    }
  }

  // Two swap paths in one call must be provably disjoint: the expansion
  // extracts both components up front, which is only sound when neither
  // location contains the other.
  void check_swap_overlap(const CallExpr& c, SrcLoc loc) {
    std::vector<const Path*> paths;
    for (const auto& a : c.args)
      if (a.is_swap()) paths.push_back(&a.path());
    for (size_t i = 0; i < paths.size(); ++i) {
      for (size_t j = i + 1; j < paths.size(); ++j) {
        if (paths[i]->root != paths[j]->root) continue;
        if (!provably_disjoint(*paths[i], *paths[j])) {
          error(DiagKind::OverlappingSwapPaths, loc,
                "swap arguments '" + paths[i]->root +
                    "...' overlap or cannot be proven disjoint");
        }
      }
    }
  }

  static bool provably_disjoint(const Path& a, const Path& b) {
    size_t n = std::min(a.accessors.size(), b.accessors.size());
    for (size_t k = 0; k < n; ++k) {
      const auto& x = a.accessors[k];
      const auto& y = b.accessors[k];
      const auto* xf = std::get_if<PathField>(&x);
      const auto* yf = std::get_if<PathField>(&y);
      if (xf && yf) {
        if (xf->name != yf->name) return true;
        continue;
      }
      if (!xf && !yf) {
        const auto& xe = *std::get<PathIndex>(x).index;
        const auto& ye = *std::get<PathIndex>(y).index;
        const auto* xi = std::get_if<IntLit>(&xe.node);
        const auto* yi = std::get_if<IntLit>(&ye.node);
        if (xi && yi && xi->value != yi->value) return true;
        if (xi && yi) continue;  // equal literals: same slot, overlap
        return false;            // dynamic indexes: cannot prove
      }
      return true;  // field vs index: different container kinds
    }
    return false;  // one path is a prefix of the other (or equal)
  }

  // --- expression desugaring ---------------------------------------------

  ExprPtr bind_temp(ExprPtr e, TempNames& temps, std::vector<StmtPtr>& out) {
    if (is_atomic(*e)) return e;
    std::string t = temps.fresh();
    out.push_back(make_stmt(e->loc, AssignStmt{Path{t, e->loc, {}}, e}));
    return make_expr(e->loc, VarExpr{t});
  }

  // Desugars an expression, appending to `out` the statements that carry the
  // decompose-and-rebuild machinery of any nested path-swap call. The
  // returned expression evaluates after everything emitted to `out`.
  ExprPtr desugar_expr(const ExprPtr& e, TempNames& temps,
                       std::vector<StmtPtr>& out) {
    SrcLoc loc = e->loc;
    return std::visit(
        overloaded{
            [&](const ClosureLit& x) -> ExprPtr {
              return make_expr(
                  loc, ClosureLit{x.params, desugar_scope(x.params, *x.body)});
            },
            [&](const BinExpr& x) -> ExprPtr {
              bool rhs_has = contains_path_swap(*x.rhs);
              if ((x.op == BinOpKind::And || x.op == BinOpKind::Or) &&
                  rhs_has) {
                // keep the right operand conditional
                ExprPtr lhs = desugar_expr(x.lhs, temps, out);
                std::string t = temps.fresh();
                out.push_back(
                    make_stmt(loc, AssignStmt{Path{t, loc, {}}, lhs}));
                std::vector<StmtPtr> inner;
                ExprPtr rhs = desugar_expr(x.rhs, temps, inner);
                inner.push_back(
                    make_stmt(loc, AssignStmt{Path{t, loc, {}}, rhs}));
                auto blk = std::make_shared<Block>(Block{std::move(inner)});
                ExprPtr cond = make_expr(loc, VarExpr{t});
                if (x.op == BinOpKind::Or)
                  cond = make_expr(loc, UnExpr{UnOpKind::Not, cond});
                out.push_back(make_stmt(loc, IfStmt{cond, blk, nullptr}));
                return make_expr(loc, VarExpr{t});
              }
              ExprPtr lhs = desugar_expr(x.lhs, temps, out);
              if (rhs_has) lhs = bind_temp(lhs, temps, out);
              ExprPtr rhs = desugar_expr(x.rhs, temps, out);
              return make_expr(loc, BinExpr{x.op, lhs, rhs});
            },
            [&](const UnExpr& x) -> ExprPtr {
              return make_expr(
                  loc, UnExpr{x.op, desugar_expr(x.operand, temps, out)});
            },
            [&](const IndexExpr& x) -> ExprPtr {
              ExprPtr base = desugar_expr(x.base, temps, out);
              if (contains_path_swap(*x.index))
                base = bind_temp(base, temps, out);
              ExprPtr index = desugar_expr(x.index, temps, out);
              return make_expr(loc, IndexExpr{base, index});
            },
            [&](const FieldExpr& x) -> ExprPtr {
              return make_expr(
                  loc, FieldExpr{desugar_expr(x.base, temps, out), x.name});
            },
            [&](const ArrayLit& x) -> ExprPtr {
              return make_expr(loc,
                               ArrayLit{desugar_elems(x.elems, temps, out)});
            },
            [&](const TupleLit& x) -> ExprPtr {
              return make_expr(loc,
                               TupleLit{desugar_elems(x.elems, temps, out)});
            },
            [&](const RecordLit& x) -> ExprPtr {
              RecordLit rec;
              bool linearize = false;
              for (const auto& f : x.fields)
                linearize |= contains_path_swap(*f.second);
              for (size_t i = 0; i < x.fields.size(); ++i) {
                ExprPtr v = desugar_expr(x.fields[i].second, temps, out);
                bool later = false;
                for (size_t j = i + 1; j < x.fields.size(); ++j)
                  later |= contains_path_swap(*x.fields[j].second);
                if (linearize && later) v = bind_temp(v, temps, out);
                rec.fields.emplace_back(x.fields[i].first, v);
              }
              return make_expr(loc, std::move(rec));
            },
            [&](const CallExpr&) -> ExprPtr {
              return desugar_call(e, temps, out, /*statement=*/false);
            },
            [&](const auto&) -> ExprPtr { return e; },
        },
        e->node);
  }

  std::vector<ExprPtr> desugar_elems(const std::vector<ExprPtr>& elems,
                                     TempNames& temps,
                                     std::vector<StmtPtr>& out) {
    std::vector<ExprPtr> res;
    for (size_t i = 0; i < elems.size(); ++i) {
      ExprPtr v = desugar_expr(elems[i], temps, out);
      bool later = false;
      for (size_t j = i + 1; j < elems.size(); ++j)
        later |= contains_path_swap(*elems[j]);
      if (later) v = bind_temp(v, temps, out);
      res.push_back(v);
    }
    return res;
  }

  // Desugars one call. In statement position the call statement itself is
  // appended to `out` and the return value is null; in expression position
  // the result is bound to a temporary when rebuild statements must follow.
  ExprPtr desugar_call(const ExprPtr& e, TempNames& temps,
                       std::vector<StmtPtr>& out, bool statement) {
    const auto& c = std::get<CallExpr>(e->node);
    SrcLoc loc = e->loc;
    check_call(*e);

    bool has_path_swaps = false;
    bool child_cpsa = contains_path_swap(*c.callee);
    for (const auto& a : c.args) {
      if (a.is_swap()) {
        has_path_swaps |= !a.path().accessors.empty();
      } else {
        child_cpsa |= contains_path_swap(*a.expr());
      }
    }

    if (!has_path_swaps && !child_cpsa) {
      // only recurse for closure bodies and nested checks
      ExprPtr callee = desugar_expr(c.callee, temps, out);
      std::vector<Arg> args;
      for (const auto& a : c.args) {
        if (a.is_swap()) args.push_back(a);
        else args.push_back(Arg{desugar_expr(a.expr(), temps, out)});
      }
      ExprPtr call = make_expr(loc, CallExpr{callee, std::move(args)});
      if (statement) {
        out.push_back(make_stmt(loc, CallStmt{call}));
        return nullptr;
      }
      return call;
    }

    // Linearize: pin the evaluation point of the callee and of every
    // argument, interleaving component extraction at its surface position.
    if (has_path_swaps) check_expansion_builtins(loc);
    ExprPtr callee = desugar_expr(c.callee, temps, out);
    if (!std::holds_alternative<VarExpr>(callee->node))
      callee = bind_temp(callee, temps, out);

    // Phase 1: pin the value of every argument at its surface position.
    // Swap paths only pin their index expressions here; the destructive
    // extraction is deferred so that sibling arguments still see the intact
    // container (the overlap check rules out sibling mutation of it).
    std::vector<Arg> args(c.args.size());
    std::vector<std::pair<size_t, Path>> pending;
    for (size_t i = 0; i < c.args.size(); ++i) {
      const Arg& a = c.args[i];
      if (!a.is_swap()) {
        ExprPtr v = desugar_expr(a.expr(), temps, out);
        args[i] = Arg{bind_temp(v, temps, out)};
        continue;
      }
      if (a.path().accessors.empty()) {
        args[i] = a;
        continue;
      }
      Path p{a.path().root, a.path().loc, {}};
      for (const auto& acc : a.path().accessors) {
        if (const auto* f = std::get_if<PathField>(&acc)) {
          p.accessors.push_back(PathField{f->name});
        } else {
          ExprPtr ix =
              desugar_expr(std::get<PathIndex>(acc).index, temps, out);
          p.accessors.push_back(PathIndex{bind_temp(ix, temps, out)});
        }
      }
      pending.emplace_back(i, std::move(p));
    }

    // Phase 2: decompose the nested containers right before the call.
    std::vector<StmtPtr> post;
    for (const auto& [i, p] : pending) {
      std::string component = expand_one_swap_path(p, loc, temps, out, post);
      args[i] = swap_var(loc, component);
    }

    ExprPtr call = make_expr(loc, CallExpr{callee, std::move(args)});
    if (statement) {
      out.push_back(make_stmt(loc, CallStmt{call}));
      out.insert(out.end(), post.begin(), post.end());
      return nullptr;
    }
    std::string r = temps.fresh();
    out.push_back(make_stmt(loc, AssignStmt{Path{r, loc, {}}, call}));
    out.insert(out.end(), post.begin(), post.end());
    return make_expr(loc, VarExpr{r});
  }

  // --- statement desugaring ----------------------------------------------

  void desugar_stmt(const StmtPtr& sp, TempNames& temps,
                    std::vector<StmtPtr>& out) {
    const Stmt& s = *sp;
    std::visit(
        overloaded{
            [&](const CompoundStmt&) {
              for (const auto& st : expand_compound_assign(s, temps))
                desugar_stmt(st, temps, out);
            },
            [&](const AssignStmt& x) {
              if (!x.target.accessors.empty()) {
                check_expansion_builtins(s.loc);
                std::vector<StmtPtr> hoisted;
                Path target =
                    hoist_path_indexes(x.target, s.loc, temps, hoisted);
                for (const auto& st : hoisted) desugar_stmt(st, temps, out);
                Stmt plain{s.loc, AssignStmt{target, x.value}};
                auto expanded = expand_assignment_path(plain, temps);
                for (const auto& st : expanded) desugar_stmt(st, temps, out);
                return;
              }
              ExprPtr value = desugar_expr(x.value, temps, out);
              out.push_back(make_stmt(s.loc, AssignStmt{x.target, value}));
            },
            [&](const DestructureStmt& x) {
              ExprPtr value = desugar_expr(x.value, temps, out);
              out.push_back(make_stmt(s.loc, DestructureStmt{x.names, value}));
            },
            [&](const CallStmt& x) {
              desugar_call(x.call, temps, out, /*statement=*/true);
            },
            [&](const WhileStmt& x) {
              if (contains_path_swap(*x.cond)) {
                // re-evaluate the condition machinery on every iteration
                std::vector<StmtPtr> body;
                ExprPtr cond = desugar_expr(x.cond, temps, body);
                std::string t = temps.fresh();
                body.push_back(
                    make_stmt(s.loc, AssignStmt{Path{t, s.loc, {}}, cond}));
                auto brk = std::make_shared<Block>();
                brk->stmts.push_back(make_stmt(s.loc, BreakStmt{}));
                body.push_back(make_stmt(
                    s.loc,
                    IfStmt{make_expr(s.loc, UnExpr{UnOpKind::Not,
                                                   make_expr(s.loc,
                                                             VarExpr{t})}),
                           brk, nullptr}));
                for (const auto& st : x.body->stmts)
                  desugar_stmt(st, temps, body);
                out.push_back(make_stmt(
                    s.loc,
                    WhileStmt{make_expr(s.loc, BoolLit{true}),
                              std::make_shared<Block>(Block{std::move(body)})}));
                return;
              }
              std::vector<StmtPtr> dummy;
              ExprPtr cond = desugar_expr(x.cond, temps, dummy);
              out.push_back(
                  make_stmt(s.loc, WhileStmt{cond, desugar_block(*x.body, temps)}));
            },
            [&](const IfStmt& x) {
              ExprPtr cond = desugar_expr(x.cond, temps, out);
              out.push_back(make_stmt(
                  s.loc, IfStmt{cond, desugar_block(*x.then_block, temps),
                                x.else_block
                                    ? desugar_block(*x.else_block, temps)
                                    : nullptr}));
            },
            [&](const ReturnStmt& x) {
              ExprPtr value =
                  x.value ? desugar_expr(x.value, temps, out) : nullptr;
              out.push_back(make_stmt(s.loc, ReturnStmt{value}));
            },
            [&](const auto&) { out.push_back(sp); },
        },
        s.node);
  }

  BlockPtr desugar_block(const Block& b, TempNames& temps) {
    auto blk = std::make_shared<Block>();
    for (const auto& sp : b.stmts) desugar_stmt(sp, temps, blk->stmts);
    return blk;
  }

  BlockPtr desugar_scope(const std::vector<Param>& params, const Block& body) {
    auto scope = assigned_names(body);
    for (const auto& p : params) scope.insert(p.name);
    local_scopes.push_back(std::move(scope));

    TempNames temps;
    collect_idents_block(body, temps.used);
    for (const auto& p : params) temps.used.insert(p.name);
    for (const auto& [name, fn] : fns) temps.used.insert(name);

    BlockPtr out = desugar_block(body, temps);
    local_scopes.pop_back();
    return out;
  }
};

void check_core_expr(const Expr& e, std::string& why);

void check_core_block(const Block& b, std::string& why) {
  for (const auto& sp : b.stmts) {
    std::visit(
        overloaded{
            [&](const AssignStmt& x) {
              if (!x.target.accessors.empty())
                why = "assignment target has accessors";
              check_core_expr(*x.value, why);
            },
            [&](const DestructureStmt& x) { check_core_expr(*x.value, why); },
            [&](const CompoundStmt&) { why = "compound assignment present"; },
            [&](const CallStmt& x) { check_core_expr(*x.call, why); },
            [&](const WhileStmt& x) {
              check_core_expr(*x.cond, why);
              check_core_block(*x.body, why);
            },
            [&](const IfStmt& x) {
              check_core_expr(*x.cond, why);
              check_core_block(*x.then_block, why);
              if (x.else_block) check_core_block(*x.else_block, why);
            },
            [&](const ReturnStmt& x) {
              if (x.value) check_core_expr(*x.value, why);
            },
            [&](const auto&) {},
        },
        sp->node);
  }
}

void check_core_expr(const Expr& e, std::string& why) {
  std::visit(
      overloaded{
          [&](const IndexExpr& x) {
            check_core_expr(*x.base, why);
            check_core_expr(*x.index, why);
          },
          [&](const FieldExpr& x) { check_core_expr(*x.base, why); },
          [&](const BinExpr& x) {
            check_core_expr(*x.lhs, why);
            check_core_expr(*x.rhs, why);
          },
          [&](const UnExpr& x) { check_core_expr(*x.operand, why); },
          [&](const CallExpr& x) {
            check_core_expr(*x.callee, why);
            for (const auto& a : x.args) {
              if (a.is_swap()) {
                if (!a.path().accessors.empty())
                  why = "swap argument is not a plain variable";
              } else {
                check_core_expr(*a.expr(), why);
              }
            }
          },
          [&](const ArrayLit& x) {
            for (const auto& el : x.elems) check_core_expr(*el, why);
          },
          [&](const TupleLit& x) {
            for (const auto& el : x.elems) check_core_expr(*el, why);
          },
          [&](const RecordLit& x) {
            for (const auto& f : x.fields) check_core_expr(*f.second, why);
          },
          [&](const ClosureLit& x) { check_core_block(*x.body, why); },
          [&](const auto&) {},
      },
      e.node);
}

}  // namespace

Program desugar_program(const Program& p) {
  Desugarer d(p);
  Program core;
  for (const auto& f : p.functions) {
    core.functions.push_back(
        FnDecl{f.name, f.loc, f.params, d.desugar_scope(f.params, *f.body)});
  }
  if (!d.diags.empty()) throw CompileError(std::move(d.diags));
  return core;
}

bool is_core_form(const Program& p, std::string* why) {
  std::string reason;
  for (const auto& f : p.functions) check_core_block(*f.body, reason);
  if (why) *why = reason;
  return reason.empty();
}

}  // namespace sl

#include "sl/lower.hpp"

#include <algorithm>
#include <cassert>
#include <set>

#include "sl/resolver.hpp"
#include "sl/util.hpp"

namespace sl {

namespace {

// --- syntactic variable collection -------------------------------------

void vars_assigned_in(const Block& b, std::vector<std::string>& order,
                      std::set<std::string>& seen);

void vars_assigned_in_expr(const Expr& e, std::vector<std::string>& order,
                           std::set<std::string>& seen) {
  std::visit(
      overloaded{
          [&](const IndexExpr& x) {
            vars_assigned_in_expr(*x.base, order, seen);
            vars_assigned_in_expr(*x.index, order, seen);
          },
          [&](const FieldExpr& x) {
            vars_assigned_in_expr(*x.base, order, seen);
          },
          [&](const BinExpr& x) {
            vars_assigned_in_expr(*x.lhs, order, seen);
            vars_assigned_in_expr(*x.rhs, order, seen);
          },
          [&](const UnExpr& x) {
            vars_assigned_in_expr(*x.operand, order, seen);
          },
          [&](const CallExpr& x) {
            vars_assigned_in_expr(*x.callee, order, seen);
            for (const auto& a : x.args) {
              if (a.is_swap()) {
                if (seen.insert(a.path().root).second)
                  order.push_back(a.path().root);
              } else {
                vars_assigned_in_expr(*a.expr(), order, seen);
              }
            }
          },
          [&](const ArrayLit& x) {
            for (const auto& el : x.elems)
              vars_assigned_in_expr(*el, order, seen);
          },
          [&](const TupleLit& x) {
            for (const auto& el : x.elems)
              vars_assigned_in_expr(*el, order, seen);
          },
          [&](const RecordLit& x) {
            for (const auto& f : x.fields)
              vars_assigned_in_expr(*f.second, order, seen);
          },
          [&](const ClosureLit&) { /* separate scope */ },
          [&](const auto&) {},
      },
      e.node);
}

void vars_assigned_in_stmt(const Stmt& s, std::vector<std::string>& order,
                           std::set<std::string>& seen) {
  std::visit(
      overloaded{
          [&](const AssignStmt& x) {
            vars_assigned_in_expr(*x.value, order, seen);
            if (seen.insert(x.target.root).second)
              order.push_back(x.target.root);
          },
          [&](const DestructureStmt& x) {
            vars_assigned_in_expr(*x.value, order, seen);
            for (const auto& n : x.names)
              if (seen.insert(n).second) order.push_back(n);
          },
          [&](const CallStmt& x) {
            vars_assigned_in_expr(*x.call, order, seen);
          },
          [&](const WhileStmt& x) {
            vars_assigned_in_expr(*x.cond, order, seen);
            vars_assigned_in(*x.body, order, seen);
          },
          [&](const IfStmt& x) {
            vars_assigned_in_expr(*x.cond, order, seen);
            vars_assigned_in(*x.then_block, order, seen);
            if (x.else_block) vars_assigned_in(*x.else_block, order, seen);
          },
          [&](const ReturnStmt& x) {
            if (x.value) vars_assigned_in_expr(*x.value, order, seen);
          },
          [&](const auto&) {},
      },
      s.node);
}

void vars_assigned_in(const Block& b, std::vector<std::string>& order,
                      std::set<std::string>& seen) {
  for (const auto& sp : b.stmts) vars_assigned_in_stmt(*sp, order, seen);
}

bool block_has_break(const Block& b);

bool stmt_has_break(const Stmt& s) {
  return std::visit(
      overloaded{
          [](const BreakStmt&) { return true; },
          [](const IfStmt& x) {
            return block_has_break(*x.then_block) ||
                   (x.else_block && block_has_break(*x.else_block));
          },
          // nested loops own their breaks
          [](const auto&) { return false; },
      },
      s.node);
}

bool block_has_break(const Block& b) {
  for (const auto& sp : b.stmts)
    if (stmt_has_break(*sp)) return true;
  return false;
}

// --- free variables of closure bodies -----------------------------------

void free_vars_expr(const Expr& e, const std::set<std::string>& locals,
                    std::vector<std::string>& order,
                    std::set<std::string>& seen);

void free_vars_block(const Block& b, const std::set<std::string>& locals,
                     std::vector<std::string>& order,
                     std::set<std::string>& seen) {
  for (const auto& sp : b.stmts) {
    std::visit(
        overloaded{
            [&](const AssignStmt& x) {
              for (const auto& acc : x.target.accessors)
                if (const auto* ix = std::get_if<PathIndex>(&acc))
                  free_vars_expr(*ix->index, locals, order, seen);
              free_vars_expr(*x.value, locals, order, seen);
            },
            [&](const DestructureStmt& x) {
              free_vars_expr(*x.value, locals, order, seen);
            },
            [&](const CallStmt& x) {
              free_vars_expr(*x.call, locals, order, seen);
            },
            [&](const WhileStmt& x) {
              free_vars_expr(*x.cond, locals, order, seen);
              free_vars_block(*x.body, locals, order, seen);
            },
            [&](const IfStmt& x) {
              free_vars_expr(*x.cond, locals, order, seen);
              free_vars_block(*x.then_block, locals, order, seen);
              if (x.else_block)
                free_vars_block(*x.else_block, locals, order, seen);
            },
            [&](const ReturnStmt& x) {
              if (x.value) free_vars_expr(*x.value, locals, order, seen);
            },
            [&](const auto&) {},
        },
        sp->node);
  }
}

void free_vars_expr(const Expr& e, const std::set<std::string>& locals,
                    std::vector<std::string>& order,
                    std::set<std::string>& seen) {
  std::visit(
      overloaded{
          [&](const VarExpr& x) {
            if (!locals.count(x.name) && seen.insert(x.name).second)
              order.push_back(x.name);
          },
          [&](const IndexExpr& x) {
            free_vars_expr(*x.base, locals, order, seen);
            free_vars_expr(*x.index, locals, order, seen);
          },
          [&](const FieldExpr& x) {
            free_vars_expr(*x.base, locals, order, seen);
          },
          [&](const BinExpr& x) {
            free_vars_expr(*x.lhs, locals, order, seen);
            free_vars_expr(*x.rhs, locals, order, seen);
          },
          [&](const UnExpr& x) {
            free_vars_expr(*x.operand, locals, order, seen);
          },
          [&](const CallExpr& x) {
            free_vars_expr(*x.callee, locals, order, seen);
            for (const auto& a : x.args) {
              if (a.is_swap()) {
                if (!locals.count(a.path().root) &&
                    seen.insert(a.path().root).second)
                  order.push_back(a.path().root);
                for (const auto& acc : a.path().accessors)
                  if (const auto* ix = std::get_if<PathIndex>(&acc))
                    free_vars_expr(*ix->index, locals, order, seen);
              } else {
                free_vars_expr(*a.expr(), locals, order, seen);
              }
            }
          },
          [&](const ArrayLit& x) {
            for (const auto& el : x.elems)
              free_vars_expr(*el, locals, order, seen);
          },
          [&](const TupleLit& x) {
            for (const auto& el : x.elems)
              free_vars_expr(*el, locals, order, seen);
          },
          [&](const RecordLit& x) {
            for (const auto& f : x.fields)
              free_vars_expr(*f.second, locals, order, seen);
          },
          [&](const ClosureLit& x) {
            // what is free in the nested closure and not local here is free
            std::set<std::string> inner_locals = assigned_names(*x.body);
            for (const auto& p : x.params) inner_locals.insert(p.name);
            std::vector<std::string> inner_order;
            std::set<std::string> inner_seen;
            free_vars_block(*x.body, inner_locals, inner_order, inner_seen);
            for (const auto& n : inner_order)
              if (!locals.count(n) && seen.insert(n).second)
                order.push_back(n);
          },
          [&](const auto&) {},
      },
      e.node);
}

// --- lowering ------------------------------------------------------------

struct ProgramLowerer {
  const Program& core;
  IRProgram out;
  int lambda_counter = 0;

  explicit ProgramLowerer(const Program& p) : core(p) {}

  void run();
  uint32_t lower_lambda(const std::string& name,
                        const std::vector<std::string>& captures,
                        const std::vector<Param>& params, const Block& body);
};

struct FunctionLowerer {
  ProgramLowerer& prog;
  IRFunction fn;

  std::map<std::string, ValueId> env;
  std::map<std::string, size_t> decl_index;
  BlockId cur = 0;
  bool terminated = false;
  BlockId exit_block = 0;

  struct LoopCtx {
    BlockId header;
    BlockId exit;
    std::vector<std::string> vars;
    bool has_break;
  };
  std::vector<LoopCtx> loops;

  FunctionLowerer(ProgramLowerer& pl, std::string name,
                  const std::vector<std::string>& captures,
                  const std::vector<Param>& params)
      : prog(pl) {
    fn.name = std::move(name);
    fn.n_captures = static_cast<uint32_t>(captures.size());
    fn.n_params = static_cast<uint32_t>(captures.size() + params.size());
    for (const auto& c : captures) {
      ValueId id = fresh(c);
      env[c] = id;
      note_decl(c);
    }
    for (const auto& p : params) {
      ValueId id = fresh(p.name);
      env[p.name] = id;
      note_decl(p.name);
      fn.param_swapped.push_back(p.swapped);
    }
  }

  // --- plumbing ----------------------------------------------------------

  ValueId fresh(const std::string& hint) {
    fn.value_names.push_back(hint);
    return fn.n_values++;
  }

  void note_decl(const std::string& name) {
    decl_index.emplace(name, decl_index.size());
  }

  BlockId new_block(std::vector<ValueId> params) {
    fn.blocks.push_back(IRBlock{std::move(params), {}, JumpTerm{0, {}}});
    return static_cast<BlockId>(fn.blocks.size() - 1);
  }

  void emit(Instr i) {
    assert(!terminated);
    fn.blocks[cur].instrs.push_back(std::move(i));
  }

  ValueId emit1(InstrOp op, const std::string& hint) {
    ValueId id = fresh(hint);
    emit(Instr{{id}, std::move(op)});
    return id;
  }

  void set_term(Terminator t) {
    assert(!terminated);
    fn.blocks[cur].term = std::move(t);
    terminated = true;
  }

  void resume_at(BlockId b) {
    cur = b;
    terminated = false;
  }

  ValueId unit_const() { return emit1(ConstInstr{std::monostate{}}, ""); }

  // Reads a variable; a binding that does not exist yet on this path reads
  // as unit.
  ValueId lookup_or_unit(const std::string& name) {
    auto it = env.find(name);
    if (it != env.end()) return it->second;
    ValueId id = unit_const();
    env[name] = id;
    return id;
  }

  std::vector<std::string> ordered_vars(std::vector<std::string> vars) {
    std::sort(vars.begin(), vars.end(), [&](const auto& a, const auto& b) {
      auto ia = decl_index.find(a);
      auto ib = decl_index.find(b);
      size_t ka = ia == decl_index.end() ? decl_index.size() : ia->second;
      size_t kb = ib == decl_index.end() ? decl_index.size() : ib->second;
      if (ka != kb) return ka < kb;
      return a < b;
    });
    return vars;
  }

  std::vector<ValueId> env_args(const std::vector<std::string>& vars) {
    std::vector<ValueId> args;
    args.reserve(vars.size());
    for (const auto& v : vars) args.push_back(lookup_or_unit(v));
    return args;
  }

  // --- function body -------------------------------------------------------

  void lower_body(const Block& body) {
    std::vector<std::string> order;
    std::set<std::string> seen;
    vars_assigned_in(body, order, seen);
    for (const auto& v : order) note_decl(v);

    new_block({});  // entry, block 0
    std::vector<ValueId> exit_params;
    exit_params.push_back(fresh("ret"));
    std::vector<std::string> swapped_names;
    for (uint32_t p = 0; p < fn.param_swapped.size(); ++p) {
      if (fn.param_swapped[p]) {
        ValueId pid = fn.n_captures + p;
        swapped_names.push_back(fn.value_names[pid]);
        exit_params.push_back(fresh(fn.value_names[pid]));
      }
    }
    exit_block = new_block(exit_params);
    fn.blocks[exit_block].term = ReturnTerm{
        exit_params[0], {exit_params.begin() + 1, exit_params.end()}};
    swapped_names_ = std::move(swapped_names);

    resume_at(0);
    lower_block(body);
    if (!terminated) {
      ValueId u = unit_const();
      std::vector<ValueId> args{u};
      for (const auto& n : swapped_names_) args.push_back(lookup_or_unit(n));
      set_term(JumpTerm{exit_block, std::move(args)});
    }
    prune_and_tidy();
  }

  std::vector<std::string> swapped_names_;

  void lower_block(const Block& b) {
    for (const auto& sp : b.stmts) lower_stmt(*sp);
  }

  void lower_stmt(const Stmt& s) {
    std::visit(
        overloaded{
            [&](const AssignStmt& x) {
              assert(x.target.accessors.empty());
              ValueId id = lower_expr(*x.value, x.target.root);
              env[x.target.root] = id;
            },
            [&](const DestructureStmt& x) {
              ValueId v = lower_expr(*x.value, "");
              ValueId n = emit1(
                  ConstInstr{static_cast<int64_t>(x.names.size())}, "");
              emit(Instr{{fresh("")},
                         CallInstr{CalleeBuiltin{Builtin::CheckLen}, {v, n}, {}}});
              for (size_t i = 0; i < x.names.size(); ++i) {
                ValueId ix =
                    emit1(ConstInstr{static_cast<int64_t>(i)}, "");
                ValueId el = fresh(x.names[i]);
                emit(Instr{{el},
                           CallInstr{CalleeBuiltin{Builtin::Get}, {v, ix}, {}}});
                env[x.names[i]] = el;
              }
            },
            [&](const CallStmt& x) { lower_call(*x.call, ""); },
            [&](const WhileStmt& x) { lower_while(x); },
            [&](const IfStmt& x) { lower_if(x); },
            [&](const ReturnStmt& x) {
              ValueId v = x.value ? lower_expr(*x.value, "") : unit_const();
              std::vector<ValueId> args{v};
              for (const auto& n : swapped_names_)
                args.push_back(lookup_or_unit(n));
              set_term(JumpTerm{exit_block, std::move(args)});
              resume_at(new_block({}));
            },
            [&](const BreakStmt&) {
              const LoopCtx& loop = loops.back();
              set_term(JumpTerm{loop.exit, env_args(loop.vars)});
              resume_at(new_block({}));
            },
            [&](const ContinueStmt&) {
              const LoopCtx& loop = loops.back();
              set_term(JumpTerm{loop.header, env_args(loop.vars)});
              resume_at(new_block({}));
            },
            [&](const CompoundStmt&) { assert(false && "not core form"); },
        },
        s.node);
  }

  void lower_while(const WhileStmt& w) {
    std::vector<std::string> order;
    std::set<std::string> seen;
    vars_assigned_in_expr(*w.cond, order, seen);
    vars_assigned_in(*w.body, order, seen);
    std::vector<std::string> loop_vars = ordered_vars(std::move(order));
    bool has_break = block_has_break(*w.body);

    std::vector<ValueId> entry_args = env_args(loop_vars);
    std::vector<ValueId> header_params;
    header_params.reserve(loop_vars.size());
    for (const auto& v : loop_vars) header_params.push_back(fresh(v));
    BlockId header = new_block(header_params);
    set_term(JumpTerm{header, std::move(entry_args)});

    resume_at(header);
    for (size_t i = 0; i < loop_vars.size(); ++i)
      env[loop_vars[i]] = header_params[i];
    ValueId cond = lower_expr(*w.cond, "");
    auto postcond_env = env;

    BlockId body_b = new_block({});
    std::vector<ValueId> exit_params;
    if (has_break) {
      exit_params.reserve(loop_vars.size());
      for (const auto& v : loop_vars) exit_params.push_back(fresh(v));
    }
    BlockId exit_b = new_block(exit_params);

    std::vector<ValueId> false_args;
    if (has_break) false_args = env_args(loop_vars);
    set_term(BranchTerm{cond, body_b, {}, exit_b, std::move(false_args)});

    loops.push_back(LoopCtx{header, exit_b, loop_vars, has_break});
    resume_at(body_b);
    lower_block(*w.body);
    if (!terminated) set_term(JumpTerm{header, env_args(loop_vars)});
    loops.pop_back();

    resume_at(exit_b);
    env = std::move(postcond_env);
    if (has_break) {
      for (size_t i = 0; i < loop_vars.size(); ++i)
        env[loop_vars[i]] = exit_params[i];
    }
  }

  void lower_if(const IfStmt& s) {
    ValueId cond = lower_expr(*s.cond, "");

    std::vector<std::string> order;
    std::set<std::string> seen;
    vars_assigned_in(*s.then_block, order, seen);
    if (s.else_block) vars_assigned_in(*s.else_block, order, seen);
    std::vector<std::string> join_vars = ordered_vars(std::move(order));

    auto base_env = env;
    std::vector<ValueId> base_args = env_args(join_vars);  // for a skip edge

    BlockId then_b = new_block({});
    BlockId else_b = s.else_block ? new_block({}) : 0;
    std::vector<ValueId> join_params;
    join_params.reserve(join_vars.size());
    for (const auto& v : join_vars) join_params.push_back(fresh(v));
    BlockId join_b = new_block(join_params);

    if (s.else_block) {
      set_term(BranchTerm{cond, then_b, {}, else_b, {}});
    } else {
      set_term(BranchTerm{cond, then_b, {}, join_b, std::move(base_args)});
    }

    resume_at(then_b);
    env = base_env;
    lower_block(*s.then_block);
    if (!terminated) set_term(JumpTerm{join_b, env_args(join_vars)});

    if (s.else_block) {
      resume_at(else_b);
      env = base_env;
      lower_block(*s.else_block);
      if (!terminated) set_term(JumpTerm{join_b, env_args(join_vars)});
    }

    resume_at(join_b);
    env = std::move(base_env);
    for (size_t i = 0; i < join_vars.size(); ++i)
      env[join_vars[i]] = join_params[i];
  }

  // --- expressions ---------------------------------------------------------

  ValueId lower_shortcircuit(const BinExpr& b, const std::string& hint) {
    ValueId lhs = lower_expr(*b.lhs, "");

    std::vector<std::string> order;
    std::set<std::string> seen;
    vars_assigned_in_expr(*b.rhs, order, seen);
    std::vector<std::string> join_vars = ordered_vars(std::move(order));

    std::vector<ValueId> skip_args{lhs};
    for (ValueId id : env_args(join_vars)) skip_args.push_back(id);

    BlockId rhs_b = new_block({});
    std::vector<ValueId> join_params{fresh(hint)};
    for (const auto& v : join_vars) join_params.push_back(fresh(v));
    BlockId join_b = new_block(join_params);

    if (b.op == BinOpKind::And) {
      set_term(BranchTerm{lhs, rhs_b, {}, join_b, std::move(skip_args)});
    } else {
      set_term(BranchTerm{lhs, join_b, std::move(skip_args), rhs_b, {}});
    }

    resume_at(rhs_b);
    ValueId rhs = lower_expr(*b.rhs, "");
    std::vector<ValueId> rhs_args{rhs};
    for (ValueId id : env_args(join_vars)) rhs_args.push_back(id);
    set_term(JumpTerm{join_b, std::move(rhs_args)});

    resume_at(join_b);
    for (size_t i = 0; i < join_vars.size(); ++i)
      env[join_vars[i]] = join_params[i + 1];
    return join_params[0];
  }

  ValueId lower_expr(const Expr& e, const std::string& hint) {
    return std::visit(
        overloaded{
            [&](const IntLit& x) { return emit1(ConstInstr{x.value}, hint); },
            [&](const FloatLit& x) { return emit1(ConstInstr{x.value}, hint); },
            [&](const BoolLit& x) { return emit1(ConstInstr{x.value}, hint); },
            [&](const StrLit& x) { return emit1(ConstInstr{x.value}, hint); },
            [&](const UnitLit&) {
              return emit1(ConstInstr{std::monostate{}}, hint);
            },
            [&](const VarExpr& x) -> ValueId {
              if (decl_index.count(x.name)) return lookup_or_unit(x.name);
              if (auto it = prog.out.fn_index.find(x.name);
                  it != prog.out.fn_index.end()) {
                return emit1(MakeClosureInstr{it->second, {}}, hint);
              }
              return lookup_or_unit(x.name);
            },
            [&](const IndexExpr& x) {
              ValueId base = lower_expr(*x.base, "");
              ValueId ix = lower_expr(*x.index, "");
              ValueId id = fresh(hint);
              emit(Instr{{id},
                         CallInstr{CalleeBuiltin{Builtin::Get}, {base, ix}, {}}});
              return id;
            },
            [&](const FieldExpr& x) {
              ValueId base = lower_expr(*x.base, "");
              ValueId key = emit1(ConstInstr{x.name}, "");
              ValueId id = fresh(hint);
              emit(Instr{{id},
                         CallInstr{CalleeBuiltin{Builtin::Get}, {base, key}, {}}});
              return id;
            },
            [&](const BinExpr& x) -> ValueId {
              if (x.op == BinOpKind::And || x.op == BinOpKind::Or)
                return lower_shortcircuit(x, hint);
              ValueId l = lower_expr(*x.lhs, "");
              ValueId r = lower_expr(*x.rhs, "");
              PrimOp op;
              switch (x.op) {
                case BinOpKind::Add: op = PrimOp::Add; break;
                case BinOpKind::Sub: op = PrimOp::Sub; break;
                case BinOpKind::Mul: op = PrimOp::Mul; break;
                case BinOpKind::Div: op = PrimOp::Div; break;
                case BinOpKind::Lt: op = PrimOp::Lt; break;
                case BinOpKind::Le: op = PrimOp::Le; break;
                case BinOpKind::Gt: op = PrimOp::Gt; break;
                case BinOpKind::Ge: op = PrimOp::Ge; break;
                case BinOpKind::Eq: op = PrimOp::Eq; break;
                default: op = PrimOp::Ne; break;
              }
              return emit1(PrimInstr{op, {l, r}}, hint);
            },
            [&](const UnExpr& x) {
              ValueId v = lower_expr(*x.operand, "");
              return emit1(
                  PrimInstr{x.op == UnOpKind::Neg ? PrimOp::Neg : PrimOp::Not,
                            {v}},
                  hint);
            },
            [&](const CallExpr&) { return lower_call(e, hint); },
            [&](const ArrayLit& x) {
              std::vector<ValueId> elems;
              for (const auto& el : x.elems)
                elems.push_back(lower_expr(*el, ""));
              return emit1(MakeArrayInstr{std::move(elems)}, hint);
            },
            [&](const TupleLit& x) {
              std::vector<ValueId> elems;
              for (const auto& el : x.elems)
                elems.push_back(lower_expr(*el, ""));
              return emit1(MakeTupleInstr{std::move(elems)}, hint);
            },
            [&](const RecordLit& x) {
              MakeRecordInstr rec;
              for (const auto& f : x.fields) {
                rec.keys.push_back(f.first);
                rec.values.push_back(lower_expr(*f.second, ""));
              }
              return emit1(std::move(rec), hint);
            },
            [&](const ClosureLit& x) {
              std::set<std::string> locals = assigned_names(*x.body);
              for (const auto& p : x.params) locals.insert(p.name);
              std::vector<std::string> order;
              std::set<std::string> seen;
              free_vars_block(*x.body, locals, order, seen);
              std::vector<std::string> captures;
              for (const auto& n : order)
                if (decl_index.count(n)) captures.push_back(n);
              std::string name =
                  fn.name + "$" + std::to_string(prog.lambda_counter++);
              std::vector<ValueId> cap_ids;
              cap_ids.reserve(captures.size());
              for (const auto& n : captures)
                cap_ids.push_back(lookup_or_unit(n));
              uint32_t idx =
                  prog.lower_lambda(name, captures, x.params, *x.body);
              return emit1(MakeClosureInstr{idx, std::move(cap_ids)}, hint);
            },
        },
        e.node);
  }

  ValueId lower_call(const Expr& e, const std::string& hint) {
    const auto& c = std::get<CallExpr>(e.node);

    Callee callee = CalleeValue{0};
    bool callee_done = false;
    if (const auto* var = std::get_if<VarExpr>(&c.callee->node)) {
      if (!decl_index.count(var->name)) {
        if (auto it = prog.out.fn_index.find(var->name);
            it != prog.out.fn_index.end()) {
          callee = CalleeFn{it->second};
          callee_done = true;
        } else if (auto b = builtin_by_name(var->name)) {
          callee = CalleeBuiltin{*b};
          callee_done = true;
        }
      }
    }
    if (!callee_done) callee = CalleeValue{lower_expr(*c.callee, "")};

    std::vector<ValueId> args;
    std::vector<uint32_t> swap_positions;
    std::vector<std::string> swap_vars;
    for (size_t i = 0; i < c.args.size(); ++i) {
      const Arg& a = c.args[i];
      if (a.is_swap()) {
        assert(a.path().accessors.empty());
        args.push_back(lookup_or_unit(a.path().root));
        swap_positions.push_back(static_cast<uint32_t>(i));
        swap_vars.push_back(a.path().root);
      } else {
        args.push_back(lower_expr(*a.expr(), ""));
      }
    }

    std::vector<ValueId> dests{fresh(hint)};
    for (const auto& v : swap_vars) dests.push_back(fresh(v));
    emit(Instr{dests, CallInstr{callee, std::move(args), swap_positions}});
    for (size_t k = 0; k < swap_vars.size(); ++k)
      env[swap_vars[k]] = dests[k + 1];
    return dests[0];
  }

  // --- cleanup -------------------------------------------------------------

  // Block parameters with no uses get dropped together with the matching
  // edge arguments. Besides keeping dumps close to the source, this stops a
  // loop from carrying dead values whose stale references would defeat the
  // uniqueness reuse of the next iteration.
  void prune_dead_params() {
    while (true) {
      std::vector<uint32_t> uses(fn.n_values, 0);
      auto use = [&](ValueId id) { ++uses[id]; };
      for (const auto& b : fn.blocks) {
        for (const auto& ins : b.instrs) {
          std::visit(overloaded{
                         [&](const ConstInstr&) {},
                         [&](const PrimInstr& x) {
                           for (ValueId a : x.args) use(a);
                         },
                         [&](const CallInstr& x) {
                           if (const auto* v = std::get_if<CalleeValue>(&x.callee))
                             use(v->id);
                           for (ValueId a : x.args) use(a);
                         },
                         [&](const MakeArrayInstr& x) {
                           for (ValueId a : x.elems) use(a);
                         },
                         [&](const MakeTupleInstr& x) {
                           for (ValueId a : x.elems) use(a);
                         },
                         [&](const MakeRecordInstr& x) {
                           for (ValueId a : x.values) use(a);
                         },
                         [&](const MakeClosureInstr& x) {
                           for (ValueId a : x.captures) use(a);
                         },
                     },
                     ins.op);
        }
        std::visit(overloaded{
                       [&](const JumpTerm& t) {
                         for (ValueId a : t.args) use(a);
                       },
                       [&](const BranchTerm& t) {
                         use(t.cond);
                         for (ValueId a : t.true_args) use(a);
                         for (ValueId a : t.false_args) use(a);
                       },
                       [&](const ReturnTerm& t) {
                         use(t.value);
                         for (ValueId a : t.swapped) use(a);
                       },
                   },
                   b.term);
      }

      // positions to drop, per block
      std::vector<std::vector<char>> drop(fn.blocks.size());
      bool any = false;
      for (size_t b = 0; b < fn.blocks.size(); ++b) {
        const auto& params = fn.blocks[b].params;
        drop[b].assign(params.size(), 0);
        for (size_t i = 0; i < params.size(); ++i) {
          if (uses[params[i]] == 0) {
            drop[b][i] = 1;
            any = true;
          }
        }
      }
      if (!any) return;

      auto filter_args = [&](BlockId target, std::vector<ValueId>& args) {
        if (args.size() != drop[target].size()) return;
        std::vector<ValueId> kept;
        kept.reserve(args.size());
        for (size_t i = 0; i < args.size(); ++i)
          if (!drop[target][i]) kept.push_back(args[i]);
        args = std::move(kept);
      };
      for (auto& b : fn.blocks) {
        std::visit(overloaded{
                       [&](JumpTerm& t) { filter_args(t.target, t.args); },
                       [&](BranchTerm& t) {
                         filter_args(t.true_target, t.true_args);
                         filter_args(t.false_target, t.false_args);
                       },
                       [&](ReturnTerm&) {},
                   },
                   b.term);
      }
      for (size_t b = 0; b < fn.blocks.size(); ++b) {
        std::vector<ValueId> kept;
        for (size_t i = 0; i < fn.blocks[b].params.size(); ++i)
          if (!drop[b][i]) kept.push_back(fn.blocks[b].params[i]);
        fn.blocks[b].params = std::move(kept);
      }
    }
  }

  void prune_and_tidy() {
    // drop unreachable blocks, renumbering in visit preorder
    std::vector<BlockId> order;
    std::vector<uint32_t> remap(fn.blocks.size(), UINT32_MAX);
    std::vector<BlockId> stack{0};
    while (!stack.empty()) {
      BlockId b = stack.back();
      stack.pop_back();
      if (remap[b] != UINT32_MAX) continue;
      remap[b] = static_cast<uint32_t>(order.size());
      order.push_back(b);
      std::visit(overloaded{
                     [&](const JumpTerm& t) { stack.push_back(t.target); },
                     [&](const BranchTerm& t) {
                       stack.push_back(t.false_target);
                       stack.push_back(t.true_target);
                     },
                     [&](const ReturnTerm&) {},
                 },
                 fn.blocks[b].term);
    }
    std::vector<IRBlock> blocks;
    blocks.reserve(order.size());
    for (BlockId b : order) blocks.push_back(std::move(fn.blocks[b]));
    for (auto& b : blocks) {
      std::visit(overloaded{
                     [&](JumpTerm& t) { t.target = remap[t.target]; },
                     [&](BranchTerm& t) {
                       t.true_target = remap[t.true_target];
                       t.false_target = remap[t.false_target];
                     },
                     [&](ReturnTerm&) {},
                 },
                 b.term);
    }
    fn.blocks = std::move(blocks);

    prune_dead_params();

    // cosmetic: a function whose exit block has exactly one jump predecessor
    // returns directly from that predecessor
    BlockId ret_block = UINT32_MAX;
    for (BlockId b = 0; b < fn.blocks.size(); ++b)
      if (std::holds_alternative<ReturnTerm>(fn.blocks[b].term)) ret_block = b;
    if (ret_block == UINT32_MAX || ret_block == 0) return;

    std::vector<BlockId> jump_preds;
    bool branch_pred = false;
    for (BlockId b = 0; b < fn.blocks.size(); ++b) {
      std::visit(overloaded{
                     [&](const JumpTerm& t) {
                       if (t.target == ret_block) jump_preds.push_back(b);
                     },
                     [&](const BranchTerm& t) {
                       if (t.true_target == ret_block ||
                           t.false_target == ret_block)
                         branch_pred = true;
                     },
                     [&](const ReturnTerm&) {},
                 },
                 fn.blocks[b].term);
    }
    if (branch_pred || jump_preds.size() != 1) return;

    const auto& args = std::get<JumpTerm>(fn.blocks[jump_preds[0]].term).args;
    const auto& params = fn.blocks[ret_block].params;
    const auto& ret = std::get<ReturnTerm>(fn.blocks[ret_block].term);
    // map exit params to the jump arguments
    std::map<ValueId, ValueId> sub;
    for (size_t i = 0; i < params.size(); ++i) sub[params[i]] = args[i];
    auto subst = [&](ValueId id) {
      auto it = sub.find(id);
      return it == sub.end() ? id : it->second;
    };
    ReturnTerm folded{subst(ret.value), {}};
    for (ValueId s : ret.swapped) folded.swapped.push_back(subst(s));
    if (!fn.blocks[ret_block].instrs.empty()) return;  // not a bare exit
    fn.blocks[jump_preds[0]].term = folded;
    fn.blocks.erase(fn.blocks.begin() + ret_block);
    for (auto& b : fn.blocks) {
      std::visit(overloaded{
                     [&](JumpTerm& t) {
                       if (t.target > ret_block) --t.target;
                     },
                     [&](BranchTerm& t) {
                       if (t.true_target > ret_block) --t.true_target;
                       if (t.false_target > ret_block) --t.false_target;
                     },
                     [&](ReturnTerm&) {},
                 },
                 b.term);
    }
  }
};

void ProgramLowerer::run() {
  for (uint32_t i = 0; i < core.functions.size(); ++i) {
    out.fn_index.emplace(core.functions[i].name, i);
  }
  out.functions.resize(core.functions.size());
  for (uint32_t i = 0; i < core.functions.size(); ++i) {
    const FnDecl& f = core.functions[i];
    FunctionLowerer fl(*this, f.name, {}, f.params);
    fl.lower_body(*f.body);
    out.functions[i] = std::move(fl.fn);
  }
}

uint32_t ProgramLowerer::lower_lambda(const std::string& name,
                                      const std::vector<std::string>& captures,
                                      const std::vector<Param>& params,
                                      const Block& body) {
  uint32_t idx = static_cast<uint32_t>(out.functions.size());
  out.functions.emplace_back();
  out.fn_index.emplace(name, idx);
  FunctionLowerer fl(*this, name, captures, params);
  fl.lower_body(body);
  out.functions[idx] = std::move(fl.fn);
  return idx;
}

}  // namespace

IRProgram lower_program(const Program& core) {
  ProgramLowerer pl(core);
  pl.run();
  return std::move(pl.out);
}

const char* prim_name(PrimOp op) {
  switch (op) {
    case PrimOp::Add: return "add";
    case PrimOp::Sub: return "sub";
    case PrimOp::Mul: return "mul";
    case PrimOp::Div: return "div";
    case PrimOp::Lt: return "lt";
    case PrimOp::Le: return "le";
    case PrimOp::Gt: return "gt";
    case PrimOp::Ge: return "ge";
    case PrimOp::Eq: return "eq";
    case PrimOp::Ne: return "ne";
    case PrimOp::Neg: return "neg";
    case PrimOp::Not: return "not";
  }
  return "?";
}

}  // namespace sl

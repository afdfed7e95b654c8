#include "sl/ir_validate.hpp"

#include <string>

#include "sl/util.hpp"

namespace sl {

namespace {

struct Validator {
  const IRProgram& prog;
  std::vector<Diag> diags;

  void report(DiagKind k, const std::string& ctx, std::string msg) {
    diags.push_back(Diag{k, {}, std::move(msg), ctx});
  }

  void check_function(const IRFunction& fn) {
    std::string ctx = "fn " + fn.name;
    if (fn.blocks.empty()) {
      report(DiagKind::BadEntryBlock, ctx, "function has no blocks");
      return;
    }
    if (!fn.blocks[0].params.empty()) {
      report(DiagKind::BadEntryBlock, ctx,
             "entry block takes parameters beyond the function's own");
    }
    if (fn.n_params > fn.n_values) {
      report(DiagKind::MalformedInstr, ctx, "parameter count exceeds value count");
      return;
    }

    // definition sites: 0 = undefined, otherwise 1 + count
    std::vector<uint32_t> def_count(fn.n_values, 0);
    for (ValueId i = 0; i < fn.n_params; ++i) def_count[i]++;

    auto def = [&](ValueId id, const std::string& where) {
      if (id >= fn.n_values) {
        report(DiagKind::MalformedInstr, where,
               "value id " + std::to_string(id) + " out of range");
        return;
      }
      if (++def_count[id] > 1) {
        report(DiagKind::MultipleAssignment, where,
               "value " + std::to_string(id) + " is assigned more than once");
      }
    };

    for (size_t b = 0; b < fn.blocks.size(); ++b) {
      std::string where = ctx + " bb" + std::to_string(b);
      for (ValueId p : fn.blocks[b].params) def(p, where);
      for (const auto& ins : fn.blocks[b].instrs) {
        for (ValueId d : ins.dests) def(d, where);
        check_instr_shape(fn, ins, where);
      }
      check_terminator(fn, fn.blocks[b], where);
    }

    check_defs_reach_uses(fn, ctx);
  }

  void check_instr_shape(const IRFunction&, const Instr& ins,
                         const std::string& where) {
    std::visit(
        overloaded{
            [&](const ConstInstr&) {
              if (ins.dests.size() != 1)
                report(DiagKind::MalformedInstr, where, "const needs one dest");
            },
            [&](const PrimInstr& p) {
              size_t want =
                  (p.op == PrimOp::Neg || p.op == PrimOp::Not) ? 1 : 2;
              if (p.args.size() != want)
                report(DiagKind::MalformedInstr, where,
                       std::string("prim ") + prim_name(p.op) +
                           " has wrong operand count");
              if (ins.dests.size() != 1)
                report(DiagKind::MalformedInstr, where, "prim needs one dest");
            },
            [&](const CallInstr& c) {
              if (ins.dests.size() != 1 + c.swap_positions.size()) {
                report(DiagKind::MalformedInstr, where,
                       "call needs one dest per swapped argument plus the result");
              }
              uint32_t prev = 0;
              bool first = true;
              for (uint32_t pos : c.swap_positions) {
                if (pos >= c.args.size() || (!first && pos <= prev)) {
                  report(DiagKind::MalformedInstr, where,
                         "swap positions must be increasing argument indexes");
                  break;
                }
                prev = pos;
                first = false;
              }
              if (const auto* f = std::get_if<CalleeFn>(&c.callee)) {
                if (f->index >= prog.functions.size())
                  report(DiagKind::UnknownCallee, where,
                         "call targets unknown function index " +
                             std::to_string(f->index));
              }
            },
            [&](const MakeRecordInstr& r) {
              if (r.keys.size() != r.values.size())
                report(DiagKind::MalformedInstr, where,
                       "record keys and values differ in count");
              if (ins.dests.size() != 1)
                report(DiagKind::MalformedInstr, where, "record needs one dest");
            },
            [&](const MakeClosureInstr& m) {
              if (m.fn_index >= prog.functions.size()) {
                report(DiagKind::UnknownCallee, where,
                       "closure targets unknown function index " +
                           std::to_string(m.fn_index));
              } else if (m.captures.size() !=
                         prog.functions[m.fn_index].n_captures) {
                report(DiagKind::MalformedInstr, where,
                       "closure capture count does not match the target");
              }
              if (ins.dests.size() != 1)
                report(DiagKind::MalformedInstr, where, "closure needs one dest");
            },
            [&](const auto&) {
              if (ins.dests.size() != 1)
                report(DiagKind::MalformedInstr, where,
                       "instruction needs exactly one dest");
            },
        },
        ins.op);
  }

  void check_terminator(const IRFunction& fn, const IRBlock& blk,
                        const std::string& where) {
    auto check_edge = [&](BlockId target, const std::vector<ValueId>& args) {
      if (target >= fn.blocks.size()) {
        report(DiagKind::MalformedInstr, where,
               "terminator targets unknown block " + std::to_string(target));
        return;
      }
      if (args.size() != fn.blocks[target].params.size()) {
        report(DiagKind::TerminatorArityMismatch, where,
               "edge to bb" + std::to_string(target) + " passes " +
                   std::to_string(args.size()) + " argument(s), block takes " +
                   std::to_string(fn.blocks[target].params.size()));
      }
    };
    std::visit(
        overloaded{
            [&](const JumpTerm& t) { check_edge(t.target, t.args); },
            [&](const BranchTerm& t) {
              check_edge(t.true_target, t.true_args);
              check_edge(t.false_target, t.false_args);
            },
            [&](const ReturnTerm& t) {
              size_t swapped = 0;
              for (bool s : fn.param_swapped) swapped += s ? 1 : 0;
              if (t.swapped.size() != swapped) {
                report(DiagKind::TerminatorArityMismatch, where,
                       "return carries " + std::to_string(t.swapped.size()) +
                           " swapped value(s), function has " +
                           std::to_string(swapped) + " swapped parameter(s)");
              }
            },
        },
        blk.term);
  }

  // Forward must-reach analysis: a use is valid only when its definition is
  // guaranteed on every path from the entry.
  void check_defs_reach_uses(const IRFunction& fn, const std::string& ctx) {
    size_t nb = fn.blocks.size();
    size_t nv = fn.n_values;
    // in[b][v] = defined at entry of b on all paths
    std::vector<std::vector<char>> in(nb, std::vector<char>(nv, 1));
    in[0].assign(nv, 0);
    for (ValueId i = 0; i < fn.n_params && i < nv; ++i) in[0][i] = 1;

    auto out_of = [&](size_t b, std::vector<char>& out) {
      out = in[b];
      for (ValueId p : fn.blocks[b].params)
        if (p < nv) out[p] = 1;
      for (const auto& ins : fn.blocks[b].instrs)
        for (ValueId d : ins.dests)
          if (d < nv) out[d] = 1;
    };

    bool changed = true;
    while (changed) {
      changed = false;
      for (size_t b = 0; b < nb; ++b) {
        std::vector<char> out;
        out_of(b, out);
        auto meet = [&](BlockId target) {
          if (target >= nb) return;
          auto& t = in[target];
          for (size_t v = 0; v < nv; ++v) {
            char nv2 = t[v] & out[v];
            if (nv2 != t[v]) {
              t[v] = nv2;
              changed = true;
            }
          }
        };
        std::visit(overloaded{
                       [&](const JumpTerm& t) { meet(t.target); },
                       [&](const BranchTerm& t) {
                         meet(t.true_target);
                         meet(t.false_target);
                       },
                       [&](const ReturnTerm&) {},
                   },
                   fn.blocks[b].term);
      }
    }

    for (size_t b = 0; b < nb; ++b) {
      std::string where = ctx + " bb" + std::to_string(b);
      std::vector<char> live = in[b];
      for (ValueId p : fn.blocks[b].params)
        if (p < nv) live[p] = 1;
      auto use = [&](ValueId id) {
        if (id >= nv) {
          report(DiagKind::MalformedInstr, where,
                 "operand id " + std::to_string(id) + " out of range");
          return;
        }
        if (!live[id]) {
          report(DiagKind::UseBeforeDef, where,
                 "value " + std::to_string(id) +
                     " is not defined on every path to its use");
        }
      };
      for (const auto& ins : fn.blocks[b].instrs) {
        std::visit(overloaded{
                       [&](const ConstInstr&) {},
                       [&](const PrimInstr& p) {
                         for (ValueId a : p.args) use(a);
                       },
                       [&](const CallInstr& c) {
                         if (const auto* v = std::get_if<CalleeValue>(&c.callee))
                           use(v->id);
                         for (ValueId a : c.args) use(a);
                       },
                       [&](const MakeArrayInstr& m) {
                         for (ValueId a : m.elems) use(a);
                       },
                       [&](const MakeTupleInstr& m) {
                         for (ValueId a : m.elems) use(a);
                       },
                       [&](const MakeRecordInstr& m) {
                         for (ValueId a : m.values) use(a);
                       },
                       [&](const MakeClosureInstr& m) {
                         for (ValueId a : m.captures) use(a);
                       },
                   },
                   ins.op);
        for (ValueId d : ins.dests)
          if (d < nv) live[d] = 1;
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
                 fn.blocks[b].term);
    }
  }
};

}  // namespace

std::vector<Diag> validate_ir(const IRProgram& p) {
  Validator v{p, {}};
  for (const auto& fn : p.functions) v.check_function(fn);
  return std::move(v.diags);
}

}  // namespace sl

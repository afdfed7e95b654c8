#include "sl/ir_print.hpp"

#include <set>

#include "sl/number_format.hpp"
#include "sl/util.hpp"

namespace sl {

namespace {

constexpr uint32_t kSigBlock = UINT32_MAX;  // pseudo-block for the signature

struct Namer {
  const IRFunction& fn;
  std::vector<std::string> names;                 // per id
  std::vector<std::set<uint32_t>> appearances;    // per id: blocks seen in

  explicit Namer(const IRFunction& f)
      : fn(f), names(f.n_values), appearances(f.n_values) {}

  void appear(ValueId id, uint32_t block) {
    if (id < appearances.size()) appearances[id].insert(block);
  }

  void scan() {
    for (ValueId p = 0; p < fn.n_params; ++p) appear(p, kSigBlock);
    for (uint32_t b = 0; b < fn.blocks.size(); ++b) {
      const auto& blk = fn.blocks[b];
      for (ValueId p : blk.params) appear(p, b);
      for (const auto& ins : blk.instrs) {
        for (ValueId d : ins.dests) appear(d, b);
        std::visit(overloaded{
                       [&](const ConstInstr&) {},
                       [&](const PrimInstr& x) {
                         for (ValueId a : x.args) appear(a, b);
                       },
                       [&](const CallInstr& x) {
                         if (const auto* v = std::get_if<CalleeValue>(&x.callee))
                           appear(v->id, b);
                         for (ValueId a : x.args) appear(a, b);
                       },
                       [&](const MakeArrayInstr& x) {
                         for (ValueId a : x.elems) appear(a, b);
                       },
                       [&](const MakeTupleInstr& x) {
                         for (ValueId a : x.elems) appear(a, b);
                       },
                       [&](const MakeRecordInstr& x) {
                         for (ValueId a : x.values) appear(a, b);
                       },
                       [&](const MakeClosureInstr& x) {
                         for (ValueId a : x.captures) appear(a, b);
                       },
                   },
                   ins.op);
      }
      std::visit(overloaded{
                     [&](const JumpTerm& t) {
                       for (ValueId a : t.args) appear(a, b);
                     },
                     [&](const BranchTerm& t) {
                       appear(t.cond, b);
                       for (ValueId a : t.true_args) appear(a, b);
                       for (ValueId a : t.false_args) appear(a, b);
                     },
                     [&](const ReturnTerm& t) {
                       appear(t.value, b);
                       for (ValueId a : t.swapped) appear(a, b);
                     },
                 },
                 fn.blocks[b].term);
    }
  }

  void assign() {
    scan();
    // name -> appearance sets already claimed under that name
    std::map<std::string, std::vector<const std::set<uint32_t>*>> claimed;
    int temp_counter = 0;
    for (ValueId id = 0; id < fn.n_values; ++id) {
      std::string base = id < fn.value_names.size() ? fn.value_names[id] : "";
      if (base.empty()) base = "t" + std::to_string(temp_counter++);
      std::string candidate = base;
      int round = 0;
      while (true) {
        auto it = claimed.find(candidate);
        bool ok = true;
        if (it != claimed.end()) {
          for (const auto* other : it->second) {
            for (uint32_t b : appearances[id]) {
              if (other->count(b)) {
                ok = false;
                break;
              }
            }
            if (!ok) break;
          }
        }
        if (ok) break;
        ++round;
        candidate = round == 1 ? base + "_" : base + "_" + std::to_string(round);
      }
      names[id] = candidate;
      claimed[candidate].push_back(&appearances[id]);
    }
  }

  const std::string& operator()(ValueId id) const { return names[id]; }
};

std::string literal_text(const IRLiteral& lit) {
  return std::visit(
      overloaded{
          [](std::monostate) { return std::string("()"); },
          [](int64_t v) { return std::to_string(v); },
          [](double v) { return format_float(v); },
          [](bool v) { return std::string(v ? "true" : "false"); },
          [](const std::string& s) { return escape_text(s); },
      },
      lit);
}

struct FnPrinter {
  const IRProgram& prog;
  const IRFunction& fn;
  Namer names;
  std::string out;

  FnPrinter(const IRProgram& p, const IRFunction& f)
      : prog(p), fn(f), names(f) {
    names.assign();
  }

  std::string arg_list(const std::vector<ValueId>& args) {
    std::string s;
    for (size_t i = 0; i < args.size(); ++i) {
      if (i) s += ", ";
      s += names(args[i]);
    }
    return s;
  }

  std::string edge_text(BlockId b, const std::vector<ValueId>& args) {
    std::string s = "bb" + std::to_string(b);
    if (!args.empty()) s += "(" + arg_list(args) + ")";
    return s;
  }

  std::string callee_text(const Callee& c) {
    return std::visit(
        overloaded{
            [&](const CalleeBuiltin& b) {
              return std::string(builtin_sig(b.b).name);
            },
            [&](const CalleeFn& f) { return prog.functions[f.index].name; },
            [&](const CalleeValue& v) { return names(v.id); },
        },
        c);
  }

  void print() {
    out += "fn " + fn.name;
    if (fn.n_captures > 0) {
      out += "[";
      for (uint32_t i = 0; i < fn.n_captures; ++i) {
        if (i) out += ", ";
        out += names(i);
      }
      out += "]";
    }
    out += "(";
    for (uint32_t i = fn.n_captures; i < fn.n_params; ++i) {
      if (i > fn.n_captures) out += ", ";
      if (fn.param_swapped[i - fn.n_captures]) out += "&";
      out += names(i);
    }
    out += ") {\n";
    for (uint32_t b = 0; b < fn.blocks.size(); ++b) print_block(b);
    out += "}\n";
  }

  void print_block(uint32_t b) {
    const auto& blk = fn.blocks[b];
    out += "bb" + std::to_string(b);
    if (!blk.params.empty()) out += "(" + arg_list(blk.params) + ")";
    out += ":\n";
    for (const auto& ins : blk.instrs) print_instr(ins);
    print_term(blk.term);
  }

  void print_instr(const Instr& ins) {
    std::string lhs;
    for (size_t i = 0; i < ins.dests.size(); ++i) {
      if (i) lhs += ", ";
      lhs += names(ins.dests[i]);
    }
    std::string rhs = std::visit(
        overloaded{
            [&](const ConstInstr& x) { return "const " + literal_text(x.value); },
            [&](const PrimInstr& x) {
              std::string s = prim_name(x.op);
              s += " " + arg_list(x.args);
              return s;
            },
            [&](const CallInstr& x) {
              std::string s = "call " + callee_text(x.callee) + "(";
              size_t sw = 0;
              for (size_t i = 0; i < x.args.size(); ++i) {
                if (i) s += ", ";
                if (sw < x.swap_positions.size() && x.swap_positions[sw] == i) {
                  s += "&";
                  ++sw;
                }
                s += names(x.args[i]);
              }
              s += ")";
              return s;
            },
            [&](const MakeArrayInstr& x) {
              return x.elems.empty() ? std::string("array")
                                     : "array " + arg_list(x.elems);
            },
            [&](const MakeTupleInstr& x) {
              return x.elems.empty() ? std::string("tuple")
                                     : "tuple " + arg_list(x.elems);
            },
            [&](const MakeRecordInstr& x) {
              std::string s = "record";
              for (size_t i = 0; i < x.keys.size(); ++i) {
                s += i ? ", " : " ";
                s += x.keys[i] + ": " + names(x.values[i]);
              }
              return s;
            },
            [&](const MakeClosureInstr& x) {
              std::string s = "closure " + prog.functions[x.fn_index].name;
              s += "(" + arg_list(x.captures) + ")";
              return s;
            },
        },
        ins.op);
    out += "  " + lhs + " = " + rhs + "\n";
  }

  void print_term(const Terminator& t) {
    std::visit(overloaded{
                   [&](const JumpTerm& x) {
                     out += "  jump " + edge_text(x.target, x.args) + "\n";
                   },
                   [&](const BranchTerm& x) {
                     out += "  br " + names(x.cond) + ", " +
                            edge_text(x.true_target, x.true_args) + ", " +
                            edge_text(x.false_target, x.false_args) + "\n";
                   },
                   [&](const ReturnTerm& x) {
                     out += "  return " + names(x.value);
                     if (!x.swapped.empty())
                       out += " [" + arg_list(x.swapped) + "]";
                     out += "\n";
                   },
               },
               t);
  }
};

}  // namespace

std::string print_ir(const IRProgram& p, const IRFunction& fn) {
  FnPrinter pr(p, fn);
  pr.print();
  return std::move(pr.out);
}

std::string print_ir(const IRProgram& p) {
  std::string out;
  for (size_t i = 0; i < p.functions.size(); ++i) {
    if (i) out += "\n";
    out += print_ir(p, p.functions[i]);
  }
  return out;
}

}  // namespace sl

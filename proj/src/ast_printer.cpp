#include "sl/ast_printer.hpp"

#include <charconv>

#include "sl/util.hpp"

namespace sl {

namespace {

std::string escape_string(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      default: out += c;
    }
  }
  out += '"';
  return out;
}

std::string float_text(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  std::string s(buf, end);
  if (s.find('.') == std::string::npos && s.find('e') == std::string::npos &&
      s.find("inf") == std::string::npos && s.find("nan") == std::string::npos) {
    s += ".0";
  }
  return s;
}

int precedence(BinOpKind op) {
  switch (op) {
    case BinOpKind::Or: return 1;
    case BinOpKind::And: return 2;
    case BinOpKind::Lt:
    case BinOpKind::Le:
    case BinOpKind::Gt:
    case BinOpKind::Ge:
    case BinOpKind::Eq:
    case BinOpKind::Ne: return 3;
    case BinOpKind::Add:
    case BinOpKind::Sub: return 4;
    case BinOpKind::Mul:
    case BinOpKind::Div: return 5;
  }
  return 0;
}

const char* op_text(BinOpKind op) {
  switch (op) {
    case BinOpKind::Add: return "+";
    case BinOpKind::Sub: return "-";
    case BinOpKind::Mul: return "*";
    case BinOpKind::Div: return "/";
    case BinOpKind::Lt: return "<";
    case BinOpKind::Le: return "<=";
    case BinOpKind::Gt: return ">";
    case BinOpKind::Ge: return ">=";
    case BinOpKind::Eq: return "==";
    case BinOpKind::Ne: return "!=";
    case BinOpKind::And: return "and";
    case BinOpKind::Or: return "or";
  }
  return "?";
}

constexpr int kUnaryPrec = 6;
constexpr int kPostfixPrec = 7;

struct Printer {
  std::string out;
  int indent = 0;

  void line(const std::string& s) {
    out.append(static_cast<size_t>(indent) * 2, ' ');
    out += s;
    out += '\n';
  }

  static std::string params_text(const std::vector<Param>& params) {
    std::string s = "(";
    for (size_t i = 0; i < params.size(); ++i) {
      if (i) s += ", ";
      if (params[i].swapped) s += '&';
      s += params[i].name;
    }
    s += ')';
    return s;
  }

  std::string path_text(const Path& p) {
    std::string s = p.root;
    for (const auto& acc : p.accessors) {
      if (const auto* f = std::get_if<PathField>(&acc)) {
        s += '.';
        s += f->name;
      } else {
        s += '[';
        s += expr_text(*std::get<PathIndex>(acc).index, 0);
        s += ']';
      }
    }
    return s;
  }

  // min_prec: parenthesize when this node binds looser than the context.
  std::string expr_text(const Expr& e, int min_prec) {
    return std::visit(
        overloaded{
            [&](const IntLit& x) { return std::to_string(x.value); },
            [&](const FloatLit& x) { return float_text(x.value); },
            [&](const BoolLit& x) {
              return std::string(x.value ? "true" : "false");
            },
            [&](const StrLit& x) { return escape_string(x.value); },
            [&](const UnitLit&) { return std::string("()"); },
            [&](const VarExpr& x) { return x.name; },
            [&](const IndexExpr& x) {
              return expr_text(*x.base, kPostfixPrec) + "[" +
                     expr_text(*x.index, 0) + "]";
            },
            [&](const FieldExpr& x) {
              return expr_text(*x.base, kPostfixPrec) + "." + x.name;
            },
            [&](const BinExpr& x) {
              int prec = precedence(x.op);
              std::string s = expr_text(*x.lhs, prec) + " " + op_text(x.op) +
                              " " + expr_text(*x.rhs, prec + 1);
              if (prec < min_prec) s = "(" + s + ")";
              return s;
            },
            [&](const UnExpr& x) {
              std::string s =
                  (x.op == UnOpKind::Neg ? std::string("-") : std::string("not ")) +
                  expr_text(*x.operand, kUnaryPrec);
              if (kUnaryPrec < min_prec) s = "(" + s + ")";
              return s;
            },
            [&](const CallExpr& x) {
              std::string s = expr_text(*x.callee, kPostfixPrec) + "(";
              for (size_t i = 0; i < x.args.size(); ++i) {
                if (i) s += ", ";
                if (x.args[i].is_swap()) {
                  s += '&';
                  s += path_text(x.args[i].path());
                } else {
                  s += expr_text(*x.args[i].expr(), 0);
                }
              }
              s += ')';
              return s;
            },
            [&](const ArrayLit& x) {
              std::string s = "[";
              for (size_t i = 0; i < x.elems.size(); ++i) {
                if (i) s += ", ";
                s += expr_text(*x.elems[i], 0);
              }
              s += ']';
              return s;
            },
            [&](const TupleLit& x) {
              std::string s = "(";
              for (size_t i = 0; i < x.elems.size(); ++i) {
                if (i) s += ", ";
                s += expr_text(*x.elems[i], 0);
              }
              if (x.elems.size() == 1) s += ',';
              s += ')';
              return s;
            },
            [&](const RecordLit& x) {
              std::string s = "{";
              for (size_t i = 0; i < x.fields.size(); ++i) {
                if (i) s += ", ";
                s += x.fields[i].first;
                s += ": ";
                s += expr_text(*x.fields[i].second, 0);
              }
              s += '}';
              return s;
            },
            [&](const ClosureLit& x) {
              // closures print with their body inline
              std::string s = "fn" + params_text(x.params) + " {\n";
              Printer body;
              body.indent = indent + 1;
              for (const auto& st : x.body->stmts) body.print_stmt(*st);
              s += body.out;
              s.append(static_cast<size_t>(indent) * 2, ' ');
              s += '}';
              return s;
            },
        },
        e.node);
  }

  void print_block(const Block& b) {
    ++indent;
    for (const auto& st : b.stmts) print_stmt(*st);
    --indent;
  }

  void print_stmt(const Stmt& s) {
    std::visit(
        overloaded{
            [&](const AssignStmt& x) {
              line(path_text(x.target) + " = " + expr_text(*x.value, 0));
            },
            [&](const DestructureStmt& x) {
              std::string t = "[";
              for (size_t i = 0; i < x.names.size(); ++i) {
                if (i) t += ", ";
                t += x.names[i];
              }
              t += "] = " + expr_text(*x.value, 0);
              line(t);
            },
            [&](const CompoundStmt& x) {
              const char* op = x.op == CompoundOp::Add   ? "+="
                               : x.op == CompoundOp::Sub ? "-="
                               : x.op == CompoundOp::Mul ? "*="
                                                         : "/=";
              line(path_text(x.target) + " " + op + " " +
                   expr_text(*x.value, 0));
            },
            [&](const CallStmt& x) { line(expr_text(*x.call, 0)); },
            [&](const WhileStmt& x) {
              line("while " + expr_text(*x.cond, 0) + " {");
              print_block(*x.body);
              line("}");
            },
            [&](const IfStmt& x) { print_if(x, "if "); },
            [&](const ReturnStmt& x) {
              line(x.value ? "return " + expr_text(*x.value, 0)
                           : std::string("return"));
            },
            [&](const BreakStmt&) { line("break"); },
            [&](const ContinueStmt&) { line("continue"); },
        },
        s.node);
  }

  void print_if(const IfStmt& x, const std::string& head) {
    line(head + expr_text(*x.cond, 0) + " {");
    print_block(*x.then_block);
    if (x.else_block) {
      print_else(*x.else_block);
    } else {
      line("}");
    }
  }

  // `else if` chains print flat
  void print_else(const Block& else_block) {
    if (else_block.stmts.size() == 1) {
      if (const auto* nested = std::get_if<IfStmt>(&else_block.stmts[0]->node)) {
        line("} else if " + expr_text(*nested->cond, 0) + " {");
        print_block(*nested->then_block);
        if (nested->else_block) {
          print_else(*nested->else_block);
        } else {
          line("}");
        }
        return;
      }
    }
    line("} else {");
    print_block(else_block);
    line("}");
  }
};

}  // namespace

std::string pretty_print(const Program& p) {
  Printer pr;
  for (size_t i = 0; i < p.functions.size(); ++i) {
    const FnDecl& f = p.functions[i];
    if (i) pr.out += '\n';
    pr.line("fn " + f.name + Printer::params_text(f.params) + " {");
    pr.print_block(*f.body);
    pr.line("}");
  }
  return pr.out;
}

std::string pretty_print(const Expr& e) {
  Printer pr;
  return pr.expr_text(e, 0);
}

}  // namespace sl

#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "sl/diag.hpp"

namespace sl {

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;
struct Stmt;
using StmtPtr = std::shared_ptr<const Stmt>;
struct Block;
using BlockPtr = std::shared_ptr<const Block>;

// --- lvalue paths -----------------------------------------------------------

struct PathField {
  std::string name;
};
struct PathIndex {
  ExprPtr index;
};
using Accessor = std::variant<PathField, PathIndex>;

/// A variable root plus field/index accessors naming an updatable location.
struct Path {
  std::string root;
  SrcLoc loc;
  std::vector<Accessor> accessors;
};

// --- expressions ------------------------------------------------------------

struct IntLit {
  int64_t value = 0;
};
struct FloatLit {
  double value = 0;
};
struct BoolLit {
  bool value = false;
};
struct StrLit {
  std::string value;
};
struct UnitLit {};
struct VarExpr {
  std::string name;
};
struct IndexExpr {
  ExprPtr base;
  ExprPtr index;
};
struct FieldExpr {
  ExprPtr base;
  std::string name;
};

enum class BinOpKind { Add, Sub, Mul, Div, Lt, Le, Gt, Ge, Eq, Ne, And, Or };
enum class UnOpKind { Neg, Not };

struct BinExpr {
  BinOpKind op;
  ExprPtr lhs;
  ExprPtr rhs;
};
struct UnExpr {
  UnOpKind op;
  ExprPtr operand;
};

/// Call argument: either a plain expression or a swap-marked path.
struct Arg {
  std::variant<ExprPtr, Path> v;

  bool is_swap() const { return v.index() == 1; }
  const Path& path() const { return std::get<Path>(v); }
  const ExprPtr& expr() const { return std::get<ExprPtr>(v); }
};

struct CallExpr {
  ExprPtr callee;
  std::vector<Arg> args;
};
struct ArrayLit {
  std::vector<ExprPtr> elems;
};
struct TupleLit {
  std::vector<ExprPtr> elems;
};
struct RecordLit {
  std::vector<std::pair<std::string, ExprPtr>> fields;
};

struct Param {
  std::string name;
  bool swapped = false;
};

struct ClosureLit {
  std::vector<Param> params;
  BlockPtr body;
};

using ExprNode =
    std::variant<IntLit, FloatLit, BoolLit, StrLit, UnitLit, VarExpr,
                 IndexExpr, FieldExpr, BinExpr, UnExpr, CallExpr, ArrayLit,
                 TupleLit, RecordLit, ClosureLit>;

struct Expr {
  SrcLoc loc;
  ExprNode node;
};

// --- statements -------------------------------------------------------------

struct AssignStmt {
  Path target;
  ExprPtr value;
};
/// `[a, b] = expr` assigns the elements of a length-matching array/tuple.
struct DestructureStmt {
  std::vector<std::string> names;
  ExprPtr value;
};
enum class CompoundOp { Add, Sub, Mul, Div };
struct CompoundStmt {
  Path target;
  CompoundOp op;
  ExprPtr value;
};
struct CallStmt {
  ExprPtr call;  // node is always CallExpr
};
struct WhileStmt {
  ExprPtr cond;
  BlockPtr body;
};
struct IfStmt {
  ExprPtr cond;
  BlockPtr then_block;
  BlockPtr else_block;  // may be null
};
struct ReturnStmt {
  ExprPtr value;  // null for bare `return`
};
struct BreakStmt {};
struct ContinueStmt {};

using StmtNode =
    std::variant<AssignStmt, DestructureStmt, CompoundStmt, CallStmt,
                 WhileStmt, IfStmt, ReturnStmt, BreakStmt, ContinueStmt>;

struct Stmt {
  SrcLoc loc;
  StmtNode node;
};

struct Block {
  std::vector<StmtPtr> stmts;
};

struct FnDecl {
  std::string name;
  SrcLoc loc;
  std::vector<Param> params;
  BlockPtr body;
};

struct Program {
  std::vector<FnDecl> functions;
};

// --- helpers ----------------------------------------------------------------

inline ExprPtr make_expr(SrcLoc loc, ExprNode node) {
  return std::make_shared<Expr>(Expr{loc, std::move(node)});
}
inline StmtPtr make_stmt(SrcLoc loc, StmtNode node) {
  return std::make_shared<Stmt>(Stmt{loc, std::move(node)});
}

/// Read form of a path: `a.b[i]` as nested Field/Index expressions.
ExprPtr path_to_expr(const Path& p);

/// Inverse of path_to_expr for expressions that are valid assignment targets.
std::optional<Path> expr_to_path(const Expr& e);

// Structural equality, ignoring source locations.
bool equal(const Expr& a, const Expr& b);
bool equal(const Stmt& a, const Stmt& b);
bool equal(const Block& a, const Block& b);
bool equal(const Path& a, const Path& b);
bool equal(const FnDecl& a, const FnDecl& b);
bool equal(const Program& a, const Program& b);

}  // namespace sl

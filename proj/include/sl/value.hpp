#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace sl {

class Heap;
struct Cell;

enum class ValueKind : uint8_t {
  Unit,
  Int,
  Float,
  Bool,
  Str,
  Array,
  Tuple,
  Record,
  Closure,
};

const char* kind_name(ValueKind k);

/// Runtime value. Scalars live inline; aggregates are a pointer to a shared,
/// reference-counted cell. Copying a Value retains the cell, destroying it
/// releases. Observable behavior always equals copy-everything semantics;
/// sharing is only a representation.
class Value {
 public:
  Value() : v_(std::monostate{}) {}
  explicit Value(int64_t i) : v_(i) {}
  explicit Value(double f) : v_(f) {}
  explicit Value(bool b) : v_(b) {}
  explicit Value(std::string s) : v_(std::move(s)) {}

  /// Adopts an already-counted reference.
  static Value adopt(Cell* c) {
    Value v;
    v.v_ = c;
    return v;
  }

  Value(const Value& o);
  Value(Value&& o) noexcept : v_(std::move(o.v_)) { o.v_ = std::monostate{}; }
  Value& operator=(const Value& o);
  Value& operator=(Value&& o) noexcept;
  ~Value();

  ValueKind kind() const;
  bool is_cell() const { return std::holds_alternative<Cell*>(v_); }

  int64_t as_int() const { return std::get<int64_t>(v_); }
  double as_float() const { return std::get<double>(v_); }
  bool as_bool() const { return std::get<bool>(v_); }
  const std::string& as_str() const { return std::get<std::string>(v_); }
  Cell* cell() const { return std::get<Cell*>(v_); }

 private:
  std::variant<std::monostate, int64_t, double, bool, std::string, Cell*> v_;
};

struct ArrayData {
  std::vector<Value> elems;
};
struct TupleData {
  std::vector<Value> elems;
};
struct RecordData {
  std::vector<std::pair<std::string, Value>> fields;  // insertion order
};
struct ClosureData {
  uint32_t fn_index = 0;
  std::vector<Value> captures;
};

struct Cell {
  Heap* heap;
  uint32_t rc = 1;
  std::variant<ArrayData, TupleData, RecordData, ClosureData> data;

  ValueKind kind() const {
    switch (data.index()) {
      case 0: return ValueKind::Array;
      case 1: return ValueKind::Tuple;
      case 2: return ValueKind::Record;
      default: return ValueKind::Closure;
    }
  }
};

/// Instrumentation counters; capacity growth of arrays counts under
/// allocations, not copies.
struct ReuseStats {
  uint64_t allocations = 0;  // new aggregate cells, including copies
  uint64_t copies = 0;       // node copies forced by a shared refcount
  uint64_t in_place = 0;     // updates applied to a unique cell
};

class Heap {
 public:
  explicit Heap(bool reuse_enabled = true) : reuse_enabled_(reuse_enabled) {}
  Heap(const Heap&) = delete;
  Heap& operator=(const Heap&) = delete;

  bool reuse_enabled() const { return reuse_enabled_; }
  const ReuseStats& stats() const { return stats_; }
  ReuseStats& stats() { return stats_; }
  int64_t live_cells() const { return live_cells_; }

  Cell* new_array(std::vector<Value> elems);
  Cell* new_tuple(std::vector<Value> elems);
  Cell* new_record(std::vector<std::pair<std::string, Value>> fields);
  Cell* new_closure(uint32_t fn_index, std::vector<Value> captures);

  /// Shallow node copy: the new cell retains every child. Counts a copy and
  /// an allocation.
  Cell* copy_node(const Cell* c);

  /// Makes the value's cell safe to mutate: unique and reuse on, it is the
  /// cell itself (counts in_place); otherwise a fresh node copy replaces it.
  Cell* mutable_cell(Value& v);

  static void retain(Cell* c) { ++c->rc; }
  static void release(Cell* c);

  /// Debug aid: value trees can never contain a cell twice along one path.
  static bool is_acyclic(const Value& v);

 private:
  friend class Value;
  Cell* track(Cell* c);

  ReuseStats stats_;
  int64_t live_cells_ = 0;
  bool reuse_enabled_ = true;
};

/// Display form: arrays `[1, 2]`, tuples `(1, 2)`, records `{a: 1}`, unit
/// `()`, strings bare at top level and quoted inside aggregates.
std::string format_value(const Value& v, bool top_level = false);

}  // namespace sl

#include "sl/value.hpp"

#include <set>

#include "sl/number_format.hpp"
#include "sl/util.hpp"

namespace sl {

const char* kind_name(ValueKind k) {
  switch (k) {
    case ValueKind::Unit: return "unit";
    case ValueKind::Int: return "int";
    case ValueKind::Float: return "float";
    case ValueKind::Bool: return "bool";
    case ValueKind::Str: return "string";
    case ValueKind::Array: return "array";
    case ValueKind::Tuple: return "tuple";
    case ValueKind::Record: return "record";
    case ValueKind::Closure: return "closure";
  }
  return "?";
}

Value::Value(const Value& o) : v_(o.v_) {
  if (auto* c = std::get_if<Cell*>(&v_)) Heap::retain(*c);
}

Value& Value::operator=(const Value& o) {
  if (this == &o) return *this;
  Value tmp(o);
  *this = std::move(tmp);
  return *this;
}

Value& Value::operator=(Value&& o) noexcept {
  if (this == &o) return *this;
  if (auto* c = std::get_if<Cell*>(&v_)) Heap::release(*c);
  v_ = std::move(o.v_);
  o.v_ = std::monostate{};
  return *this;
}

Value::~Value() {
  if (auto* c = std::get_if<Cell*>(&v_)) Heap::release(*c);
}

ValueKind Value::kind() const {
  switch (v_.index()) {
    case 0: return ValueKind::Unit;
    case 1: return ValueKind::Int;
    case 2: return ValueKind::Float;
    case 3: return ValueKind::Bool;
    case 4: return ValueKind::Str;
    default: return std::get<Cell*>(v_)->kind();
  }
}

Cell* Heap::track(Cell* c) {
  ++stats_.allocations;
  ++live_cells_;
  return c;
}

Cell* Heap::new_array(std::vector<Value> elems) {
  return track(new Cell{this, 1, ArrayData{std::move(elems)}});
}
Cell* Heap::new_tuple(std::vector<Value> elems) {
  return track(new Cell{this, 1, TupleData{std::move(elems)}});
}
Cell* Heap::new_record(std::vector<std::pair<std::string, Value>> fields) {
  return track(new Cell{this, 1, RecordData{std::move(fields)}});
}
Cell* Heap::new_closure(uint32_t fn_index, std::vector<Value> captures) {
  return track(new Cell{this, 1, ClosureData{fn_index, std::move(captures)}});
}

Cell* Heap::copy_node(const Cell* c) {
  ++stats_.copies;
  Cell* out = std::visit(
      overloaded{
          [&](const ArrayData& a) { return new_array(a.elems); },
          [&](const TupleData& t) { return new_tuple(t.elems); },
          [&](const RecordData& r) { return new_record(r.fields); },
          [&](const ClosureData& cl) {
            return new_closure(cl.fn_index, cl.captures);
          },
      },
      c->data);
  return out;
}

Cell* Heap::mutable_cell(Value& v) {
  Cell* c = v.cell();
  if (reuse_enabled_ && c->rc == 1) {
    ++stats_.in_place;
    return c;
  }
  Cell* fresh = copy_node(c);
  v = Value::adopt(fresh);  // releases the shared original
  return fresh;
}

void Heap::release(Cell* c) {
  if (--c->rc > 0) return;
  --c->heap->live_cells_;
  delete c;  // members release children recursively
}

bool Heap::is_acyclic(const Value& v) {
  std::set<const Cell*> path;
  auto walk = [&](auto&& self, const Value& val) -> bool {
    if (!val.is_cell()) return true;
    const Cell* c = val.cell();
    if (!path.insert(c).second) return false;
    bool ok = std::visit(
        overloaded{
            [&](const ArrayData& a) {
              for (const auto& e : a.elems)
                if (!self(self, e)) return false;
              return true;
            },
            [&](const TupleData& t) {
              for (const auto& e : t.elems)
                if (!self(self, e)) return false;
              return true;
            },
            [&](const RecordData& r) {
              for (const auto& f : r.fields)
                if (!self(self, f.second)) return false;
              return true;
            },
            [&](const ClosureData& cl) {
              for (const auto& e : cl.captures)
                if (!self(self, e)) return false;
              return true;
            },
        },
        c->data);
    path.erase(c);
    return ok;
  };
  return walk(walk, v);
}

std::string format_value(const Value& v, bool top_level) {
  switch (v.kind()) {
    case ValueKind::Unit: return "()";
    case ValueKind::Int: return std::to_string(v.as_int());
    case ValueKind::Float: return format_float(v.as_float());
    case ValueKind::Bool: return v.as_bool() ? "true" : "false";
    case ValueKind::Str:
      return top_level ? v.as_str() : escape_text(v.as_str());
    case ValueKind::Array: {
      const auto& a = std::get<ArrayData>(v.cell()->data);
      std::string out = "[";
      for (size_t i = 0; i < a.elems.size(); ++i) {
        if (i) out += ", ";
        out += format_value(a.elems[i]);
      }
      return out + "]";
    }
    case ValueKind::Tuple: {
      const auto& t = std::get<TupleData>(v.cell()->data);
      std::string out = "(";
      for (size_t i = 0; i < t.elems.size(); ++i) {
        if (i) out += ", ";
        out += format_value(t.elems[i]);
      }
      if (t.elems.size() == 1) out += ",";
      return out + ")";
    }
    case ValueKind::Record: {
      const auto& r = std::get<RecordData>(v.cell()->data);
      std::string out = "{";
      for (size_t i = 0; i < r.fields.size(); ++i) {
        if (i) out += ", ";
        out += r.fields[i].first + ": " + format_value(r.fields[i].second);
      }
      return out + "}";
    }
    case ValueKind::Closure: return "<closure>";
  }
  return "?";
}

}  // namespace sl

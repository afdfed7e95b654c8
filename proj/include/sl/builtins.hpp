#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

namespace sl {

enum class Builtin : uint8_t {
  Append,    // append(&arr, elem) -> ()
  Set,       // set(&container, key, value) -> ()
  Extract,   // extract(&container, key) -> component; slot becomes ()
  Get,       // get(container, key) -> component copy
  Len,       // len(value) -> int
  Print,     // print(value) -> ()
  CheckLen,  // internal: destructuring length check, not name-callable
};

struct BuiltinSig {
  Builtin id;
  std::string_view name;
  int arity;
  std::vector<uint32_t> swap_positions;
};

const BuiltinSig& builtin_sig(Builtin b);

/// Name lookup for user-callable builtins; CheckLen is not reachable by name.
std::optional<Builtin> builtin_by_name(std::string_view name);

}  // namespace sl

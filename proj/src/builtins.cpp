#include "sl/builtins.hpp"

#include <array>

namespace sl {

namespace {

const std::array<BuiltinSig, 7>& table() {
  static const std::array<BuiltinSig, 7> t = {{
      {Builtin::Append, "append", 2, {0}},
      {Builtin::Set, "set", 3, {0}},
      {Builtin::Extract, "extract", 2, {0}},
      {Builtin::Get, "get", 2, {}},
      {Builtin::Len, "len", 1, {}},
      {Builtin::Print, "print", 1, {}},
      {Builtin::CheckLen, "check_len", 2, {}},
  }};
  return t;
}

}  // namespace

const BuiltinSig& builtin_sig(Builtin b) {
  return table()[static_cast<size_t>(b)];
}

std::optional<Builtin> builtin_by_name(std::string_view name) {
  for (const auto& sig : table()) {
    if (sig.id == Builtin::CheckLen) continue;
    if (sig.name == name) return sig.id;
  }
  return std::nullopt;
}

}  // namespace sl

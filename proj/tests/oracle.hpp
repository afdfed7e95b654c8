#pragma once

// Naive copy-everything evaluator over the surface AST. Every binding deep
// copies, so value semantics holds trivially. It is the independent reference
// the pipeline (desugar -> lower -> refcounted interpreter) is checked
// against; it shares only the AST with the implementation under test.

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "sl/ast.hpp"

namespace oracle {

struct OValue;
using OArray = std::vector<OValue>;
struct OTuple {
  std::vector<OValue> elems;
};
struct ORecord {
  std::vector<std::pair<std::string, OValue>> fields;
};
struct OClosure {
  const std::vector<sl::Param>* params = nullptr;
  const sl::Block* body = nullptr;
  std::shared_ptr<std::vector<std::pair<std::string, OValue>>> captures;
};

struct OValue {
  std::variant<std::monostate, int64_t, double, bool, std::string, OArray,
               OTuple, ORecord, OClosure>
      v;

  OValue() = default;
  template <typename T>
  OValue(T x) : v(std::move(x)) {}  // NOLINT(google-explicit-constructor)
};

std::string format(const OValue& v, bool top_level = false);
bool deep_equal(const OValue& a, const OValue& b);  // throws on closures

struct OracleError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CallResult {
  OValue result;
  std::vector<OValue> swapped;
};

class Oracle {
 public:
  Oracle(const sl::Program& prog, std::ostream& out);

  CallResult call(const std::string& fn_name, std::vector<OValue> args);

  /// Runs `main` (zero parameters) and returns its result.
  OValue run();

 private:
  struct Impl;
  std::shared_ptr<Impl> impl_;
};

}  // namespace oracle

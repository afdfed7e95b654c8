#include "sl/cli.hpp"

#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "sl/ast_printer.hpp"
#include "sl/autodiff.hpp"
#include "sl/interp.hpp"
#include "sl/ir_print.hpp"
#include "sl/number_format.hpp"
#include "sl/parser.hpp"
#include "sl/pipeline.hpp"

namespace sl {

namespace {

std::optional<std::string> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in.good()) return std::nullopt;
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void print_diags(std::ostream& err, const CompileError& e) {
  for (const auto& d : e.diags()) err << d.to_string() << "\n";
}

std::string stats_line(const ReuseStats& s, bool json) {
  if (json) {
    return "{\"allocations\": " + std::to_string(s.allocations) +
           ", \"copies\": " + std::to_string(s.copies) +
           ", \"in_place\": " + std::to_string(s.in_place) + "}";
  }
  return "allocations=" + std::to_string(s.allocations) +
         " copies=" + std::to_string(s.copies) +
         " in_place=" + std::to_string(s.in_place);
}

// `--at` items: an int unless it carries a '.' or exponent
Value parse_at_item(const std::string& item) {
  if (item.find('.') != std::string::npos ||
      item.find('e') != std::string::npos ||
      item.find('E') != std::string::npos) {
    return Value(std::stod(item));
  }
  return Value(static_cast<int64_t>(std::stoll(item)));
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out,
             std::ostream& err) {
  CLI::App app{"reference interpreter for the swap-operator language"};
  app.require_subcommand(1);

  std::string path;
  bool no_reuse = false, stats = false, json = false, trace = false;
  uint64_t max_steps = 0;
  bool core = false;
  std::string grad_fn;
  uint32_t grad_wrt = 0;
  std::string grad_at;

  auto* run = app.add_subcommand("run", "execute a program's main function");
  run->add_option("file", path, "source file")->required();
  run->add_flag("--no-reuse", no_reuse, "disable in-place reuse");
  run->add_flag("--stats", stats, "print reuse counters after the run");
  run->add_flag("--json", json, "print the counters as JSON (implies --stats)");
  run->add_flag("--trace", trace, "log each executed instruction to stderr");
  run->add_option("--max-steps", max_steps, "abort after this many steps");

  auto* ast = app.add_subcommand("ast", "print the parsed program");
  ast->add_option("file", path, "source file")->required();
  ast->add_flag("--core", core, "print the desugared form instead");

  auto* ir = app.add_subcommand("ir", "print the lowered block form");
  ir->add_option("file", path, "source file")->required();

  auto* grad = app.add_subcommand("grad", "forward-mode derivative of a function");
  grad->add_option("file", path, "source file")->required();
  grad->add_option("--fn", grad_fn, "function to differentiate")->required();
  grad->add_option("--wrt", grad_wrt, "parameter index")->required();
  grad->add_option("--at", grad_at, "comma-separated argument values")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return 0;
    }
    err << e.what() << "\n";
    err << app.help();
    return 2;
  }

  auto source = read_file(path);
  if (!source) {
    err << "cannot open file: " << path << "\n";
    return 2;
  }

  try {
    if (ast->parsed()) {
      if (core) {
        Compiled c = compile_source(*source);
        out << pretty_print(c.core);
      } else {
        out << pretty_print(parse_source(*source));
      }
      return 0;
    }

    Compiled c = compile_source(*source);

    if (ir->parsed()) {
      out << print_ir(c.ir);
      return 0;
    }

    if (run->parsed()) {
      EvalConfig cfg;
      cfg.reuse_enabled = !no_reuse;
      cfg.trace = trace;
      if (max_steps > 0) cfg.max_steps = max_steps;
      Interpreter interp(c.ir, cfg, out, &err);
      ReuseStats final_stats;
      {
        CallOutcome o = interp.run();
        final_stats = o.stats;
      }
      if (stats || json) out << stats_line(final_stats, json) << "\n";
      return 0;
    }

    // grad
    auto res = forward_diff(c.ir, grad_fn, grad_wrt);
    std::vector<Value> args;
    std::stringstream items(grad_at);
    std::string item;
    while (std::getline(items, item, ',')) {
      if (!item.empty()) args.push_back(parse_at_item(item));
    }
    Interpreter interp(res.program, {}, out, &err);
    CallOutcome o = interp.call(res.derived_name, std::move(args));
    if (o.result.kind() != ValueKind::Tuple)
      throw EvalError(EvalErrorKind::Internal, "derivative did not yield a pair");
    Value v = builtin_get(o.result, Value(int64_t{0}));
    Value d = builtin_get(o.result, Value(int64_t{1}));
    out << "value=" << format_value(v) << " deriv=" << format_value(d) << "\n";
    o.result = Value();
    return 0;
  } catch (const CompileError& e) {
    print_diags(err, e);
    return 1;
  } catch (const EvalError& e) {
    err << e.describe() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace sl

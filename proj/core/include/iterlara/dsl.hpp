#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "iterlara/eval.hpp"
#include "iterlara/expr.hpp"
#include "iterlara/functions.hpp"

namespace iterlara {

// fn name(x, y) = <scalar expr> identity = <literal> cost = <int>;
struct BinaryDef {
  std::string name, x, y;
  ScalarExprPtr body;
  Scalar identity = std::int64_t{0};
  std::int64_t cost = 1;
};

// mapfn name(v) = <scalar expr> [cost = <int>];
struct MapDef {
  std::string name, v;
  ScalarExprPtr body;
  std::int64_t cost = 1;
};

// fn F(e) = <expr> [with B := <expr>, ...];
struct FnDef {
  std::string name;
  ExprFnPtr fn;
};

// load X "path";
struct LoadDef {
  std::string name, path;
};

struct Script {
  std::vector<BinaryDef> binaries;
  std::vector<MapDef> mapfns;
  std::vector<FnDef> fns;
  std::vector<LoadDef> loads;
  std::vector<std::pair<std::string, Expression>> lets;  // let X = e;
  Expression result;                                      // final expression

  // The lets and the final expression as one expression (lets reduced by
  // compose_statements).
  Expression program() const;
  // `base` plus the script's functions; binaries pass the property check here.
  FunctionRegistry registry(const FunctionRegistry& base) const;
  // Loads every `load` table; relative paths are resolved against base_dir.
  Environment load_tables(const std::string& base_dir = ".") const;
  // Table names the program reads that neither a load nor a let provides.
  std::set<std::string> external_tables() const;
};

struct ParseOptions {
  // When set, function names are checked against it (UnknownFunction).
  const FunctionRegistry* registry = nullptr;
  // When set, names outside it, the loads and the lets raise UnknownTable.
  const std::set<std::string>* tables = nullptr;
};

// Throws SyntaxError with line and column of the first problem.
Script parse_script(std::string_view src, const ParseOptions& opts = {});
// A single expression (no items).
Expression parse_expression(std::string_view src);
ScalarExprPtr parse_scalar(std::string_view src);

struct PrintOptions {
  bool unicode = false;  // ⧗ / ⋈ / σ / π notation for documentation; not parseable
};

std::string print_expression(const Expression& e, const PrintOptions& opts = {});
std::string print_script(const Script& s);
// table[i:int -> v:int = 0]{(0): (1), ...}
std::string print_table_literal(const AssociativeTable& t);

}  // namespace iterlara

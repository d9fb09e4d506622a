#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "iterlara/expr.hpp"

namespace iterlara {

struct Stmt;

struct LoopStmt {
  enum class Kind { While, ForN, ForCond };
  Kind kind = Kind::While;
  Expression cond;  // While: re-checked before every pass; ForCond: read once
  std::int64_t n = 0;
  std::vector<Stmt> body;
};

// name := expr, or a loop over a statement list.
struct Stmt {
  std::string name;
  Expression expr;
  std::shared_ptr<const LoopStmt> loop;

  static Stmt assign(std::string name, Expression e);
  static Stmt while_loop(Expression cond, std::vector<Stmt> body);
  static Stmt for_n(std::int64_t n, std::vector<Stmt> body);
  static Stmt for_cond(Expression cond, std::vector<Stmt> body);
};

// Reduces a statement list to one expression. Every name that is assigned
// becomes a slot of a state table (see state.hpp); each statement reads its
// slots from the current state and writes its result back, and loops iterate
// over the whole state. The expression ends with the `result` slot, or with
// the state itself when `result` is empty.
// Names starting with "__" are reserved (NameClash); a result that is never
// assigned raises UnknownName.
Expression compose_statements(const std::vector<Stmt>& stmts, const std::string& result);
Expression compose_statements(const std::vector<std::pair<std::string, Expression>>& stmts, const std::string& result);

}  // namespace iterlara

#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>

#include "iterlara/algebra.hpp"
#include "iterlara/expr.hpp"
#include "iterlara/functions.hpp"
#include "iterlara/table.hpp"

namespace iterlara {

using Environment = std::map<std::string, AssociativeTable>;

// Hooks for costing and debug checks. Called after each node other than
// references and lets has produced its value.
class EvalObserver {
public:
  virtual ~EvalObserver() = default;
  virtual void on_node(const Node& node, std::span<const AssociativeTable* const> inputs, const AssociativeTable& out,
                       const OpStats& stats) {
    (void)node, (void)inputs, (void)out, (void)stats;
  }
  // Called before every loop-body execution.
  virtual void on_iteration(const Node& loop) { (void)loop; }
};

struct EvalStats {
  std::uint64_t iterations = 0;  // loop-body executions, all loops together
};

// 1,000,000 unless ITERLARA_FUEL holds a number.
std::uint64_t default_fuel();
const FunctionRegistry& builtin_registry();

struct EvalOptions {
  std::uint64_t fuel = default_fuel();      // body executions allowed in total
  const FunctionRegistry* registry = nullptr;  // builtins when null
  EvalObserver* observer = nullptr;
};

AssociativeTable eval(const Expression& e, const Environment& env, const EvalOptions& opts = {},
                      EvalStats* stats = nullptr);

// Rewrites loops whose function carries auxiliary updates (F; B := f(B))
// into plain loops over a state table holding the parameter and the updated
// names. eval() applies it itself.
Expression lower(const Expression& e);

// Convenience entry points for the three loop forms.
AssociativeTable iterate(const ExprFnPtr& f, const Expression& cond, const Expression& seed, const Environment& env,
                         std::uint64_t fuel, EvalStats* stats = nullptr);
AssociativeTable for_n(const ExprFnPtr& f, std::int64_t n, const Expression& seed, const Environment& env,
                       EvalStats* stats = nullptr);
AssociativeTable for_cond(const ExprFnPtr& f, const Expression& cond, const Expression& seed, const Environment& env,
                          EvalStats* stats = nullptr);

}  // namespace iterlara

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "iterlara/eval.hpp"
#include "iterlara/expr.hpp"

namespace iterlara {

struct CostEntry {
  std::size_t node_id = 0;  // preorder position in the (lowered) expression
  std::string label;        // node_label()
  std::string formula;      // "union", "join", "ext", or "none"
  std::uint64_t visits = 0; // evaluations of the node (loop bodies repeat)
  std::uint64_t exact = 0;
  std::uint64_t upper_bound = 0;
};

struct CostReport {
  std::uint64_t exact = 0;
  std::uint64_t upper_bound = 0;
  std::vector<CostEntry> breakdown;  // every node that was evaluated, by node id
  AssociativeTable result;
};

// Operation count of `e`, measured by evaluating it with instrumentation.
//   union:  (n_A + n_B) × OP(⊕); bound uses products of distinct key counts
//   joins:  matched pairs × OP(⊗); bound Π|a| Π|c| Π|b|
//   ext/map: n_A × OP(f); bound Π|a|
// Aggregation counts as union with an empty table; other relational and
// state operators cost 0. Loops add up their unrolled bodies (and the count
// condition once). Iter raises UnboundedIteration before evaluation.
CostReport op_count(const Expression& e, const Environment& env, const EvalOptions& opts = {});

// JSON: {"exact":..,"upper_bound":..,"breakdown":[{...}]}.
std::string cost_report_json(const CostReport& r);
// Aligned text with one line per costed node.
std::string cost_report_text(const CostReport& r);

}  // namespace iterlara

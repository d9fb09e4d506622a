#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "iterlara/functions.hpp"
#include "iterlara/scalar_expr.hpp"
#include "iterlara/table.hpp"

namespace iterlara {

// Number of ⊕ / ⊗ / f applications performed by one operator call.
struct OpStats {
  std::uint64_t applications = 0;
  bool dense = false;  // join evaluated over the key cross-product
};

// A ⧗_⊕ B. Keys K_A ∩ K_B (in A's order), values V_A then B's own values.
AssociativeTable union_tables(const AssociativeTable& a, const AssociativeTable& b, const BinaryFn& plus,
                              OpStats* stats = nullptr);
// A ⋈̂_⊗ B. Keys K_A then B's own keys, values V_A ∩ V_B.
AssociativeTable strict_join(const AssociativeTable& a, const AssociativeTable& b, const BinaryFn& times,
                             OpStats* stats = nullptr);
// A ⋈_⊗ B. Keys as strict_join, values V_A then B's own values.
AssociativeTable relaxed_join(const AssociativeTable& a, const AssociativeTable& b, const BinaryFn& times,
                              OpStats* stats = nullptr);
AssociativeTable ext(const AssociativeTable& a, const FlatmapFn& f, OpStats* stats = nullptr);
// ext restricted to key-preserving functions.
AssociativeTable map_table(const AssociativeTable& a, const FlatmapFn& f, OpStats* stats = nullptr);

// σ_F. Variables name attributes; calls may name registered row predicates.
AssociativeTable select_rows(const AssociativeTable& a, const ScalarExpr& pred, const FunctionRegistry* reg = nullptr);
// π_S. Either a keep-list ("a", "b") giving the result order, or a drop-list
// ("-a", "-b"). Records that collide on the remaining keys must agree.
AssociativeTable project(const AssociativeTable& a, const std::vector<std::string>& attrs);
// ρ. All pairs are applied simultaneously.
AssociativeTable rename(const AssociativeTable& a, const std::vector<std::pair<std::string, std::string>>& pairs);
// γ_{S,⊕}: union with an empty table keyed by S.
AssociativeTable aggregate(const AssociativeTable& a, const std::vector<std::string>& group_keys, const BinaryFn& plus,
                           OpStats* stats = nullptr);

AssociativeTable set_union(const AssociativeTable& a, const AssociativeTable& b);
AssociativeTable set_intersect(const AssociativeTable& a, const AssociativeTable& b);
AssociativeTable set_difference(const AssociativeTable& a, const AssociativeTable& b);
// Keyless b: records of a whose values equal b's single value tuple.
// Otherwise relational division on keys; the result carries in=true.
AssociativeTable divide(const AssociativeTable& a, const AssociativeTable& b);
// A ▷ B: records of A with no natural-join partner in B.
AssociativeTable antijoin_left(const AssociativeTable& a, const AssociativeTable& b);
// A ◁ B: records of B with no natural-join partner in A.
AssociativeTable antijoin_right(const AssociativeTable& a, const AssociativeTable& b);
// Vector append: b's single int key is shifted past a's largest key.
AssociativeTable concat(const AssociativeTable& a, const AssociativeTable& b);

enum class CompareOp { Lt, Le, Eq, Ne, Gt, Ge };
const char* compare_op_name(CompareOp op);
// Compares two scalar tables; the result is a keyless bool table "cond".
AssociativeTable compare_tables(const AssociativeTable& a, const AssociativeTable& b, CompareOp op);

// Boolean / scalar reading of a table with at most one record and one value.
bool boole(const AssociativeTable& t);
Scalar scalar(const AssociativeTable& t);

// Keyless one-record table [v:kind] holding `v` (empty when v is the zero).
AssociativeTable scalar_table(Scalar v, const std::string& attr = "v");

}  // namespace iterlara

#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "iterlara/eval.hpp"
#include "iterlara/expr.hpp"
#include "iterlara/table.hpp"

namespace iterlara {

using IntMatrix = std::vector<std::vector<std::int64_t>>;
using RealMatrix = std::vector<std::vector<double>>;

// [[i,j]: v] with default 0; zero entries are not stored.
AssociativeTable matrix_from_dense(const IntMatrix& m);
AssociativeTable matrix_from_dense(const RealMatrix& m);
// Dense rows x cols view; reads any numeric value kind.
RealMatrix matrix_to_dense(const AssociativeTable& t, std::size_t rows, std::size_t cols);
// [i: v] vectors.
AssociativeTable vector_from_dense(const std::vector<std::int64_t>& v);
AssociativeTable vector_from_dense(const std::vector<double>& v);

// Occupancy form [[i,j]: v, in] used by the size-agnostic constructions:
// every cell of the matrix carries in=1, so Count sees zero entries too.
AssociativeTable matrix_occupancy(const IntMatrix& m);
AssociativeTable matrix_occupancy(const RealMatrix& m);
// Adds in=1 on the rows x cols box of a [[i,j]: v] table.
AssociativeTable with_occupancy(const AssociativeTable& m, std::size_t rows, std::size_t cols);

// E ⧗_+ (A ⋈_× B) with B's keys renamed so the inner index is shared.
Expression matmul_expr(Expression a, Expression b, Kind value_kind = Kind::Int);
AssociativeTable matmul(const AssociativeTable& a, const AssociativeTable& b, const EvalOptions& opts = {});

// Average / max over windows of width s. The length defaults to the largest
// stored index + 1 and must be a multiple of s (BadStride).
Expression avgpool1d_expr(Expression a, std::int64_t s);
AssociativeTable avgpool1d(const AssociativeTable& a, std::int64_t s, std::optional<std::int64_t> length = {});
Expression maxpool1d_expr(Expression a, std::int64_t s);
AssociativeTable maxpool1d(const AssociativeTable& a, std::int64_t s, std::optional<std::int64_t> length = {});

AssociativeTable relu(const AssociativeTable& a);
// Records holding the maximum value; EmptyInput on an empty table.
AssociativeTable argmax(const AssociativeTable& a);

// Permutation-sum determinant of an n x n matrix table, n <= 6.
Expression det_fixed_expr(Expression a, std::int64_t n, Kind value_kind = Kind::Int);
AssociativeTable det_fixed(const AssociativeTable& a, std::int64_t n);
// Inverse through the adjugate; Singular when |det| <= 1e-9.
AssociativeTable inv_fixed(const AssociativeTable& a, std::int64_t n);

// Same constructions with the size read from the data by Count and the
// selector chain advanced by a for^cond loop. Input is a matrix in
// occupancy form; a plain [[i,j]: v] table is boxed by its largest indices.
Expression det_count_expr(Expression a, Kind value_kind = Kind::Int);
AssociativeTable det_count(const AssociativeTable& a, const EvalOptions& opts = {});
// State script computing slots D (determinant) and Inv.
Expression inv_count_expr(Expression a, Kind value_kind = Kind::Int);
AssociativeTable inv_count(const AssociativeTable& a, const EvalOptions& opts = {});

}  // namespace iterlara

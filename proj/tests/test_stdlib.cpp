#include <algorithm>
#include <cmath>
#include <set>

#include <gtest/gtest.h>

#include "iterlara/algebra.hpp"
#include "iterlara/error.hpp"
#include "iterlara/stdlib.hpp"
#include "support.hpp"

using namespace iterlara;
using support::Gen;
using support::I;

namespace {

using Vec = std::vector<std::int64_t>;

std::vector<double> values_of(const AssociativeTable& t, std::size_t n) {
  std::vector<double> out;
  for (std::size_t i = 0; i < n; ++i) {
    Scalar k = I(static_cast<std::int64_t>(i));
    out.push_back(as_real(t.lookup(std::span<const Scalar>(&k, 1))[0]));
  }
  return out;
}

std::set<std::int64_t> keys_of(const AssociativeTable& t) {
  std::set<std::int64_t> out;
  for (std::size_t r = 0; r < t.size(); ++r) out.insert(as_int(t.key(r)[0]));
  return out;
}

void expect_identity(const RealMatrix& m) {
  for (std::size_t i = 0; i < m.size(); ++i)
    for (std::size_t j = 0; j < m.size(); ++j) EXPECT_NEAR(m[i][j], i == j ? 1.0 : 0.0, 1e-9);
}

Scalar det_value(const AssociativeTable& t) { return scalar(t); }

}  // namespace

TEST(MatMul, MatchesTripleLoop) {
  Gen g(61);
  for (int round = 0; round < 60; ++round) {
    std::size_t m = 1 + g.index(4), n = 1 + g.index(4), l = 1 + g.index(4);
    IntMatrix a = support::random_matrix(g, m, n, -3, 3), b = support::random_matrix(g, n, l, -3, 3);
    IntMatrix want = support::matmul_oracle(a, b);
    EXPECT_EQ(matmul(matrix_from_dense(a), matrix_from_dense(b)), matrix_from_dense(want));
  }
}

TEST(MatMul, RealValues) {
  RealMatrix a{{0.5, 1.5}, {2.0, -1.0}}, b{{1.0, 0.25}, {4.0, 2.0}};
  RealMatrix got = matrix_to_dense(matmul(matrix_from_dense(a), matrix_from_dense(b)), 2, 2);
  RealMatrix want = support::matmul_oracle(a, b);
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 2; ++j) EXPECT_NEAR(got[i][j], want[i][j], 1e-12);
}

TEST(MatMul, KindMismatch) {
  auto a = matrix_from_dense(IntMatrix{{1}});
  auto b = matrix_from_dense(RealMatrix{{1.0}});
  EXPECT_EQ(support::error_code([&] { matmul(a, b); }), ErrorCode::SchemaMismatch);
}

TEST(Pooling, AverageExample) {
  auto got = avgpool1d(vector_from_dense(Vec{1, 3, 4, 5, 7, 9}), 2);
  auto v = values_of(got, 3);
  EXPECT_NEAR(v[0], 2.0, 1e-9);
  EXPECT_NEAR(v[1], 4.5, 1e-9);
  EXPECT_NEAR(v[2], 8.0, 1e-9);
  EXPECT_EQ(got.size(), 3u);
}

TEST(Pooling, MaxExample) {
  auto got = maxpool1d(vector_from_dense(Vec{1, 3, 4, 5, 7, 9}), 2);
  EXPECT_EQ(got.schema().keys()[0].name, "i'");  // window index
  EXPECT_EQ(values_of(got, 3), (std::vector<double>{3, 5, 9}));
}

TEST(Pooling, BadStride) {
  auto a = vector_from_dense(Vec{1, 2, 3});
  EXPECT_EQ(support::error_code([&] { avgpool1d(a, 2); }), ErrorCode::BadStride);
  EXPECT_EQ(support::error_code([&] { avgpool1d(a, 0); }), ErrorCode::BadStride);
  EXPECT_EQ(support::error_code([&] { maxpool1d(a, 2, 5); }), ErrorCode::BadStride);
  EXPECT_NO_THROW(avgpool1d(a, 2, 4));
}

TEST(PoolingProperty, MatchesWindowOracle) {
  Gen g(62);
  for (int round = 0; round < 100; ++round) {
    std::int64_t s = g.range(1, 3);
    std::size_t windows = 1 + g.index(4);
    Vec x(windows * static_cast<std::size_t>(s));
    for (auto& v : x) v = g.coin(0.3) ? 0 : g.range(-5, 5);
    auto len = static_cast<std::int64_t>(x.size());
    auto avg = values_of(avgpool1d(vector_from_dense(x), s, len), windows);
    auto mx = values_of(maxpool1d(vector_from_dense(x), s, len), windows);
    for (std::size_t w = 0; w < windows; ++w) {
      double sum = 0;
      std::int64_t best = x[w * s];
      for (std::int64_t k = 0; k < s; ++k) {
        sum += static_cast<double>(x[w * s + k]);
        best = std::max(best, x[w * s + k]);
      }
      EXPECT_NEAR(avg[w], sum / static_cast<double>(s), 1e-9);
      EXPECT_EQ(mx[w], static_cast<double>(best));
    }
  }
}

TEST(PoolingProperty, AverageConservesSum) {
  Gen g(63);
  for (int round = 0; round < 100; ++round) {
    std::int64_t s = g.range(1, 4);
    Vec x(static_cast<std::size_t>(s * g.range(1, 4)));
    for (auto& v : x) v = g.range(-9, 9);
    auto pooled = avgpool1d(vector_from_dense(x), s, static_cast<std::int64_t>(x.size()));
    double total = 0;
    for (std::size_t r = 0; r < pooled.size(); ++r) total += as_real(pooled.value(r)[0]);
    double want = 0;
    for (auto v : x) want += static_cast<double>(v);
    EXPECT_NEAR(total * static_cast<double>(s), want, 1e-9);
  }
}

TEST(Activation, Relu) {
  EXPECT_EQ(relu(vector_from_dense(Vec{-2, 0, 3, -1, 5})), vector_from_dense(Vec{0, 0, 3, 0, 5}));
}

TEST(Activation, ArgmaxAndEmpty) {
  auto got = argmax(vector_from_dense(Vec{1, 7, 3, 7}));
  EXPECT_EQ(keys_of(got), (std::set<std::int64_t>{1, 3}));
  AssociativeTable empty(vector_from_dense(Vec{1}).schema());
  EXPECT_EQ(support::error_code([&] { argmax(empty); }), ErrorCode::EmptyInput);
}

TEST(ActivationProperty, ArgmaxInvariantUnderShift) {
  Gen g(64);
  for (int round = 0; round < 100; ++round) {
    Vec x(1 + g.index(6));
    for (auto& v : x) v = g.range(1, 6);
    Vec shifted = x;
    std::int64_t c = g.range(1, 5);
    for (auto& v : shifted) v += c;
    EXPECT_EQ(keys_of(argmax(vector_from_dense(x))), keys_of(argmax(vector_from_dense(shifted))));
  }
}

TEST(Determinant, SmallKnownValues) {
  EXPECT_EQ(det_value(det_fixed(matrix_from_dense(IntMatrix{{1, 2}, {3, 4}}), 2)), I(-2));
  EXPECT_EQ(det_value(det_count(matrix_occupancy(IntMatrix{{1, 2}, {3, 4}}))), I(-2));
  EXPECT_EQ(det_value(det_fixed(matrix_from_dense(IntMatrix{{5}}), 1)), I(5));
  EXPECT_EQ(det_value(det_count(matrix_occupancy(IntMatrix{{0, 0}, {0, 0}}))), I(0));
}

TEST(Determinant, RealMatrix) {
  RealMatrix m{{0.5, 2.0}, {1.5, -1.0}};
  EXPECT_NEAR(as_real(det_value(det_fixed(matrix_from_dense(m), 2))), -3.5, 1e-12);
  EXPECT_NEAR(as_real(det_value(det_count(matrix_occupancy(m)))), -3.5, 1e-12);
}

TEST(Determinant, SizeErrors) {
  EXPECT_EQ(support::error_code([] { det_count(matrix_occupancy(IntMatrix{{1, 2, 3}, {4, 5, 6}})); }),
            ErrorCode::NotSquare);
  IntMatrix big(7, std::vector<std::int64_t>(7, 1));
  EXPECT_EQ(support::error_code([&] { det_count(matrix_occupancy(big)); }), ErrorCode::SizeTooLarge);
  EXPECT_EQ(support::error_code([&] { det_fixed(matrix_from_dense(big), 7); }), ErrorCode::SizeTooLarge);
}

TEST(Determinant, PlainTableIsBoxedByLargestIndex) {
  // [[0,0]:2, [1,1]:3] is read as the 2x2 diagonal matrix.
  EXPECT_EQ(det_value(det_count(matrix_from_dense(IntMatrix{{2, 0}, {0, 3}}))), I(6));
}

TEST(DeterminantProperty, ConstructionsMatchPermutationSum) {
  Gen g(65);
  for (int round = 0; round < 60; ++round) {
    std::size_t n = 1 + g.index(4);
    IntMatrix m = support::random_matrix(g, n, n, -3, 3);
    Scalar want = I(support::det_bruteforce(m));
    EXPECT_EQ(det_value(det_fixed(matrix_from_dense(m), static_cast<std::int64_t>(n))), want);
    EXPECT_EQ(det_value(det_count(matrix_occupancy(m))), want);
  }
}

TEST(Inverse, KnownMatrix) {
  IntMatrix m{{2, 0, 1}, {1, 3, 2}, {1, 1, 3}};
  RealMatrix inv = matrix_to_dense(inv_count(matrix_occupancy(m)), 3, 3);
  EXPECT_NEAR(inv[0][0], 7.0 / 12.0, 1e-12);
  EXPECT_NEAR(inv[2][2], 6.0 / 12.0, 1e-12);
  RealMatrix fixed = matrix_to_dense(inv_fixed(matrix_from_dense(m), 3), 3, 3);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) EXPECT_NEAR(fixed[i][j], inv[i][j], 1e-12);
}

TEST(Inverse, Singular) {
  IntMatrix m{{1, 2}, {2, 4}};
  EXPECT_EQ(support::error_code([&] { inv_count(matrix_occupancy(m)); }), ErrorCode::Singular);
  EXPECT_EQ(support::error_code([&] { inv_fixed(matrix_from_dense(m), 2); }), ErrorCode::Singular);
}

TEST(InverseProperty, ProductWithInputIsIdentity) {
  Gen g(66);
  int checked = 0;
  for (int round = 0; round < 60; ++round) {
    std::size_t n = 1 + g.index(4);
    IntMatrix m = support::random_matrix(g, n, n, -3, 3);
    if (support::det_bruteforce(m) == 0) {
      EXPECT_EQ(support::error_code([&] { inv_count(matrix_occupancy(m)); }), ErrorCode::Singular);
      continue;
    }
    AssociativeTable inv = inv_count(matrix_occupancy(m));
    RealMatrix a(n, std::vector<double>(n));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) a[i][j] = static_cast<double>(m[i][j]);
    expect_identity(matrix_to_dense(matmul(inv, matrix_from_dense(a)), n, n));
    ++checked;
  }
  EXPECT_GT(checked, 30);
}

#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "iterlara/error.hpp"
#include "iterlara/table.hpp"
#include "iterlara/table_io.hpp"
#include "support.hpp"

using namespace iterlara;
using support::Gen;
using support::I;

namespace {

Schema ij_v() { return Schema({{"i", Kind::Int}, {"j", Kind::Int}}, {{"v", Kind::Int, I(0)}}); }

}  // namespace

TEST(Schema, RejectsDuplicateAndBadKeys) {
  EXPECT_EQ(support::error_code([] { Schema({{"a", Kind::Int}}, {{"a", Kind::Int, I(0)}}); }), ErrorCode::SchemaMismatch);
  EXPECT_EQ(support::error_code([] { Schema({{"a", Kind::Real}}, {}); }), ErrorCode::SchemaMismatch);
  EXPECT_EQ(support::error_code([] { Schema({}, {{"v", Kind::Int, Scalar{1.5}}}); }), ErrorCode::SchemaMismatch);
}

TEST(Table, NewTableSortsAndDropsDefaults) {
  auto t = new_table(ij_v(), {{{I(1), I(0)}, {I(5)}}, {{I(0), I(1)}, {I(0)}}, {{I(0), I(0)}, {I(2)}}});
  ASSERT_EQ(t.size(), 2u);
  EXPECT_EQ(t.key(0)[1], I(0));
  EXPECT_EQ(t.key(1)[0], I(1));
  EXPECT_TRUE(t.normalized());
}

TEST(Table, DuplicateKeyIsRejected) {
  EXPECT_EQ(support::error_code([] { new_table(ij_v(), {{{I(0), I(0)}, {I(1)}}, {{I(0), I(0)}, {I(2)}}}); }),
            ErrorCode::DuplicateKey);
}

TEST(Table, LookupOfAbsentKeyIsDefault) {
  Schema s({{"k", Kind::Text}}, {{"x", Kind::Real, Scalar{0.5}}, {"b", Kind::Bool, Scalar{false}}});
  auto t = new_table(s, {{{text_scalar("a")}, {Scalar{2.0}, Scalar{true}}}});
  Scalar missing = text_scalar("zz");
  auto v = t.lookup(std::span<const Scalar>(&missing, 1));
  EXPECT_EQ(v[0], Scalar{0.5});
  EXPECT_EQ(v[1], Scalar{false});
}

TEST(Table, LookupArityMismatch) {
  auto t = new_table(ij_v(), {});
  Scalar k = I(0);
  EXPECT_EQ(support::error_code([&] { t.lookup(std::span<const Scalar>(&k, 1)); }), ErrorCode::SchemaMismatch);
}

TEST(TableProperty, NormalizePreservesLookupAndIsIdempotent) {
  Gen g(11);
  for (int round = 0; round < 200; ++round) {
    std::vector<Record> recs;
    std::set<std::pair<std::int64_t, std::int64_t>> used;
    std::size_t n = g.index(8);
    for (std::size_t r = 0; r < n; ++r) {
      std::int64_t i = g.range(0, 3), j = g.range(0, 3);
      if (!used.insert({i, j}).second) continue;
      recs.push_back({{I(i), I(j)}, {I(g.coin(0.4) ? 0 : g.range(-5, 5))}});
    }
    auto raw = unnormalized_table(ij_v(), recs);
    auto norm = normalize(raw);
    for (std::int64_t i = 0; i <= 3; ++i)
      for (std::int64_t j = 0; j <= 3; ++j) {
        Scalar k[2] = {I(i), I(j)};
        EXPECT_EQ(lookup(raw, k), lookup(norm, k));
      }
    EXPECT_EQ(normalize(norm), norm);
    for (std::size_t r = 0; r < norm.size(); ++r) EXPECT_FALSE(is_default(norm.value(r), norm.schema().defaults()));
  }
}

TEST(TableIo, JsonLinesRoundTrip) {
  Schema s({{"k", Kind::Text}, {"n", Kind::Int}},
           {{"x", Kind::Real, Scalar{0.0}}, {"b", Kind::Bool, Scalar{false}}, {"t", Kind::Text, text_scalar("")}});
  auto t = new_table(s, {{{text_scalar("a b"), I(-3)}, {Scalar{0.1}, Scalar{true}, text_scalar("q\"uote")}},
                         {{text_scalar("z"), I(7)}, {Scalar{-2.5e10}, Scalar{false}, text_scalar("")}}});
  std::stringstream ss;
  write_table_jsonl(ss, t);
  auto back = read_table_jsonl(ss);
  EXPECT_EQ(back, t);
}

TEST(TableIo, CsvRoundTripProperty) {
  Gen g(5);
  for (int round = 0; round < 100; ++round) {
    auto t = support::random_table(g, {"a", "b"}, {"x", "y"}, 4, -9, 9, 10);
    std::stringstream csv, jl;
    write_table_csv(csv, t);
    write_table_jsonl(jl, t);
    auto c = read_table_csv(csv);
    auto j = read_table_jsonl(jl);
    EXPECT_EQ(c.size(), t.size());
    EXPECT_EQ(c, t);
    EXPECT_EQ(j, t);
  }
}

TEST(TableIo, CsvHeaderWithDefaults) {
  std::stringstream in("k,w,v\nkey:text,real=0.5,int\nx,0.5,3\ny,1.25,0\n");
  auto t = read_table_csv(in);
  EXPECT_EQ(t.schema().values()[0].default_value, Scalar{0.5});
  ASSERT_EQ(t.size(), 2u);  // (x: 0.5, 3) keeps v=3
  EXPECT_EQ(t.value(0)[1], I(3));
}

TEST(TableIo, DenseMatrixCsv) {
  std::stringstream in("1, 0, 2\n0, 3, 0\n");
  auto t = read_table_csv(in);
  EXPECT_EQ(t.schema(), ij_v());
  EXPECT_EQ(t.size(), 3u);
  std::stringstream r("1.5,2\n");
  EXPECT_EQ(read_table_csv(r).schema().values()[0].kind, Kind::Real);
}

TEST(TableIo, MissingFileIsIoError) {
  EXPECT_EQ(support::error_code([] { load_table_file("/nonexistent/t.csv"); }), ErrorCode::IoError);
}

TEST(TableIo, FormatTableLayout) {
  auto t = new_table(ij_v(), {{{I(0), I(1)}, {I(10)}}, {{I(2), I(0)}, {I(3)}}});
  EXPECT_EQ(format_table(t), "i  j | v\n0  1 | 10\n2  0 | 3\n");
}

TEST(Table, ApproxEqualUsesTolerance) {
  Schema s({{"i", Kind::Int}}, {{"v", Kind::Real, Scalar{0.0}}});
  auto a = new_table(s, {{{I(0)}, {Scalar{1.0}}}});
  auto b = new_table(s, {{{I(0)}, {Scalar{1.0 + 1e-12}}}});
  EXPECT_FALSE(a == b);
  EXPECT_TRUE(approx_equal(a, b, 1e-9));
  EXPECT_FALSE(approx_equal(a, b, 1e-15));
}

TEST(Table, DistinctKeyCounts) {
  auto t = new_table(ij_v(), {{{I(0), I(1)}, {I(1)}}, {{I(0), I(2)}, {I(1)}}, {{I(3), I(2)}, {I(1)}}});
  EXPECT_EQ(distinct_key_counts(t), (std::vector<std::size_t>{2, 2}));
}

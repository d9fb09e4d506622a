#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "iterlara/error.hpp"
#include "iterlara/eval.hpp"
#include "iterlara/stdlib.hpp"
#include "iterlara/table.hpp"
#include "iterlara/table_io.hpp"

namespace support {

using iterlara::AssociativeTable;
using iterlara::IntMatrix;
using iterlara::Kind;
using iterlara::Record;
using iterlara::Scalar;
using iterlara::Schema;

inline Scalar I(std::int64_t v) { return Scalar{v}; }

// Code of the iterlara::Error thrown by f, if any.
template <class F>
std::optional<iterlara::ErrorCode> error_code(F&& f) {
  try {
    f();
  } catch (const iterlara::Error& e) {
    return e.code();
  }
  return std::nullopt;
}

class Gen {
public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}
  std::int64_t range(std::int64_t lo, std::int64_t hi) { return std::uniform_int_distribution<std::int64_t>(lo, hi)(rng_); }
  bool coin(double p = 0.5) { return std::bernoulli_distribution(p)(rng_); }
  std::size_t index(std::size_t n) { return static_cast<std::size_t>(range(0, static_cast<std::int64_t>(n) - 1)); }
  std::mt19937_64& engine() { return rng_; }

private:
  std::mt19937_64 rng_;
};

// Integer table over the given key and value attributes (all int, default
// 0). Keys range over [0, key_hi], values over [lo, hi]; at most max_rows
// distinct keys.
inline AssociativeTable random_table(Gen& g, const std::vector<std::string>& keys, const std::vector<std::string>& values,
                                     std::int64_t key_hi, std::int64_t lo, std::int64_t hi, std::size_t max_rows) {
  std::vector<iterlara::KeyAttr> ka;
  for (const auto& k : keys) ka.push_back({k, Kind::Int});
  std::vector<iterlara::ValueAttr> va;
  for (const auto& v : values) va.push_back({v, Kind::Int, I(0)});
  std::map<std::vector<Scalar>, std::vector<Scalar>, std::function<bool(const std::vector<Scalar>&, const std::vector<Scalar>&)>>
      rows([](const auto& a, const auto& b) { return iterlara::compare_keys(a, b) < 0; });
  std::size_t n = g.index(max_rows + 1);
  for (std::size_t r = 0; r < n; ++r) {
    std::vector<Scalar> k, v;
    for (std::size_t i = 0; i < keys.size(); ++i) k.push_back(I(g.range(0, key_hi)));
    for (std::size_t i = 0; i < values.size(); ++i) v.push_back(I(g.range(lo, hi)));
    rows[k] = v;
  }
  std::vector<Record> recs;
  for (auto& [k, v] : rows) recs.push_back({k, v});
  return iterlara::new_table(Schema(ka, va), recs);
}

// Plain record map keyed by attribute name, for oracles.
using Row = std::map<std::string, Scalar>;

inline std::vector<Row> rows_of(const AssociativeTable& t) {
  std::vector<Row> out;
  const Schema& s = t.schema();
  for (std::size_t r = 0; r < t.size(); ++r) {
    Row row;
    for (std::size_t i = 0; i < s.key_arity(); ++i) row[s.keys()[i].name] = t.key(r)[i];
    for (std::size_t i = 0; i < s.value_arity(); ++i) row[s.values()[i].name] = t.value(r)[i];
    out.push_back(row);
  }
  return out;
}

// Builds a normalized table over `schema` from name-keyed rows.
inline AssociativeTable table_of(const Schema& schema, const std::vector<Row>& rows) {
  std::vector<Record> recs;
  for (const auto& row : rows) {
    Record r;
    for (const auto& k : schema.keys()) r.key.push_back(row.at(k.name));
    bool all_default = true;
    for (const auto& v : schema.values()) {
      auto it = row.find(v.name);
      r.value.push_back(it == row.end() ? v.default_value : it->second);
      if (!iterlara::same(r.value.back(), v.default_value)) all_default = false;
    }
    if (!all_default) recs.push_back(r);
  }
  return iterlara::new_table(schema, recs);
}

using Combine = std::function<Scalar(const Scalar&, const Scalar&)>;

// Union by direct folding: group both sides on the shared keys and fold
// every value attribute with `plus`, starting from the attribute default.
inline AssociativeTable union_oracle(const AssociativeTable& a, const AssociativeTable& b, const Combine& plus) {
  const Schema& sa = a.schema();
  const Schema& sb = b.schema();
  std::vector<iterlara::KeyAttr> keys;
  for (const auto& k : sa.keys())
    if (sb.key_index(k.name)) keys.push_back(k);
  std::vector<iterlara::ValueAttr> values = sa.values();
  for (const auto& v : sb.values())
    if (!sa.value_index(v.name)) values.push_back(v);
  Schema out(keys, values);

  std::map<std::vector<Scalar>, Row, std::function<bool(const std::vector<Scalar>&, const std::vector<Scalar>&)>> acc(
      [](const auto& x, const auto& y) { return iterlara::compare_keys(x, y) < 0; });
  auto absorb = [&](const AssociativeTable& t) {
    for (const Row& r : rows_of(t)) {
      std::vector<Scalar> k;
      for (const auto& ka : keys) k.push_back(r.at(ka.name));
      auto [it, fresh] = acc.try_emplace(k);
      Row& cell = it->second;
      if (fresh) {
        for (const auto& ka : keys) cell[ka.name] = r.at(ka.name);
        for (const auto& v : values) cell[v.name] = v.default_value;
      }
      for (const auto& v : t.schema().values()) cell[v.name] = plus(cell[v.name], r.at(v.name));
    }
  };
  absorb(a);
  absorb(b);
  std::vector<Row> rows;
  for (auto& [k, r] : acc) rows.push_back(r);
  return table_of(out, rows);
}

// Relaxed join by nested loops over the stored records.
inline AssociativeTable join_oracle(const AssociativeTable& a, const AssociativeTable& b, const Combine& times) {
  const Schema& sa = a.schema();
  const Schema& sb = b.schema();
  std::vector<iterlara::KeyAttr> keys = sa.keys();
  for (const auto& k : sb.keys())
    if (!sa.key_index(k.name)) keys.push_back(k);
  std::vector<iterlara::ValueAttr> values = sa.values();
  for (const auto& v : sb.values())
    if (!sa.value_index(v.name)) values.push_back(v);
  std::vector<Row> rows;
  for (const Row& ra : rows_of(a))
    for (const Row& rb : rows_of(b)) {
      bool match = true;
      for (const auto& k : sb.keys())
        if (sa.key_index(k.name) && !iterlara::same(ra.at(k.name), rb.at(k.name))) match = false;
      if (!match) continue;
      Row r = ra;
      for (const auto& [n, v] : rb) {
        if (sa.value_index(n))
          r[n] = times(ra.at(n), v);
        else
          r.emplace(n, v);
      }
      rows.push_back(r);
    }
  return table_of(Schema(keys, values), rows);
}

// Natural join of the stored records: shared key and value attributes must
// be equal, every attribute is kept once.
inline AssociativeTable natural_join_oracle(const AssociativeTable& a, const AssociativeTable& b) {
  const Schema& sa = a.schema();
  const Schema& sb = b.schema();
  std::vector<iterlara::KeyAttr> keys = sa.keys();
  for (const auto& k : sb.keys())
    if (!sa.key_index(k.name)) keys.push_back(k);
  std::vector<iterlara::ValueAttr> values = sa.values();
  for (const auto& v : sb.values())
    if (!sa.value_index(v.name)) values.push_back(v);
  std::vector<Row> rows;
  for (const Row& ra : rows_of(a))
    for (const Row& rb : rows_of(b)) {
      bool match = true;
      for (const auto& [n, v] : rb)
        if (ra.count(n) && !iterlara::same(ra.at(n), v)) match = false;
      if (!match) continue;
      Row r = ra;
      r.insert(rb.begin(), rb.end());
      rows.push_back(r);
    }
  return table_of(Schema(keys, values), rows);
}

inline std::int64_t det_bruteforce(const IntMatrix& m) {
  std::size_t n = m.size();
  if (n == 0) return 1;
  std::vector<std::size_t> p(n);
  for (std::size_t i = 0; i < n; ++i) p[i] = i;
  std::int64_t total = 0;
  do {
    int inversions = 0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        if (p[i] > p[j]) ++inversions;
    std::int64_t term = inversions % 2 ? -1 : 1;
    for (std::size_t i = 0; i < n; ++i) term *= m[i][p[i]];
    total += term;
  } while (std::next_permutation(p.begin(), p.end()));
  return total;
}

template <class M>
M matmul_oracle(const M& a, const M& b) {
  std::size_t rows = a.size(), inner = b.size(), cols = b.empty() ? 0 : b[0].size();
  M c(rows, typename M::value_type(cols));
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j)
      for (std::size_t k = 0; k < inner; ++k) c[i][j] += a[i][k] * b[k][j];
  return c;
}

inline IntMatrix random_matrix(Gen& g, std::size_t rows, std::size_t cols, std::int64_t lo, std::int64_t hi) {
  IntMatrix m(rows, std::vector<std::int64_t>(cols));
  for (auto& r : m)
    for (auto& x : r) x = g.range(lo, hi);
  return m;
}

// Straight-line statements evaluated one after another in a growing
// environment.
inline AssociativeTable sequential_oracle(const std::vector<std::pair<std::string, iterlara::Expression>>& stmts,
                                          const std::string& result, iterlara::Environment env) {
  for (const auto& [n, e] : stmts) env[n] = iterlara::eval(e, env);
  return env.at(result);
}

}  // namespace support

namespace iterlara {
// Readable tables in test failure messages.
inline void PrintTo(const AssociativeTable& t, std::ostream* os) { *os << "\n" << t.schema().to_string() << "\n" << format_table(t); }
}  // namespace iterlara

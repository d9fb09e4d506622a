#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "iterlara/scalar.hpp"

namespace iterlara {

struct KeyAttr {
  std::string name;
  Kind kind = Kind::Int;
  friend bool operator==(const KeyAttr&, const KeyAttr&) = default;
};

struct ValueAttr {
  std::string name;
  Kind kind = Kind::Int;
  Scalar default_value = std::int64_t{0};
  friend bool operator==(const ValueAttr& a, const ValueAttr& b) {
    return a.name == b.name && a.kind == b.kind && same(a.default_value, b.default_value);
  }
};

class Schema {
public:
  Schema() = default;
  // Validates unique names, key kinds (int|text) and default kinds.
  Schema(std::vector<KeyAttr> keys, std::vector<ValueAttr> values);

  const std::vector<KeyAttr>& keys() const { return keys_; }
  const std::vector<ValueAttr>& values() const { return values_; }
  std::size_t key_arity() const { return keys_.size(); }
  std::size_t value_arity() const { return values_.size(); }
  const std::vector<Scalar>& defaults() const { return defaults_; }

  std::optional<std::size_t> key_index(std::string_view name) const;
  std::optional<std::size_t> value_index(std::string_view name) const;
  bool has_attr(std::string_view name) const;

  // "[a:int, c:int] -> [x:int=0, z:int=0]"
  std::string to_string() const;

  friend bool operator==(const Schema& a, const Schema& b) {
    return a.keys_ == b.keys_ && a.values_ == b.values_;
  }

private:
  std::vector<KeyAttr> keys_;
  std::vector<ValueAttr> values_;
  std::vector<Scalar> defaults_;
};

struct Record {
  std::vector<Scalar> key;
  std::vector<Scalar> value;
};

struct StateParts;

namespace detail {

struct Rows {
  std::size_t n = 0;
  std::vector<Scalar> keys;  // n * key_arity, row-major, sorted by key
  std::vector<Scalar> vals;  // n * value_arity
  bool normalized = true;
};

// Rows are either built eagerly or produced on first access by a thunk
// (used by partitioned loop-state tables, see state.hpp).
struct Storage {
  mutable Rows rows;
  mutable std::function<Rows()> thunk;
  mutable std::once_flag once;
  std::shared_ptr<const StateParts> parts;

  const Rows& get() const;
};

}  // namespace detail

class AssociativeTable {
public:
  // Keyless table without value attributes and without records.
  AssociativeTable();
  explicit AssociativeTable(Schema schema);

  const Schema& schema() const { return *schema_; }
  const std::shared_ptr<const Schema>& schema_ptr() const { return schema_; }

  std::size_t size() const { return rows().n; }
  bool empty() const { return size() == 0; }

  std::span<const Scalar> key(std::size_t i) const {
    const auto& r = rows();
    std::size_t w = schema_->key_arity();
    return {r.keys.data() + i * w, w};
  }
  std::span<const Scalar> value(std::size_t i) const {
    const auto& r = rows();
    std::size_t w = schema_->value_arity();
    return {r.vals.data() + i * w, w};
  }
  Record record(std::size_t i) const;
  std::vector<Record> records() const;

  // Index of the record with exactly this key (no validation).
  std::optional<std::size_t> find(std::span<const Scalar> key) const;
  // Half-open index range of records whose leading key attributes equal `prefix`.
  std::pair<std::size_t, std::size_t> prefix_range(std::span<const Scalar> prefix) const;
  // Stored value tuple, or the default tuple when absent. Validates arity and kinds.
  std::vector<Scalar> lookup(std::span<const Scalar> key) const;

  // True when no stored record carries the default tuple.
  bool normalized() const { return rows().normalized; }

  // Non-null when this table is a loop-state table held in partitioned form.
  const StateParts* state_parts() const;

  // Construction helpers used by the builder and the state module.
  static AssociativeTable from_rows(std::shared_ptr<const Schema> schema, detail::Rows rows);
  static AssociativeTable lazy(std::shared_ptr<const Schema> schema, std::function<detail::Rows()> thunk,
                               std::shared_ptr<const StateParts> parts);

private:
  const detail::Rows& rows() const { return storage_->get(); }

  std::shared_ptr<const Schema> schema_;
  std::shared_ptr<const detail::Storage> storage_;
};

// Collects records, then sorts, checks key uniqueness and (optionally) drops
// default-valued records.
class TableBuilder {
public:
  explicit TableBuilder(Schema schema);
  explicit TableBuilder(std::shared_ptr<const Schema> schema);

  const Schema& schema() const { return *schema_; }
  void reserve(std::size_t n);
  // Checks arity and kinds; throws SchemaMismatch.
  void add(std::span<const Scalar> key, std::span<const Scalar> value);
  void add(const Record& r) { add(r.key, r.value); }
  // Caller guarantees arity and kinds.
  void add_unchecked(std::span<const Scalar> key, std::span<const Scalar> value);
  std::size_t size() const { return rows_.n; }

  // Throws DuplicateKey when two records share a key.
  AssociativeTable build(bool drop_defaults = true);

private:
  std::shared_ptr<const Schema> schema_;
  detail::Rows rows_;
};

// new_table: normalized table holding exactly the given records.
AssociativeTable new_table(Schema schema, const std::vector<Record>& records);
// Same, but default-valued records are kept (for exercising normalize()).
AssociativeTable unnormalized_table(Schema schema, const std::vector<Record>& records);
std::vector<Scalar> lookup(const AssociativeTable& t, std::span<const Scalar> key);
AssociativeTable normalize(const AssociativeTable& t);

int compare_keys(std::span<const Scalar> a, std::span<const Scalar> b);
bool is_default(std::span<const Scalar> value, const std::vector<Scalar>& defaults);

// Exact structural equality: same schema, same records.
bool operator==(const AssociativeTable& a, const AssociativeTable& b);
// Same schema and keys; values equal with reals within `tol`.
bool approx_equal(const AssociativeTable& a, const AssociativeTable& b, double tol = 1e-9);

// Number of distinct values stored in each key column.
std::vector<std::size_t> distinct_key_counts(const AssociativeTable& t);

}  // namespace iterlara

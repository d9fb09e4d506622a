#include "iterlara/table.hpp"

#include <algorithm>
#include <numeric>
#include <set>

#include "iterlara/error.hpp"
#include "iterlara/state.hpp"

namespace iterlara {

Schema::Schema(std::vector<KeyAttr> keys, std::vector<ValueAttr> values)
    : keys_(std::move(keys)), values_(std::move(values)) {
  std::set<std::string_view> seen;
  for (const auto& k : keys_) {
    if (k.name.empty()) fail(ErrorCode::SchemaMismatch, "empty attribute name");
    if (k.kind != Kind::Int && k.kind != Kind::Text)
      fail(ErrorCode::SchemaMismatch, "key attribute '" + k.name + "' must be int or text");
    if (!seen.insert(k.name).second) fail(ErrorCode::SchemaMismatch, "duplicate attribute '" + k.name + "'");
  }
  for (auto& v : values_) {
    if (v.name.empty()) fail(ErrorCode::SchemaMismatch, "empty attribute name");
    if (!seen.insert(v.name).second) fail(ErrorCode::SchemaMismatch, "duplicate attribute '" + v.name + "'");
    if (kind_of(v.default_value) != v.kind) {
      if (v.kind == Kind::Real && kind_of(v.default_value) == Kind::Int)
        v.default_value = coerce(v.default_value, Kind::Real);
      else
        fail(ErrorCode::SchemaMismatch, "default of '" + v.name + "' is not of kind " + kind_name(v.kind));
    }
    defaults_.push_back(v.default_value);
  }
}

std::optional<std::size_t> Schema::key_index(std::string_view name) const {
  for (std::size_t i = 0; i < keys_.size(); ++i)
    if (keys_[i].name == name) return i;
  return std::nullopt;
}

std::optional<std::size_t> Schema::value_index(std::string_view name) const {
  for (std::size_t i = 0; i < values_.size(); ++i)
    if (values_[i].name == name) return i;
  return std::nullopt;
}

bool Schema::has_attr(std::string_view name) const {
  return key_index(name).has_value() || value_index(name).has_value();
}

std::string Schema::to_string() const {
  std::string s = "[";
  for (std::size_t i = 0; i < keys_.size(); ++i) {
    if (i) s += ", ";
    s += keys_[i].name + ":" + kind_name(keys_[i].kind);
  }
  s += "] -> [";
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (i) s += ", ";
    s += values_[i].name + ":" + kind_name(values_[i].kind) + "=" + iterlara::to_string(values_[i].default_value);
  }
  return s + "]";
}

const detail::Rows& detail::Storage::get() const {
  if (thunk) {
    std::call_once(once, [this] {
      rows = thunk();
      thunk = nullptr;
    });
  }
  return rows;
}

namespace {

std::shared_ptr<const Schema> empty_schema() {
  static const auto s = std::make_shared<const Schema>();
  return s;
}

std::shared_ptr<const detail::Storage> empty_storage() {
  static const auto s = std::make_shared<const detail::Storage>();
  return s;
}

}  // namespace

AssociativeTable::AssociativeTable() : schema_(empty_schema()), storage_(empty_storage()) {}

AssociativeTable::AssociativeTable(Schema schema)
    : schema_(std::make_shared<const Schema>(std::move(schema))), storage_(empty_storage()) {}

AssociativeTable AssociativeTable::from_rows(std::shared_ptr<const Schema> schema, detail::Rows rows) {
  AssociativeTable t;
  t.schema_ = std::move(schema);
  auto st = std::make_shared<detail::Storage>();
  st->rows = std::move(rows);
  t.storage_ = std::move(st);
  return t;
}

AssociativeTable AssociativeTable::lazy(std::shared_ptr<const Schema> schema, std::function<detail::Rows()> thunk,
                                        std::shared_ptr<const StateParts> parts) {
  AssociativeTable t;
  t.schema_ = std::move(schema);
  auto st = std::make_shared<detail::Storage>();
  st->thunk = std::move(thunk);
  st->parts = std::move(parts);
  t.storage_ = std::move(st);
  return t;
}

const StateParts* AssociativeTable::state_parts() const { return storage_->parts.get(); }

Record AssociativeTable::record(std::size_t i) const {
  auto k = key(i);
  auto v = value(i);
  return Record{{k.begin(), k.end()}, {v.begin(), v.end()}};
}

std::vector<Record> AssociativeTable::records() const {
  std::vector<Record> out;
  out.reserve(size());
  for (std::size_t i = 0; i < size(); ++i) out.push_back(record(i));
  return out;
}

int compare_keys(std::span<const Scalar> a, std::span<const Scalar> b) {
  std::size_t n = std::min(a.size(), b.size());
  for (std::size_t i = 0; i < n; ++i) {
    int c = compare(a[i], b[i]);
    if (c) return c;
  }
  return a.size() < b.size() ? -1 : (a.size() > b.size() ? 1 : 0);
}

bool is_default(std::span<const Scalar> value, const std::vector<Scalar>& defaults) {
  for (std::size_t i = 0; i < value.size(); ++i)
    if (!same(value[i], defaults[i])) return false;
  return true;
}

std::optional<std::size_t> AssociativeTable::find(std::span<const Scalar> k) const {
  std::size_t lo = 0, hi = size();
  while (lo < hi) {
    std::size_t mid = (lo + hi) / 2;
    int c = compare_keys(key(mid), k);
    if (c == 0) return mid;
    if (c < 0)
      lo = mid + 1;
    else
      hi = mid;
  }
  return std::nullopt;
}

std::pair<std::size_t, std::size_t> AssociativeTable::prefix_range(std::span<const Scalar> prefix) const {
  auto cmp_prefix = [&](std::size_t i) { return compare_keys(key(i).first(prefix.size()), prefix); };
  std::size_t lo = 0, hi = size();
  while (lo < hi) {
    std::size_t mid = (lo + hi) / 2;
    if (cmp_prefix(mid) < 0)
      lo = mid + 1;
    else
      hi = mid;
  }
  std::size_t first = lo;
  hi = size();
  while (lo < hi) {
    std::size_t mid = (lo + hi) / 2;
    if (cmp_prefix(mid) <= 0)
      lo = mid + 1;
    else
      hi = mid;
  }
  return {first, lo};
}

std::vector<Scalar> AssociativeTable::lookup(std::span<const Scalar> k) const {
  const Schema& s = schema();
  if (k.size() != s.key_arity())
    fail(ErrorCode::SchemaMismatch, "lookup key has arity " + std::to_string(k.size()) + ", schema expects " +
                                        std::to_string(s.key_arity()));
  for (std::size_t i = 0; i < k.size(); ++i)
    if (kind_of(k[i]) != s.keys()[i].kind)
      fail(ErrorCode::SchemaMismatch, "lookup key component '" + s.keys()[i].name + "' has the wrong kind");
  if (auto i = find(k)) {
    auto v = value(*i);
    return {v.begin(), v.end()};
  }
  return s.defaults();
}

TableBuilder::TableBuilder(Schema schema) : schema_(std::make_shared<const Schema>(std::move(schema))) {}
TableBuilder::TableBuilder(std::shared_ptr<const Schema> schema) : schema_(std::move(schema)) {}

void TableBuilder::reserve(std::size_t n) {
  rows_.keys.reserve(n * schema_->key_arity());
  rows_.vals.reserve(n * schema_->value_arity());
}

void TableBuilder::add(std::span<const Scalar> key, std::span<const Scalar> value) {
  const Schema& s = *schema_;
  if (key.size() != s.key_arity() || value.size() != s.value_arity())
    fail(ErrorCode::SchemaMismatch, "record arity (" + std::to_string(key.size()) + "," +
                                        std::to_string(value.size()) + ") does not match schema " + s.to_string());
  for (std::size_t i = 0; i < key.size(); ++i)
    if (kind_of(key[i]) != s.keys()[i].kind)
      fail(ErrorCode::SchemaMismatch, "key '" + s.keys()[i].name + "' expects " + kind_name(s.keys()[i].kind) +
                                          ", got " + kind_name(kind_of(key[i])));
  for (std::size_t i = 0; i < value.size(); ++i)
    if (kind_of(value[i]) != s.values()[i].kind)
      fail(ErrorCode::SchemaMismatch, "value '" + s.values()[i].name + "' expects " +
                                          kind_name(s.values()[i].kind) + ", got " + kind_name(kind_of(value[i])));
  add_unchecked(key, value);
}

void TableBuilder::add_unchecked(std::span<const Scalar> key, std::span<const Scalar> value) {
  rows_.keys.insert(rows_.keys.end(), key.begin(), key.end());
  rows_.vals.insert(rows_.vals.end(), value.begin(), value.end());
  ++rows_.n;
}

namespace {

std::string key_text(std::span<const Scalar> k) {
  std::string s = "(";
  for (std::size_t i = 0; i < k.size(); ++i) {
    if (i) s += ",";
    s += to_string(k[i]);
  }
  return s + ")";
}

}  // namespace

AssociativeTable TableBuilder::build(bool drop_defaults) {
  const std::size_t kw = schema_->key_arity();
  const std::size_t vw = schema_->value_arity();
  detail::Rows rows = std::move(rows_);
  rows_ = detail::Rows{};
  auto key_at = [&](const detail::Rows& r, std::size_t i) {
    return std::span<const Scalar>(r.keys.data() + i * kw, kw);
  };
  auto val_at = [&](const detail::Rows& r, std::size_t i) {
    return std::span<const Scalar>(r.vals.data() + i * vw, vw);
  };

  if (drop_defaults) {
    const auto& defs = schema_->defaults();
    std::size_t out = 0;
    for (std::size_t i = 0; i < rows.n; ++i) {
      if (is_default(val_at(rows, i), defs)) continue;
      if (out != i) {
        std::copy_n(rows.keys.begin() + i * kw, kw, rows.keys.begin() + out * kw);
        std::copy_n(rows.vals.begin() + i * vw, vw, rows.vals.begin() + out * vw);
      }
      ++out;
    }
    rows.n = out;
    rows.keys.resize(out * kw);
    rows.vals.resize(out * vw);
    rows.normalized = true;
  } else {
    const auto& defs = schema_->defaults();
    rows.normalized = true;
    for (std::size_t i = 0; i < rows.n && rows.normalized; ++i)
      if (is_default(val_at(rows, i), defs)) rows.normalized = false;
  }

  bool sorted = true;
  for (std::size_t i = 1; i < rows.n; ++i) {
    int c = compare_keys(key_at(rows, i - 1), key_at(rows, i));
    if (c == 0) fail(ErrorCode::DuplicateKey, "duplicate key " + key_text(key_at(rows, i)));
    if (c > 0) {
      sorted = false;
      break;
    }
  }
  if (!sorted) {
    std::vector<std::size_t> order(rows.n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return compare_keys(key_at(rows, a), key_at(rows, b)) < 0;
    });
    detail::Rows sorted_rows;
    sorted_rows.n = rows.n;
    sorted_rows.normalized = rows.normalized;
    sorted_rows.keys.reserve(rows.keys.size());
    sorted_rows.vals.reserve(rows.vals.size());
    for (std::size_t i : order) {
      auto k = key_at(rows, i);
      auto v = val_at(rows, i);
      sorted_rows.keys.insert(sorted_rows.keys.end(), k.begin(), k.end());
      sorted_rows.vals.insert(sorted_rows.vals.end(), v.begin(), v.end());
    }
    rows = std::move(sorted_rows);
    for (std::size_t i = 1; i < rows.n; ++i)
      if (compare_keys(key_at(rows, i - 1), key_at(rows, i)) == 0)
        fail(ErrorCode::DuplicateKey, "duplicate key " + key_text(key_at(rows, i)));
  }
  return AssociativeTable::from_rows(schema_, std::move(rows));
}

AssociativeTable new_table(Schema schema, const std::vector<Record>& records) {
  TableBuilder b(std::move(schema));
  b.reserve(records.size());
  for (const auto& r : records) b.add(r);
  return b.build(true);
}

AssociativeTable unnormalized_table(Schema schema, const std::vector<Record>& records) {
  TableBuilder b(std::move(schema));
  for (const auto& r : records) b.add(r);
  return b.build(false);
}

std::vector<Scalar> lookup(const AssociativeTable& t, std::span<const Scalar> key) { return t.lookup(key); }

AssociativeTable normalize(const AssociativeTable& t) {
  if (t.normalized()) return t;
  TableBuilder b(t.schema_ptr());
  for (std::size_t i = 0; i < t.size(); ++i) b.add_unchecked(t.key(i), t.value(i));
  return b.build(true);
}

bool operator==(const AssociativeTable& a, const AssociativeTable& b) {
  if (!(a.schema() == b.schema()) || a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (compare_keys(a.key(i), b.key(i)) != 0) return false;
    auto va = a.value(i), vb = b.value(i);
    for (std::size_t j = 0; j < va.size(); ++j)
      if (!same(va[j], vb[j])) return false;
  }
  return true;
}

bool approx_equal(const AssociativeTable& a, const AssociativeTable& b, double tol) {
  if (!(a.schema() == b.schema())) return false;
  // Records may differ in presence when a value is within tol of the default;
  // compare through lookups over the union of stored keys.
  auto check = [&](const AssociativeTable& x, const AssociativeTable& y) {
    for (std::size_t i = 0; i < x.size(); ++i) {
      auto vx = x.value(i);
      auto vy = y.lookup(x.key(i));
      for (std::size_t j = 0; j < vx.size(); ++j)
        if (!close(vx[j], vy[j], tol)) return false;
    }
    return true;
  };
  return check(a, b) && check(b, a);
}

std::vector<std::size_t> distinct_key_counts(const AssociativeTable& t) {
  std::size_t kw = t.schema().key_arity();
  std::vector<std::size_t> out(kw, 0);
  for (std::size_t c = 0; c < kw; ++c) {
    std::vector<Scalar> col;
    col.reserve(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) col.push_back(t.key(i)[c]);
    std::sort(col.begin(), col.end(), less);
    out[c] = std::unique(col.begin(), col.end(), same) - col.begin();
  }
  return out;
}

}  // namespace iterlara

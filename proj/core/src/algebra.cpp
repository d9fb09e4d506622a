#include "iterlara/algebra.hpp"

#include <algorithm>
#include <numeric>

#include "iterlara/error.hpp"

namespace iterlara {

namespace {

using Row = std::span<const Scalar>;

// Rows of a table ordered by a subset of its key columns.
class GroupedView {
public:
  GroupedView(const AssociativeTable& t, std::vector<std::size_t> cols) : t_(t), cols_(std::move(cols)) {
    for (std::size_t i = 0; i < cols_.size(); ++i)
      if (cols_[i] != i) identity_ = false;
    if (!identity_) {
      order_.resize(t.size());
      std::iota(order_.begin(), order_.end(), 0);
      std::stable_sort(order_.begin(), order_.end(), [&](std::size_t a, std::size_t b) {
        return compare_rows(a, b) < 0;
      });
    }
  }

  std::size_t size() const { return t_.size(); }
  std::size_t row(std::size_t pos) const { return identity_ ? pos : order_[pos]; }
  const Scalar& col(std::size_t r, std::size_t c) const { return t_.key(r)[cols_[c]]; }

  // Compares row r's grouped key with an explicit probe tuple.
  int compare_probe(std::size_t r, const std::vector<Scalar>& probe) const {
    for (std::size_t c = 0; c < cols_.size(); ++c) {
      int x = compare(col(r, c), probe[c]);
      if (x) return x;
    }
    return 0;
  }

  std::pair<std::size_t, std::size_t> range(const std::vector<Scalar>& probe) const {
    if (identity_) return t_.prefix_range(probe);
    std::size_t lo = 0, hi = size();
    while (lo < hi) {
      std::size_t mid = (lo + hi) / 2;
      if (compare_probe(row(mid), probe) < 0)
        lo = mid + 1;
      else
        hi = mid;
    }
    std::size_t first = lo;
    hi = size();
    while (lo < hi) {
      std::size_t mid = (lo + hi) / 2;
      if (compare_probe(row(mid), probe) <= 0)
        lo = mid + 1;
      else
        hi = mid;
    }
    return {first, lo};
  }

  std::vector<Scalar> group_key(std::size_t r) const {
    std::vector<Scalar> k;
    k.reserve(cols_.size());
    for (std::size_t c = 0; c < cols_.size(); ++c) k.push_back(col(r, c));
    return k;
  }

private:
  int compare_rows(std::size_t a, std::size_t b) const {
    for (std::size_t c = 0; c < cols_.size(); ++c) {
      int x = compare(col(a, c), col(b, c));
      if (x) return x;
    }
    return 0;
  }

  const AssociativeTable& t_;
  std::vector<std::size_t> cols_;
  bool identity_ = true;
  std::vector<std::size_t> order_;
};

int compare_groups(const GroupedView& a, std::size_t ra, const GroupedView& b, std::size_t rb, std::size_t n) {
  for (std::size_t c = 0; c < n; ++c) {
    int x = compare(a.col(ra, c), b.col(rb, c));
    if (x) return x;
  }
  return 0;
}

void require_kind(const BinaryFn& fn, const ValueAttr& v) {
  if (!fn.supports(v.kind))
    fail(ErrorCode::SchemaMismatch, "function '" + fn.name + "' is not defined on " + kind_name(v.kind) +
                                        " attribute '" + v.name + "'");
}

void check_shared_value(const ValueAttr& x, const ValueAttr& y) {
  if (x.kind != y.kind || !same(x.default_value, y.default_value))
    fail(ErrorCode::SchemaMismatch, "shared value attribute '" + x.name + "' differs in kind or default (" +
                                        kind_name(x.kind) + "=" + to_string(x.default_value) + " vs " +
                                        kind_name(y.kind) + "=" + to_string(y.default_value) + ")");
}

struct SharedKeys {
  std::vector<std::size_t> a, b;  // positions, in A's order
};

SharedKeys shared_keys(const Schema& sa, const Schema& sb) {
  SharedKeys s;
  for (std::size_t i = 0; i < sa.key_arity(); ++i) {
    if (auto j = sb.key_index(sa.keys()[i].name)) {
      if (sa.keys()[i].kind != sb.keys()[*j].kind)
        fail(ErrorCode::SchemaMismatch, "shared key '" + sa.keys()[i].name + "' has different kinds");
      s.a.push_back(i);
      s.b.push_back(*j);
    }
  }
  return s;
}

}  // namespace

// ---------------------------------------------------------------------- union

AssociativeTable union_tables(const AssociativeTable& a, const AssociativeTable& b, const BinaryFn& plus,
                              OpStats* stats) {
  const Schema& sa = a.schema();
  const Schema& sb = b.schema();
  if (plus.pairing) fail(ErrorCode::InvalidArgument, "pairing cannot be used as a union function");
  SharedKeys sk = shared_keys(sa, sb);
  if (sk.a.empty() && sa.key_arity() > 0 && sb.key_arity() > 0)
    fail(ErrorCode::NoCommonKeys, "union of " + sa.to_string() + " and " + sb.to_string() + " shares no key");

  std::vector<KeyAttr> keys;
  for (auto i : sk.a) keys.push_back(sa.keys()[i]);
  std::vector<ValueAttr> vals = sa.values();
  std::vector<std::size_t> b_to_res(sb.value_arity());
  for (std::size_t j = 0; j < sb.value_arity(); ++j) {
    const ValueAttr& v = sb.values()[j];
    if (auto i = sa.value_index(v.name)) {
      check_shared_value(sa.values()[*i], v);
      b_to_res[j] = *i;
    } else {
      b_to_res[j] = vals.size();
      vals.push_back(v);
    }
  }
  for (const auto& v : vals) require_kind(plus, v);
  auto schema = std::make_shared<const Schema>(keys, vals);
  const auto& defs = schema->defaults();

  GroupedView va(a, sk.a), vb(b, sk.b);
  const std::size_t nk = sk.a.size(), nv = vals.size();
  std::vector<Scalar> acc(nv);
  std::vector<char> touched(nv);
  TableBuilder out(schema);
  std::uint64_t apps = 0;

  auto fold = [&](Row v, const std::vector<std::size_t>* map) {
    for (std::size_t j = 0; j < v.size(); ++j) {
      std::size_t r = map ? (*map)[j] : j;
      acc[r] = touched[r] ? plus.apply(acc[r], v[j]) : v[j];
      touched[r] = 1;
    }
    ++apps;
  };

  std::size_t ia = 0, ib = 0;
  while (ia < va.size() || ib < vb.size()) {
    int c;
    if (ia == va.size())
      c = 1;
    else if (ib == vb.size())
      c = -1;
    else
      c = compare_groups(va, va.row(ia), vb, vb.row(ib), nk);
    std::vector<Scalar> gk = c <= 0 ? va.group_key(va.row(ia)) : vb.group_key(vb.row(ib));
    std::fill(touched.begin(), touched.end(), 0);
    if (c <= 0)
      while (ia < va.size() && va.compare_probe(va.row(ia), gk) == 0) fold(a.value(va.row(ia++)), nullptr);
    if (c >= 0)
      while (ib < vb.size() && vb.compare_probe(vb.row(ib), gk) == 0) fold(b.value(vb.row(ib++)), &b_to_res);
    for (std::size_t r = 0; r < nv; ++r)
      if (!touched[r]) acc[r] = defs[r];
    out.add_unchecked(gk, acc);
  }
  if (stats) stats->applications += apps;
  return out.build(true);
}

// ---------------------------------------------------------------------- joins

namespace {

struct JoinPlan {
  SharedKeys sk;
  std::vector<std::size_t> b_excl_keys;
  std::vector<std::pair<std::size_t, std::size_t>> shared_vals;  // (A pos, B pos)
  std::vector<std::size_t> b_excl_vals;
  bool sparse = true;
};

JoinPlan plan_join(const Schema& sa, const Schema& sb, const BinaryFn& times, bool relaxed) {
  JoinPlan p;
  for (const auto& k : sa.keys())
    if (sb.value_index(k.name)) fail(ErrorCode::KeyValueClash, "'" + k.name + "' is a key of A but a value of B");
  for (const auto& k : sb.keys())
    if (sa.value_index(k.name)) fail(ErrorCode::KeyValueClash, "'" + k.name + "' is a key of B but a value of A");
  p.sk = shared_keys(sa, sb);
  for (std::size_t j = 0; j < sb.key_arity(); ++j)
    if (!sa.key_index(sb.keys()[j].name)) p.b_excl_keys.push_back(j);
  for (std::size_t i = 0; i < sa.value_arity(); ++i)
    if (auto j = sb.value_index(sa.values()[i].name)) {
      check_shared_value(sa.values()[i], sb.values()[*j]);
      p.shared_vals.push_back({i, *j});
    }
  for (std::size_t j = 0; j < sb.value_arity(); ++j)
    if (!sa.value_index(sb.values()[j].name)) p.b_excl_vals.push_back(j);
  if (p.shared_vals.empty() && !times.pairing)
    fail(ErrorCode::NoCommonValues, std::string(relaxed ? "relaxed" : "strict") + " join of " + sa.to_string() +
                                        " and " + sb.to_string() + " shares no value attribute");
  if (!times.pairing)
    for (auto [i, j] : p.shared_vals) {
      require_kind(times, sa.values()[i]);
      if (!times.annihilates(sa.values()[i].kind, sa.values()[i].default_value)) p.sparse = false;
    }
  return p;
}

AssociativeTable join_impl(const AssociativeTable& a, const AssociativeTable& b, const BinaryFn& times, bool relaxed,
                           OpStats* stats) {
  const Schema& sa = a.schema();
  const Schema& sb = b.schema();
  JoinPlan p = plan_join(sa, sb, times, relaxed);

  std::vector<KeyAttr> keys = sa.keys();
  for (auto j : p.b_excl_keys) keys.push_back(sb.keys()[j]);
  std::vector<ValueAttr> vals;
  if (relaxed) {
    vals = sa.values();
    for (auto j : p.b_excl_vals) vals.push_back(sb.values()[j]);
  } else {
    for (auto [i, j] : p.shared_vals) vals.push_back(sa.values()[i]);
  }
  auto schema = std::make_shared<const Schema>(keys, vals);
  TableBuilder out(schema);
  std::uint64_t apps = 0;

  std::vector<Scalar> key(keys.size()), val(vals.size());
  // Combines one pair of value tuples; false when pairing rejects it.
  auto combine = [&](Row av, Row bv) {
    std::size_t w = 0;
    if (relaxed) {
      std::copy(av.begin(), av.end(), val.begin());
      for (auto [i, j] : p.shared_vals) {
        if (times.pairing) {
          if (!same(av[i], bv[j])) return false;
        } else {
          val[i] = times.apply(av[i], bv[j]);
        }
      }
      w = av.size();
      for (auto j : p.b_excl_vals) val[w++] = bv[j];
    } else {
      for (auto [i, j] : p.shared_vals) {
        if (times.pairing) {
          if (!same(av[i], bv[j])) return false;
          val[w++] = av[i];
        } else {
          val[w++] = times.apply(av[i], bv[j]);
        }
      }
    }
    return true;
  };

  if (p.sparse) {
    GroupedView vb(b, p.sk.b);
    std::vector<Scalar> probe(p.sk.a.size());
    for (std::size_t ra = 0; ra < a.size(); ++ra) {
      Row ak = a.key(ra);
      for (std::size_t c = 0; c < p.sk.a.size(); ++c) probe[c] = ak[p.sk.a[c]];
      auto [lo, hi] = vb.range(probe);
      for (std::size_t pos = lo; pos < hi; ++pos) {
        std::size_t rb = vb.row(pos);
        ++apps;
        if (!combine(a.value(ra), b.value(rb))) continue;
        std::copy(ak.begin(), ak.end(), key.begin());
        Row bk = b.key(rb);
        std::size_t w = ak.size();
        for (auto j : p.b_excl_keys) key[w++] = bk[j];
        out.add_unchecked(key, val);
      }
    }
  } else {
    // Dense fallback: every point of the cross-product of observed key values.
    std::vector<std::vector<Scalar>> domain(keys.size());
    auto collect = [&](const AssociativeTable& t, std::size_t col, std::vector<Scalar>& d) {
      for (std::size_t r = 0; r < t.size(); ++r) d.push_back(t.key(r)[col]);
    };
    for (std::size_t c = 0; c < sa.key_arity(); ++c) {
      collect(a, c, domain[c]);
      if (auto j = sb.key_index(sa.keys()[c].name)) collect(b, *j, domain[c]);
    }
    for (std::size_t c = 0; c < p.b_excl_keys.size(); ++c) collect(b, p.b_excl_keys[c], domain[sa.key_arity() + c]);
    double points = 1;
    for (auto& d : domain) {
      std::sort(d.begin(), d.end(), less);
      d.erase(std::unique(d.begin(), d.end(), same), d.end());
      points *= static_cast<double>(d.size());
    }
    if (points > 5e6) fail(ErrorCode::SizeTooLarge, "dense join would visit too many key combinations");
    if (points > 0) {
      std::vector<std::size_t> idx(keys.size(), 0);
      std::vector<std::size_t> b_from(sb.key_arity());
      for (std::size_t j = 0; j < sb.key_arity(); ++j) {
        if (auto i = sa.key_index(sb.keys()[j].name))
          b_from[j] = *i;
        else
          b_from[j] = sa.key_arity() + (std::find(p.b_excl_keys.begin(), p.b_excl_keys.end(), j) - p.b_excl_keys.begin());
      }
      std::vector<Scalar> ka(sa.key_arity()), kb(sb.key_arity());
      bool done = false;
      while (!done) {
        for (std::size_t c = 0; c < keys.size(); ++c) key[c] = domain[c][idx[c]];
        std::copy_n(key.begin(), sa.key_arity(), ka.begin());
        for (std::size_t j = 0; j < sb.key_arity(); ++j) kb[j] = key[b_from[j]];
        auto fa = a.find(ka);
        auto fb = b.find(kb);
        std::vector<Scalar> av = fa ? std::vector<Scalar>(a.value(*fa).begin(), a.value(*fa).end()) : sa.defaults();
        std::vector<Scalar> bv = fb ? std::vector<Scalar>(b.value(*fb).begin(), b.value(*fb).end()) : sb.defaults();
        ++apps;
        if (combine(av, bv)) out.add_unchecked(key, val);
        std::size_t c = keys.size();
        while (true) {
          if (c == 0) {
            done = true;
            break;
          }
          --c;
          if (++idx[c] < domain[c].size()) break;
          idx[c] = 0;
        }
      }
    }
    if (stats) stats->dense = true;
  }
  if (stats) stats->applications += apps;
  return out.build(true);
}

}  // namespace

AssociativeTable strict_join(const AssociativeTable& a, const AssociativeTable& b, const BinaryFn& times,
                             OpStats* stats) {
  return join_impl(a, b, times, false, stats);
}

AssociativeTable relaxed_join(const AssociativeTable& a, const AssociativeTable& b, const BinaryFn& times,
                              OpStats* stats) {
  return join_impl(a, b, times, true, stats);
}

// ------------------------------------------------------------------------ ext

namespace {

class BuilderSink : public FragmentSink {
public:
  BuilderSink(TableBuilder& b, bool rewrites, bool key_preserving) : b_(b), rewrites_(rewrites), kp_(key_preserving) {}
  void set_input_key(Row k) { in_key_ = k; }
  void emit(std::span<const Scalar> key, std::span<const Scalar> value) override {
    if (kp_ && !key.empty()) fail(ErrorCode::SchemaMismatch, "key-preserving flatmap emitted a key");
    if (rewrites_) {
      b_.add(key, value);
      return;
    }
    buf_.assign(in_key_.begin(), in_key_.end());
    buf_.insert(buf_.end(), key.begin(), key.end());
    b_.add(buf_, value);
  }

private:
  TableBuilder& b_;
  bool rewrites_, kp_;
  Row in_key_;
  std::vector<Scalar> buf_;
};

}  // namespace

AssociativeTable ext(const AssociativeTable& a, const FlatmapFn& f, OpStats* stats) {
  if (!f.bind) fail(ErrorCode::InvalidArgument, "flatmap '" + f.name + "' has no body");
  BoundFlatmap bf = f.bind(a.schema());
  const Schema& in = a.schema();
  if (!f.rewrites_keys) {
    const auto& ok = bf.output.keys();
    if (ok.size() < in.key_arity() || !std::equal(in.keys().begin(), in.keys().end(), ok.begin()))
      fail(ErrorCode::SchemaMismatch, "flatmap '" + f.name + "' output " + bf.output.to_string() +
                                          " does not extend the input keys");
    if (f.key_preserving && ok.size() != in.key_arity())
      fail(ErrorCode::SchemaMismatch, "key-preserving flatmap '" + f.name + "' appends keys");
  }
  TableBuilder out(bf.output);
  BuilderSink sink(out, f.rewrites_keys, f.key_preserving);
  for (std::size_t r = 0; r < a.size(); ++r) {
    sink.set_input_key(a.key(r));
    bf.row(a.key(r), a.value(r), sink);
  }
  if (stats) stats->applications += a.size();
  return out.build(true);
}

AssociativeTable map_table(const AssociativeTable& a, const FlatmapFn& f, OpStats* stats) {
  if (!f.key_preserving) fail(ErrorCode::InvalidArgument, "map needs a key-preserving function, '" + f.name + "' is not");
  return ext(a, f, stats);
}

// ----------------------------------------------------------------- relational

namespace {

AssociativeTable subset(const AssociativeTable& a, const std::vector<std::size_t>& rows) {
  TableBuilder out(a.schema_ptr());
  out.reserve(rows.size());
  for (auto r : rows) out.add_unchecked(a.key(r), a.value(r));
  return out.build(true);
}

bool truthy(const Scalar& s) {
  if (auto b = std::get_if<bool>(&s)) return *b;
  fail(ErrorCode::SchemaMismatch, "selection predicate must yield a bool");
}

}  // namespace

AssociativeTable select_rows(const AssociativeTable& a, const ScalarExpr& pred, const FunctionRegistry* reg) {
  const Schema& s = a.schema();
  std::vector<std::size_t> keep;
  std::size_t cur = 0;
  ScalarEnv env;
  env.var = [&](std::string_view n) -> std::optional<Scalar> {
    if (auto i = s.key_index(n)) return a.key(cur)[*i];
    if (auto i = s.value_index(n)) return a.value(cur)[*i];
    return std::nullopt;
  };
  env.call = [&](std::string_view n, const std::vector<Scalar>& args) -> std::optional<Scalar> {
    if (!reg || !args.empty() || !reg->has_predicate(std::string(n))) return std::nullopt;
    return Scalar{reg->predicate(std::string(n))(s, a.key(cur), a.value(cur))};
  };
  for (cur = 0; cur < a.size(); ++cur)
    if (truthy(eval_scalar(pred, env))) keep.push_back(cur);
  return subset(a, keep);
}

AssociativeTable project(const AssociativeTable& a, const std::vector<std::string>& attrs) {
  const Schema& s = a.schema();
  bool drop = !attrs.empty() && attrs[0].size() > 1 && attrs[0][0] == '-';
  std::vector<std::string> names;
  for (const auto& n : attrs) {
    bool d = n.size() > 1 && n[0] == '-';
    if (d != drop) fail(ErrorCode::InvalidArgument, "projection mixes kept and dropped attributes");
    std::string name = d ? n.substr(1) : n;
    if (!s.has_attr(name)) fail(ErrorCode::UnknownAttribute, "no attribute '" + name + "' in " + s.to_string());
    names.push_back(name);
  }
  std::vector<std::size_t> kcols, vcols;
  if (drop) {
    auto dropped = [&](const std::string& n) { return std::find(names.begin(), names.end(), n) != names.end(); };
    for (std::size_t i = 0; i < s.key_arity(); ++i)
      if (!dropped(s.keys()[i].name)) kcols.push_back(i);
    for (std::size_t i = 0; i < s.value_arity(); ++i)
      if (!dropped(s.values()[i].name)) vcols.push_back(i);
  } else {
    for (const auto& n : names) {
      if (auto i = s.key_index(n))
        kcols.push_back(*i);
      else
        vcols.push_back(*s.value_index(n));
    }
  }
  std::vector<KeyAttr> keys;
  std::vector<ValueAttr> vals;
  for (auto i : kcols) keys.push_back(s.keys()[i]);
  for (auto i : vcols) vals.push_back(s.values()[i]);
  auto schema = std::make_shared<const Schema>(keys, vals);
  const auto& defs = schema->defaults();

  struct Item {
    std::vector<Scalar> k, v;
  };
  std::vector<Item> items;
  items.reserve(a.size());
  for (std::size_t r = 0; r < a.size(); ++r) {
    Item it;
    for (auto c : kcols) it.k.push_back(a.key(r)[c]);
    for (auto c : vcols) it.v.push_back(a.value(r)[c]);
    if (is_default(it.v, defs)) continue;
    items.push_back(std::move(it));
  }
  std::stable_sort(items.begin(), items.end(), [](const Item& x, const Item& y) { return compare_keys(x.k, y.k) < 0; });
  TableBuilder out(schema);
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i > 0 && compare_keys(items[i - 1].k, items[i].k) == 0) {
      if (compare_keys(items[i - 1].v, items[i].v) != 0)
        fail(ErrorCode::DuplicateKey, "projection merges records with different values");
      continue;
    }
    out.add_unchecked(items[i].k, items[i].v);
  }
  return out.build(true);
}

AssociativeTable rename(const AssociativeTable& a, const std::vector<std::pair<std::string, std::string>>& pairs) {
  const Schema& s = a.schema();
  for (const auto& [from, to] : pairs)
    if (!s.has_attr(from)) fail(ErrorCode::UnknownAttribute, "no attribute '" + from + "' in " + s.to_string());
  auto renamed = [&](const std::string& n) {
    for (const auto& [from, to] : pairs)
      if (from == n) return to;
    return n;
  };
  std::vector<KeyAttr> keys = s.keys();
  std::vector<ValueAttr> vals = s.values();
  for (auto& k : keys) k.name = renamed(k.name);
  for (auto& v : vals) v.name = renamed(v.name);
  TableBuilder out(Schema(keys, vals));
  out.reserve(a.size());
  for (std::size_t r = 0; r < a.size(); ++r) out.add_unchecked(a.key(r), a.value(r));
  return out.build(true);
}

AssociativeTable aggregate(const AssociativeTable& a, const std::vector<std::string>& group_keys, const BinaryFn& plus,
                           OpStats* stats) {
  const Schema& s = a.schema();
  std::vector<KeyAttr> keys;
  for (const auto& g : group_keys) {
    auto i = s.key_index(g);
    if (!i) {
      if (s.value_index(g)) fail(ErrorCode::SchemaMismatch, "cannot group by value attribute '" + g + "'");
      fail(ErrorCode::UnknownAttribute, "no key attribute '" + g + "' in " + s.to_string());
    }
    keys.push_back(s.keys()[*i]);
  }
  AssociativeTable e{Schema(keys, {})};
  return union_tables(a, e, plus, stats);
}

namespace {

void same_schema(const AssociativeTable& a, const AssociativeTable& b, const char* op) {
  if (!(a.schema() == b.schema()))
    fail(ErrorCode::SchemaMismatch, std::string(op) + " needs identical schemas, got " + a.schema().to_string() +
                                        " and " + b.schema().to_string());
}

bool same_values(Row x, Row y) {
  for (std::size_t i = 0; i < x.size(); ++i)
    if (!same(x[i], y[i])) return false;
  return true;
}

}  // namespace

AssociativeTable set_union(const AssociativeTable& a, const AssociativeTable& b) {
  same_schema(a, b, "set union");
  TableBuilder out(a.schema_ptr());
  std::size_t i = 0, j = 0;
  while (i < a.size() || j < b.size()) {
    int c = i == a.size() ? 1 : j == b.size() ? -1 : compare_keys(a.key(i), b.key(j));
    if (c < 0) {
      out.add_unchecked(a.key(i), a.value(i));
      ++i;
    } else if (c > 0) {
      out.add_unchecked(b.key(j), b.value(j));
      ++j;
    } else {
      if (!same_values(a.value(i), b.value(j)))
        fail(ErrorCode::DuplicateKey, "set union of records with the same key but different values");
      out.add_unchecked(a.key(i), a.value(i));
      ++i;
      ++j;
    }
  }
  return out.build(true);
}

AssociativeTable set_intersect(const AssociativeTable& a, const AssociativeTable& b) {
  same_schema(a, b, "intersection");
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (auto j = b.find(a.key(i)); j && same_values(a.value(i), b.value(*j))) keep.push_back(i);
  return subset(a, keep);
}

AssociativeTable set_difference(const AssociativeTable& a, const AssociativeTable& b) {
  same_schema(a, b, "difference");
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < a.size(); ++i) {
    auto j = b.find(a.key(i));
    if (!j || !same_values(a.value(i), b.value(*j))) keep.push_back(i);
  }
  return subset(a, keep);
}

AssociativeTable divide(const AssociativeTable& a, const AssociativeTable& b) {
  const Schema& sa = a.schema();
  const Schema& sb = b.schema();
  if (sb.key_arity() == 0) {
    // A ÷ (keyless): keep records whose values match b's value tuple.
    std::vector<std::size_t> cols;
    for (const auto& v : sb.values()) {
      auto i = sa.value_index(v.name);
      if (!i) fail(ErrorCode::UnknownAttribute, "divisor value '" + v.name + "' is not a value of " + sa.to_string());
      if (sa.values()[*i].kind != v.kind) fail(ErrorCode::SchemaMismatch, "divisor value '" + v.name + "' has another kind");
      cols.push_back(*i);
    }
    if (b.size() > 1) fail(ErrorCode::NotScalarTable, "keyless divisor has several records");
    std::vector<Scalar> target = b.empty() ? sb.defaults() : std::vector<Scalar>(b.value(0).begin(), b.value(0).end());
    std::vector<std::size_t> keep;
    for (std::size_t r = 0; r < a.size(); ++r) {
      bool ok = true;
      for (std::size_t c = 0; c < cols.size() && ok; ++c) ok = same(a.value(r)[cols[c]], target[c]);
      if (ok) keep.push_back(r);
    }
    return subset(a, keep);
  }
  // Classical division on keys: groups g of A's other keys such that (g, k)
  // is stored in A for every key k of B.
  std::vector<std::size_t> bcols, gcols;
  for (const auto& k : sb.keys()) {
    auto i = sa.key_index(k.name);
    if (!i) fail(ErrorCode::UnknownAttribute, "divisor key '" + k.name + "' is not a key of " + sa.to_string());
    bcols.push_back(*i);
  }
  for (std::size_t i = 0; i < sa.key_arity(); ++i)
    if (std::find(bcols.begin(), bcols.end(), i) == bcols.end()) gcols.push_back(i);
  std::vector<KeyAttr> keys;
  for (auto c : gcols) keys.push_back(sa.keys()[c]);
  TableBuilder out(Schema(keys, {{"in", Kind::Bool, false}}));
  std::vector<std::vector<Scalar>> groups;
  for (std::size_t r = 0; r < a.size(); ++r) {
    std::vector<Scalar> g;
    for (auto c : gcols) g.push_back(a.key(r)[c]);
    groups.push_back(std::move(g));
  }
  std::sort(groups.begin(), groups.end(), [](const auto& x, const auto& y) { return compare_keys(x, y) < 0; });
  groups.erase(std::unique(groups.begin(), groups.end(), [](const auto& x, const auto& y) { return compare_keys(x, y) == 0; }),
               groups.end());
  std::vector<Scalar> full(sa.key_arity());
  Scalar yes{true};
  for (const auto& g : groups) {
    bool all = true;
    for (std::size_t rb = 0; rb < b.size() && all; ++rb) {
      for (std::size_t c = 0; c < gcols.size(); ++c) full[gcols[c]] = g[c];
      for (std::size_t c = 0; c < bcols.size(); ++c) full[bcols[c]] = b.key(rb)[c];
      all = a.find(full).has_value();
    }
    if (all) out.add_unchecked(g, std::span<const Scalar>(&yes, 1));
  }
  return out.build(true);
}

AssociativeTable antijoin_left(const AssociativeTable& a, const AssociativeTable& b) {
  const Schema& sa = a.schema();
  const Schema& sb = b.schema();
  std::vector<std::size_t> ak, bk, av, bv;
  for (std::size_t i = 0; i < sa.key_arity(); ++i)
    if (auto j = sb.key_index(sa.keys()[i].name)) {
      ak.push_back(i);
      bk.push_back(*j);
    }
  for (std::size_t i = 0; i < sa.value_arity(); ++i)
    if (auto j = sb.value_index(sa.values()[i].name)) {
      av.push_back(i);
      bv.push_back(*j);
    }
  auto proj = [](const AssociativeTable& t, std::size_t r, const std::vector<std::size_t>& kc,
                 const std::vector<std::size_t>& vc) {
    std::vector<Scalar> out;
    for (auto c : kc) out.push_back(t.key(r)[c]);
    for (auto c : vc) out.push_back(t.value(r)[c]);
    return out;
  };
  std::vector<std::vector<Scalar>> partners;
  for (std::size_t r = 0; r < b.size(); ++r) partners.push_back(proj(b, r, bk, bv));
  auto lt = [](const std::vector<Scalar>& x, const std::vector<Scalar>& y) { return compare_keys(x, y) < 0; };
  std::sort(partners.begin(), partners.end(), lt);
  std::vector<std::size_t> keep;
  for (std::size_t r = 0; r < a.size(); ++r)
    if (!std::binary_search(partners.begin(), partners.end(), proj(a, r, ak, av), lt)) keep.push_back(r);
  return subset(a, keep);
}

AssociativeTable antijoin_right(const AssociativeTable& a, const AssociativeTable& b) { return antijoin_left(b, a); }

AssociativeTable concat(const AssociativeTable& a, const AssociativeTable& b) {
  same_schema(a, b, "concat");
  const Schema& s = a.schema();
  if (s.key_arity() != 1 || s.keys()[0].kind != Kind::Int)
    fail(ErrorCode::SchemaMismatch, "concat expects vectors with one int key, got " + s.to_string());
  std::int64_t offset = a.empty() ? 0 : std::get<std::int64_t>(a.key(a.size() - 1)[0]) + 1;
  TableBuilder out(a.schema_ptr());
  for (std::size_t r = 0; r < a.size(); ++r) out.add_unchecked(a.key(r), a.value(r));
  for (std::size_t r = 0; r < b.size(); ++r) {
    Scalar k{std::get<std::int64_t>(b.key(r)[0]) + offset};
    out.add_unchecked(std::span<const Scalar>(&k, 1), b.value(r));
  }
  return out.build(true);
}

const char* compare_op_name(CompareOp op) {
  switch (op) {
    case CompareOp::Lt: return "lt";
    case CompareOp::Le: return "le";
    case CompareOp::Eq: return "eq";
    case CompareOp::Ne: return "ne";
    case CompareOp::Gt: return "gt";
    case CompareOp::Ge: return "ge";
  }
  return "?";
}

AssociativeTable compare_tables(const AssociativeTable& a, const AssociativeTable& b, CompareOp op) {
  Scalar x = scalar(a), y = scalar(b);
  int c;
  if (is_numeric(kind_of(x)) && is_numeric(kind_of(y)) && kind_of(x) != kind_of(y)) {
    double p = as_real(x), q = as_real(y);
    c = p < q ? -1 : (p > q ? 1 : 0);
  } else {
    if (kind_of(x) != kind_of(y))
      fail(ErrorCode::SchemaMismatch, std::string("cannot compare ") + kind_name(kind_of(x)) + " with " +
                                          kind_name(kind_of(y)));
    c = compare(x, y);
  }
  bool r = false;
  switch (op) {
    case CompareOp::Lt: r = c < 0; break;
    case CompareOp::Le: r = c <= 0; break;
    case CompareOp::Eq: r = c == 0; break;
    case CompareOp::Ne: r = c != 0; break;
    case CompareOp::Gt: r = c > 0; break;
    case CompareOp::Ge: r = c >= 0; break;
  }
  return scalar_table(Scalar{r}, "cond");
}

namespace {

const Scalar* single_value(const AssociativeTable& t, const char* what) {
  AssociativeTable n = t.normalized() ? t : normalize(t);
  if (n.size() > 1)
    fail(ErrorCode::NotScalarTable, std::string(what) + " of a table with " + std::to_string(n.size()) + " records");
  if (t.schema().value_arity() != 1)
    fail(ErrorCode::NotScalarTable, std::string(what) + " of a table with " +
                                        std::to_string(t.schema().value_arity()) + " value attributes");
  if (t.normalized()) return t.empty() ? &t.schema().defaults()[0] : &t.value(0)[0];
  return nullptr;
}

}  // namespace

bool boole(const AssociativeTable& t) {
  if (normalize(t).empty()) return false;
  Scalar v = scalar(t);
  switch (kind_of(v)) {
    case Kind::Bool: return std::get<bool>(v);
    case Kind::Int: return std::get<std::int64_t>(v) != 0;
    case Kind::Real: return std::get<double>(v) != 0.0;
    case Kind::Text: break;
  }
  fail(ErrorCode::NotScalarTable, "a text value has no truth value");
}

Scalar scalar(const AssociativeTable& t) {
  if (const Scalar* v = single_value(t, "scalar")) return *v;
  AssociativeTable n = normalize(t);
  return n.empty() ? n.schema().defaults()[0] : n.value(0)[0];
}

AssociativeTable scalar_table(Scalar v, const std::string& attr) {
  Kind k = kind_of(v);
  TableBuilder b(Schema({}, {{attr, k, zero_of(k)}}));
  b.add_unchecked({}, std::span<const Scalar>(&v, 1));
  return b.build(true);
}

}  // namespace iterlara

#include "iterlara/functions.hpp"

#include <cmath>
#include <limits>
#include <random>

#include "iterlara/error.hpp"

namespace iterlara {

bool BinaryFn::annihilates(Kind k, const Scalar& v) const {
  auto it = annihilator.find(k);
  return it != annihilator.end() && same(it->second, v);
}

bool operator==(const FnRef& a, const FnRef& b) {
  if (a.name != b.name || a.args.size() != b.args.size()) return false;
  for (std::size_t i = 0; i < a.args.size(); ++i)
    if (!same(a.args[i], b.args[i])) return false;
  return true;
}

// ---------------------------------------------------------------- properties

namespace {

Scalar sample(Kind k, std::mt19937_64& rng) {
  switch (k) {
    case Kind::Int: return Scalar{std::uniform_int_distribution<std::int64_t>(-100, 100)(rng)};
    case Kind::Real: return Scalar{std::uniform_int_distribution<int>(-400, 400)(rng) / 4.0};
    case Kind::Bool: return Scalar{std::uniform_int_distribution<int>(0, 1)(rng) == 1};
    case Kind::Text: {
      static const char* pool[] = {"", "a", "b", "ab", "ba"};
      return text_scalar(pool[std::uniform_int_distribution<int>(0, 4)(rng)]);
    }
  }
  return Scalar{std::int64_t{0}};
}

bool agree(const Scalar& a, const Scalar& b) {
  if (same(a, b)) return true;
  if (kind_of(a) == Kind::Real || kind_of(b) == Kind::Real) return close(a, b, 1e-9);
  return same(a, b);
}

std::string show(const Scalar& s) { return scalar_literal(s); }

}  // namespace

void check_binary_properties(const BinaryFn& fn, int sample_budget, std::uint64_t seed) {
  if (sample_budget < 1) fail(ErrorCode::InvalidArgument, "sample_budget must be at least 1");
  if (fn.pairing) return;
  if (!fn.apply) fail(ErrorCode::InvalidArgument, "function '" + fn.name + "' has no body");
  if (fn.identity.empty()) fail(ErrorCode::InvalidArgument, "function '" + fn.name + "' declares no identity");
  std::mt19937_64 rng(seed);
  for (const auto& [kind, id] : fn.identity) {
    for (int n = 0; n < sample_budget; ++n) {
      Scalar x = n == 0 ? id : sample(kind, rng);
      Scalar y = sample(kind, rng);
      Scalar z = n == 1 ? id : sample(kind, rng);
      Scalar xy = fn.apply(x, y), yx = fn.apply(y, x);
      if (!agree(xy, yx))
        throw PropertyViolation(fn.name, "commutativity", {x, y, z},
                                fn.name + "(" + show(x) + ", " + show(y) + ") = " + show(xy) + " but " + fn.name +
                                    "(" + show(y) + ", " + show(x) + ") = " + show(yx));
      Scalar l = fn.apply(xy, z), r = fn.apply(x, fn.apply(y, z));
      if (!agree(l, r))
        throw PropertyViolation(fn.name, "associativity", {x, y, z},
                                "(x.y).z = " + show(l) + " but x.(y.z) = " + show(r) + " for x=" + show(x) +
                                    ", y=" + show(y) + ", z=" + show(z));
      Scalar ix = fn.apply(id, x);
      if (!agree(ix, x))
        throw PropertyViolation(fn.name, "identity", {id, x, z},
                                fn.name + "(" + show(id) + ", " + show(x) + ") = " + show(ix) + ", expected " + show(x));
    }
  }
}

namespace {

class CollectSink : public FragmentSink {
public:
  std::vector<std::vector<Scalar>> values;
  void emit(std::span<const Scalar>, std::span<const Scalar> value) override {
    values.emplace_back(value.begin(), value.end());
  }
};

}  // namespace

void check_default_preservation(const FlatmapFn& fn) {
  for (const Schema& in : fn.probe_schemas) {
    BoundFlatmap b = fn.bind(in);
    std::vector<Scalar> key;
    for (const auto& k : in.keys()) key.push_back(k.kind == Kind::Int ? Scalar{std::int64_t{1}} : text_scalar("p"));
    CollectSink sink;
    b.row(key, in.defaults(), sink);
    for (const auto& v : sink.values)
      if (!is_default(v, b.output.defaults()))
        fail(ErrorCode::DefaultViolation, "flatmap '" + fn.name + "' maps the default input to a non-default value");
  }
}

// ------------------------------------------------------------------ registry

const BinaryFn& FunctionRegistry::register_binary(BinaryFn fn, int sample_budget, std::uint64_t seed) {
  if (fn.name.empty()) fail(ErrorCode::InvalidArgument, "function needs a name");
  check_binary_properties(fn, sample_budget, seed);
  auto p = std::make_shared<const BinaryFn>(std::move(fn));
  binaries_[p->name] = p;
  return *p;
}

void FunctionRegistry::register_flatmap(FlatmapFn fn) {
  if (fn.name.empty()) fail(ErrorCode::InvalidArgument, "flatmap needs a name");
  check_default_preservation(fn);
  flatmaps_[fn.name] = std::move(fn);
}

void FunctionRegistry::register_flatmap_family(std::string name, FlatmapFactory factory) {
  families_[std::move(name)] = std::move(factory);
}

void FunctionRegistry::register_predicate(std::string name, RowPredicate p) { predicates_[std::move(name)] = std::move(p); }

bool FunctionRegistry::has_binary(const std::string& name) const { return binaries_.count(name) != 0; }
bool FunctionRegistry::has_flatmap(const std::string& name) const {
  return flatmaps_.count(name) != 0 || families_.count(name) != 0;
}
bool FunctionRegistry::has_predicate(const std::string& name) const { return predicates_.count(name) != 0; }

const BinaryFn& FunctionRegistry::binary(const std::string& name) const {
  auto it = binaries_.find(name);
  if (it == binaries_.end()) fail(ErrorCode::UnknownFunction, "unknown binary function '" + name + "'");
  return *it->second;
}

FlatmapFn FunctionRegistry::flatmap(const FnRef& ref) const {
  if (auto it = families_.find(ref.name); it != families_.end()) {
    FlatmapFn fn = it->second(ref.args);
    fn.name = ref.name;
    return fn;
  }
  auto it = flatmaps_.find(ref.name);
  if (it == flatmaps_.end()) fail(ErrorCode::UnknownFunction, "unknown flatmap '" + ref.name + "'");
  if (!ref.args.empty()) fail(ErrorCode::InvalidArgument, "flatmap '" + ref.name + "' takes no arguments");
  return it->second;
}

const RowPredicate& FunctionRegistry::predicate(const std::string& name) const {
  auto it = predicates_.find(name);
  if (it == predicates_.end()) fail(ErrorCode::UnknownFunction, "unknown predicate '" + name + "'");
  return it->second;
}

// ----------------------------------------------------------- user functions

BinaryFn make_binary_from_expr(std::string name, std::string x, std::string y, ScalarExprPtr body, Scalar identity,
                               std::int64_t cost) {
  BinaryFn fn;
  fn.name = name;
  fn.op_cost = cost;
  Kind ik = kind_of(identity);
  fn.identity[ik] = identity;
  if (ik == Kind::Int) fn.identity[Kind::Real] = coerce(identity, Kind::Real);
  fn.apply = [name, x, y, body](const Scalar& a, const Scalar& b) {
    ScalarEnv env;
    env.var = [&](std::string_view v) -> std::optional<Scalar> {
      if (v == x) return a;
      if (v == y) return b;
      return std::nullopt;
    };
    Scalar r = eval_scalar(*body, env);
    Kind want = kind_of(a);
    if (kind_of(r) != want) {
      if (want == Kind::Real && kind_of(r) == Kind::Int) return coerce(r, Kind::Real);
      fail(ErrorCode::SchemaMismatch, "function '" + name + "' returned " + kind_name(kind_of(r)) + " for " +
                                          kind_name(want) + " arguments");
    }
    return r;
  };
  return fn;
}

namespace {

// Output schema = input keys, values transformed one by one.
FlatmapFn per_value_map(std::string name, std::int64_t cost,
                        std::function<Scalar(const Scalar&, const ValueAttr&)> f,
                        std::function<Kind(const ValueAttr&)> out_kind) {
  FlatmapFn fn;
  fn.name = std::move(name);
  fn.op_cost = cost;
  fn.key_preserving = true;
  fn.bind = [f, out_kind](const Schema& in) {
    std::vector<ValueAttr> vals;
    for (const auto& v : in.values()) {
      Kind k = out_kind(v);
      Scalar d = coerce(f(v.default_value, v), k);
      vals.push_back({v.name, k, d});
    }
    BoundFlatmap b{Schema(in.keys(), vals), {}};
    std::vector<Kind> kinds;
    for (const auto& v : vals) kinds.push_back(v.kind);
    auto attrs = in.values();
    b.row = [f, kinds, attrs](std::span<const Scalar>, std::span<const Scalar> value, FragmentSink& out) {
      std::vector<Scalar> res(value.size());
      for (std::size_t i = 0; i < value.size(); ++i) res[i] = coerce(f(value[i], attrs[i]), kinds[i]);
      out.emit({}, res);
    };
    return b;
  };
  return fn;
}

}  // namespace

FlatmapFn make_value_map(std::string name, std::string v, ScalarExprPtr body, std::int64_t cost) {
  auto f = [v, body](const Scalar& x, const ValueAttr&) {
    ScalarEnv env;
    env.var = [&](std::string_view n) -> std::optional<Scalar> {
      if (n == v) return x;
      return std::nullopt;
    };
    return eval_scalar(*body, env);
  };
  auto kind = [f](const ValueAttr& a) { return kind_of(f(a.default_value, a)); };
  FlatmapFn fn = per_value_map(std::move(name), cost, f, kind);
  fn.probe_schemas = {Schema({{"i", Kind::Int}}, {{"v", Kind::Int, std::int64_t{0}}})};
  return fn;
}

std::vector<std::size_t> perm_key_columns(const Schema& s) {
  std::vector<std::pair<long, std::size_t>> found;
  for (std::size_t i = 0; i < s.key_arity(); ++i) {
    const std::string& n = s.keys()[i].name;
    if (n.size() < 2 || n[0] != 'k') continue;
    bool digits = true;
    for (std::size_t c = 1; c < n.size(); ++c)
      if (n[c] < '0' || n[c] > '9') digits = false;
    if (digits) found.push_back({std::stol(n.substr(1)), i});
  }
  std::sort(found.begin(), found.end());
  std::vector<std::size_t> out;
  for (auto& f : found) out.push_back(f.second);
  return out;
}

// ------------------------------------------------------------------ builtins

namespace {

std::string text_arg(const std::vector<Scalar>& args, std::size_t i, const char* fn) {
  if (i >= args.size() || kind_of(args[i]) != Kind::Text)
    fail(ErrorCode::InvalidArgument, std::string(fn) + ": argument " + std::to_string(i + 1) + " must be a name");
  return std::get<Symbol>(args[i]).str();
}

Scalar scalar_arg(const std::vector<Scalar>& args, std::size_t i, const char* fn) {
  if (i >= args.size()) fail(ErrorCode::InvalidArgument, std::string(fn) + ": missing argument " + std::to_string(i + 1));
  return args[i];
}

void no_args(const std::vector<Scalar>& args, const char* fn) {
  if (!args.empty()) fail(ErrorCode::InvalidArgument, std::string(fn) + " takes no arguments");
}

std::size_t need_key(const Schema& s, const std::string& name, const char* fn) {
  auto i = s.key_index(name);
  if (!i) fail(ErrorCode::SchemaMismatch, std::string(fn) + ": input has no key attribute '" + name + "'");
  return *i;
}

Schema probe_int_vector() { return Schema({{"i", Kind::Int}}, {{"v", Kind::Int, std::int64_t{0}}}); }
Schema probe_real_vector() { return Schema({{"i", Kind::Int}}, {{"v", Kind::Real, 0.0}}); }

// Replace the value tuple with one attribute `attr` = c on non-default input.
FlatmapFn const_fn(std::string attr, Scalar c) {
  FlatmapFn fn;
  fn.name = "const";
  fn.op_cost = 1;
  fn.key_preserving = true;
  fn.bind = [attr, c](const Schema& in) {
    Kind k = kind_of(c);
    BoundFlatmap b{Schema(in.keys(), {{attr, k, zero_of(k)}}), {}};
    auto defs = in.defaults();
    Scalar zero = zero_of(k);
    b.row = [defs, c, zero](std::span<const Scalar>, std::span<const Scalar> value, FragmentSink& out) {
      const Scalar& v = is_default(value, defs) ? zero : c;
      out.emit({}, std::span<const Scalar>(&v, 1));
    };
    return b;
  };
  fn.probe_schemas = {probe_int_vector()};
  return fn;
}

FlatmapFn shift_key_fn(std::string attr, std::int64_t delta) {
  FlatmapFn fn;
  fn.op_cost = 1;
  fn.rewrites_keys = true;
  fn.bind = [attr, delta](const Schema& in) {
    std::size_t ki = need_key(in, attr, "shift_key");
    if (in.keys()[ki].kind != Kind::Int) fail(ErrorCode::SchemaMismatch, "shift_key: '" + attr + "' is not an int key");
    BoundFlatmap b{in, {}};
    b.row = [ki, delta, attr](std::span<const Scalar> key, std::span<const Scalar> value, FragmentSink& out) {
      std::vector<Scalar> k(key.begin(), key.end());
      std::int64_t nv = std::get<std::int64_t>(k[ki]) + delta;
      if (nv < 0) fail(ErrorCode::NegativePointer, "key '" + attr + "' would become negative");
      k[ki] = Scalar{nv};
      out.emit(k, value);
    };
    return b;
  };
  fn.probe_schemas = {Schema({{attr, Kind::Int}}, {{"dummy", Kind::Bool, false}})};
  return fn;
}

std::int64_t inversions_parity_sign(const std::vector<std::int64_t>& p) {
  std::size_t inv = 0;
  for (std::size_t a = 0; a < p.size(); ++a)
    for (std::size_t b = a + 1; b < p.size(); ++b)
      if (p[a] > p[b]) ++inv;
  return inv % 2 ? -1 : 1;
}

bool is_permutation_of_range(const std::vector<std::int64_t>& p) {
  std::vector<bool> seen(p.size(), false);
  for (auto x : p) {
    if (x < 0 || static_cast<std::size_t>(x) >= p.size() || seen[x]) return false;
    seen[x] = true;
  }
  return true;
}

std::vector<std::int64_t> perm_values(const std::vector<std::size_t>& cols, std::span<const Scalar> key) {
  std::vector<std::int64_t> p;
  for (auto c : cols) p.push_back(as_int(key[c]));
  return p;
}

}  // namespace

FunctionRegistry FunctionRegistry::with_builtins() {
  FunctionRegistry r;
  const std::int64_t imin = std::numeric_limits<std::int64_t>::min();
  const std::int64_t imax = std::numeric_limits<std::int64_t>::max();
  const double inf = std::numeric_limits<double>::infinity();

  {
    BinaryFn f{"plus", scalar_add, {{Kind::Int, Scalar{std::int64_t{0}}}, {Kind::Real, Scalar{0.0}}}, {}, 1};
    r.register_binary(f);
  }
  {
    BinaryFn f{"times", scalar_mul, {{Kind::Int, Scalar{std::int64_t{1}}}, {Kind::Real, Scalar{1.0}}},
               {{Kind::Int, Scalar{std::int64_t{0}}}, {Kind::Real, Scalar{0.0}}}, 1};
    r.register_binary(f);
  }
  {
    auto mx = [](const Scalar& a, const Scalar& b) { return compare(a, b) >= 0 ? a : b; };
    BinaryFn f{"max", mx, {{Kind::Int, Scalar{imin}}, {Kind::Real, Scalar{-inf}}}, {{Kind::Int, Scalar{imax}}, {Kind::Real, Scalar{inf}}}, 1};
    r.register_binary(f);
  }
  {
    auto mn = [](const Scalar& a, const Scalar& b) { return compare(a, b) <= 0 ? a : b; };
    BinaryFn f{"min", mn, {{Kind::Int, Scalar{imax}}, {Kind::Real, Scalar{inf}}}, {{Kind::Int, Scalar{imin}}, {Kind::Real, Scalar{-inf}}}, 1};
    r.register_binary(f);
  }
  {
    // Combines partial counts; integer-only addition.
    BinaryFn f{"count", scalar_add, {{Kind::Int, Scalar{std::int64_t{0}}}}, {}, 1};
    r.register_binary(f);
  }
  {
    auto lor = [](const Scalar& a, const Scalar& b) { return Scalar{std::get<bool>(a) || std::get<bool>(b)}; };
    BinaryFn f{"or", lor, {{Kind::Bool, Scalar{false}}}, {{Kind::Bool, Scalar{true}}}, 1};
    r.register_binary(f);
  }
  {
    auto land = [](const Scalar& a, const Scalar& b) { return Scalar{std::get<bool>(a) && std::get<bool>(b)}; };
    BinaryFn f{"and", land, {{Kind::Bool, Scalar{true}}}, {{Kind::Bool, Scalar{false}}}, 1};
    r.register_binary(f);
  }
  {
    BinaryFn f;
    f.name = "pair";
    f.pairing = true;
    f.op_cost = 0;
    f.apply = [](const Scalar& a, const Scalar&) { return a; };
    r.register_binary(f);
  }

  {
    FlatmapFn id;
    id.name = "identity";
    id.op_cost = 0;
    id.key_preserving = true;
    id.bind = [](const Schema& in) {
      BoundFlatmap b{in, {}};
      b.row = [](std::span<const Scalar>, std::span<const Scalar> v, FragmentSink& out) { out.emit({}, v); };
      return b;
    };
    id.probe_schemas = {probe_int_vector()};
    r.register_flatmap(id);
  }

  r.register_flatmap_family("const", [](const std::vector<Scalar>& a) {
    if (a.size() != 2) fail(ErrorCode::InvalidArgument, "const(attr, value) takes two arguments");
    return const_fn(text_arg(a, 0, "const"), a[1]);
  });
  r.register_flatmap_family("one", [](const std::vector<Scalar>& a) {
    std::string attr = a.empty() ? std::string("v") : text_arg(a, 0, "one");
    return const_fn(attr, Scalar{std::int64_t{1}});
  });
  r.register_flatmap_family("scale", [](const std::vector<Scalar>& a) {
    Scalar c = scalar_arg(a, 0, "scale");
    if (!is_numeric(kind_of(c))) fail(ErrorCode::InvalidArgument, "scale expects a number");
    auto f = [c](const Scalar& x, const ValueAttr&) { return scalar_mul(x, c); };
    auto k = [c](const ValueAttr& v) {
      return v.kind == Kind::Int && kind_of(c) == Kind::Int ? Kind::Int : Kind::Real;
    };
    FlatmapFn fn = per_value_map("scale", 1, f, k);
    fn.probe_schemas = {probe_int_vector(), probe_real_vector()};
    return fn;
  });
  r.register_flatmap_family("divide", [](const std::vector<Scalar>& a) {
    Scalar c = scalar_arg(a, 0, "divide");
    if (!is_numeric(kind_of(c)) || as_real(c) == 0.0) fail(ErrorCode::InvalidArgument, "divide expects a non-zero number");
    auto f = [c](const Scalar& x, const ValueAttr&) { return scalar_div(x, c); };
    FlatmapFn fn = per_value_map("divide", 1, f, [](const ValueAttr&) { return Kind::Real; });
    fn.probe_schemas = {probe_int_vector(), probe_real_vector()};
    return fn;
  });
  r.register_flatmap_family("relu", [](const std::vector<Scalar>& a) {
    no_args(a, "relu");
    auto f = [](const Scalar& x, const ValueAttr&) {
      return as_real(x) < 0 ? zero_of(kind_of(x)) : x;
    };
    FlatmapFn fn = per_value_map("relu", 1, f, [](const ValueAttr& v) { return v.kind; });
    fn.probe_schemas = {probe_int_vector(), probe_real_vector()};
    return fn;
  });
  r.register_flatmap_family("to_real", [](const std::vector<Scalar>& a) {
    no_args(a, "to_real");
    auto f = [](const Scalar& x, const ValueAttr&) { return Scalar{as_real(x)}; };
    FlatmapFn fn = per_value_map("to_real", 0, f, [](const ValueAttr&) { return Kind::Real; });
    fn.probe_schemas = {probe_int_vector()};
    return fn;
  });
  r.register_flatmap_family("reciprocal", [](const std::vector<Scalar>& a) {
    no_args(a, "reciprocal");
    // Stored (non-default) values are inverted; the default maps to the default.
    auto f = [](const Scalar& x, const ValueAttr& attr) {
      if (same(x, attr.default_value)) return Scalar{as_real(x)};
      return Scalar{1.0 / as_real(x)};
    };
    FlatmapFn fn = per_value_map("reciprocal", 1, f, [](const ValueAttr&) { return Kind::Real; });
    fn.probe_schemas = {probe_int_vector(), probe_real_vector()};
    return fn;
  });
  r.register_flatmap_family("check_nonneg", [](const std::vector<Scalar>& a) {
    no_args(a, "check_nonneg");
    auto f = [](const Scalar& x, const ValueAttr& attr) {
      if (is_numeric(kind_of(x)) && as_real(x) < 0)
        fail(ErrorCode::NegativeCell, "value of '" + attr.name + "' became negative");
      return x;
    };
    FlatmapFn fn = per_value_map("check_nonneg", 0, f, [](const ValueAttr& v) { return v.kind; });
    fn.probe_schemas = {probe_int_vector()};
    return fn;
  });

  // r_s: single int key i -> (i', j) with i = i' * s + j.
  r.register_flatmap_family("reshape", [](const std::vector<Scalar>& a) {
    std::int64_t s = as_int(scalar_arg(a, 0, "reshape"));
    if (s < 1) fail(ErrorCode::BadStride, "reshape stride must be at least 1");
    FlatmapFn fn;
    fn.op_cost = 0;
    fn.rewrites_keys = true;
    fn.bind = [s](const Schema& in) {
      if (in.key_arity() != 1 || in.keys()[0].kind != Kind::Int)
        fail(ErrorCode::SchemaMismatch, "reshape expects a vector with one int key");
      const std::string& i = in.keys()[0].name;
      std::string j = i == "j" ? "j'" : "j";
      BoundFlatmap b{Schema({{i + "'", Kind::Int}, {j, Kind::Int}}, in.values()), {}};
      b.row = [s](std::span<const Scalar> key, std::span<const Scalar> value, FragmentSink& out) {
        std::int64_t idx = std::get<std::int64_t>(key[0]);
        if (idx < 0) fail(ErrorCode::SchemaMismatch, "reshape expects non-negative indices");
        Scalar k[2] = {Scalar{idx / s}, Scalar{idx % s}};
        out.emit(k, value);
      };
      return b;
    };
    fn.probe_schemas = {probe_int_vector()};
    return fn;
  });

  r.register_flatmap_family("inc_key", [](const std::vector<Scalar>& a) {
    return shift_key_fn(text_arg(a, 0, "inc_key"), 1);
  });
  r.register_flatmap_family("dec_key", [](const std::vector<Scalar>& a) {
    return shift_key_fn(text_arg(a, 0, "dec_key"), -1);
  });

  // d of the determinant construction: value * sign(k-keys) on permutations.
  r.register_flatmap_family("perm_sign", [](const std::vector<Scalar>& a) {
    no_args(a, "perm_sign");
    FlatmapFn fn;
    fn.op_cost = 1;
    fn.key_preserving = true;
    fn.bind = [](const Schema& in) {
      for (const auto& v : in.values())
        if (!is_numeric(v.kind)) fail(ErrorCode::SchemaMismatch, "perm_sign expects numeric values");
      BoundFlatmap b{in, {}};
      auto cols = perm_key_columns(in);
      auto defs = in.defaults();
      b.row = [cols, defs](std::span<const Scalar> key, std::span<const Scalar> value, FragmentSink& out) {
        auto p = perm_values(cols, key);
        if (!is_permutation_of_range(p)) {
          out.emit({}, defs);
          return;
        }
        Scalar sign{inversions_parity_sign(p)};
        std::vector<Scalar> res;
        for (const auto& v : value) res.push_back(kind_of(v) == Kind::Int ? scalar_mul(v, sign) : Scalar{as_real(v) * as_real(sign)});
        out.emit({}, res);
      };
      return b;
    };
    fn.probe_schemas = {Schema({{"k0", Kind::Int}, {"k1", Kind::Int}}, {{"v", Kind::Int, std::int64_t{0}}})};
    return fn;
  });

  // B_0 of the determinant chain: column index j -> (i=0, j, k0=j) with v=1.
  r.register_flatmap_family("selector0", [](const std::vector<Scalar>& a) {
    no_args(a, "selector0");
    FlatmapFn fn;
    fn.op_cost = 1;
    fn.rewrites_keys = true;
    fn.bind = [](const Schema& in) {
      std::size_t j = need_key(in, "j", "selector0");
      BoundFlatmap b{Schema({{"i", Kind::Int}, {"j", Kind::Int}, {"k0", Kind::Int}}, {{"v", Kind::Int, std::int64_t{0}}}), {}};
      auto defs = in.defaults();
      b.row = [j, defs](std::span<const Scalar> key, std::span<const Scalar> value, FragmentSink& out) {
        Scalar k[3] = {Scalar{std::int64_t{0}}, key[j], key[j]};
        Scalar v{std::int64_t{is_default(value, defs) ? 0 : 1}};
        out.emit(k, std::span<const Scalar>(&v, 1));
      };
      return b;
    };
    fn.probe_schemas = {Schema({{"j", Kind::Int}}, {{"in", Kind::Int, std::int64_t{0}}})};
    return fn;
  });

  // f of the determinant chain: B_r -> B_{r+1} (row index + 1, key k<r> renamed k<r+1>).
  r.register_flatmap_family("next_selector", [](const std::vector<Scalar>& a) {
    no_args(a, "next_selector");
    FlatmapFn fn;
    fn.op_cost = 1;
    fn.rewrites_keys = true;
    fn.bind = [](const Schema& in) {
      std::size_t i = need_key(in, "i", "next_selector");
      auto cols = perm_key_columns(in);
      if (cols.size() != 1) fail(ErrorCode::SchemaMismatch, "next_selector expects exactly one k-key");
      std::vector<KeyAttr> keys = in.keys();
      long r = std::stol(keys[cols[0]].name.substr(1));
      keys[cols[0]].name = "k" + std::to_string(r + 1);
      BoundFlatmap b{Schema(keys, in.values()), {}};
      b.row = [i](std::span<const Scalar> key, std::span<const Scalar> value, FragmentSink& out) {
        std::vector<Scalar> k(key.begin(), key.end());
        k[i] = Scalar{std::get<std::int64_t>(k[i]) + 1};
        out.emit(k, value);
      };
      return b;
    };
    fn.probe_schemas = {Schema({{"i", Kind::Int}, {"j", Kind::Int}, {"k0", Kind::Int}}, {{"v", Kind::Int, std::int64_t{0}}})};
    return fn;
  });

  // m_{x,y}: keys (i,j,x,y) of cells outside row x / column y -> (x,y,i',j')
  // re-indexed to the minor; attribute v takes the sign (-1)^(i+j).
  r.register_flatmap_family("minor_reindex", [](const std::vector<Scalar>& a) {
    no_args(a, "minor_reindex");
    FlatmapFn fn;
    fn.op_cost = 1;
    fn.rewrites_keys = true;
    fn.bind = [](const Schema& in) {
      std::size_t i = need_key(in, "i", "minor_reindex"), j = need_key(in, "j", "minor_reindex");
      std::size_t x = need_key(in, "x", "minor_reindex"), y = need_key(in, "y", "minor_reindex");
      auto vi = in.value_index("v");
      BoundFlatmap b{Schema({{"x", Kind::Int}, {"y", Kind::Int}, {"i", Kind::Int}, {"j", Kind::Int}}, in.values()), {}};
      b.row = [i, j, x, y, vi](std::span<const Scalar> key, std::span<const Scalar> value, FragmentSink& out) {
        std::int64_t ii = as_int(key[i]), jj = as_int(key[j]), xx = as_int(key[x]), yy = as_int(key[y]);
        if (ii == xx || jj == yy) fail(ErrorCode::SchemaMismatch, "minor_reindex got a cell on the removed row/column");
        Scalar k[4] = {key[x], key[y], Scalar{ii - (ii > xx ? 1 : 0)}, Scalar{jj - (jj > yy ? 1 : 0)}};
        std::vector<Scalar> v(value.begin(), value.end());
        if (vi && (ii + jj) % 2 != 0) v[*vi] = scalar_mul(v[*vi], Scalar{std::int64_t{-1}});
        out.emit(k, v);
      };
      return b;
    };
    fn.probe_schemas = {Schema({{"i", Kind::Int}, {"j", Kind::Int}, {"x", Kind::Int}, {"y", Kind::Int}},
                               {{"v", Kind::Int, std::int64_t{0}}})};
    return fn;
  });

  r.register_predicate("perm", [](const Schema& s, std::span<const Scalar> key, std::span<const Scalar>) {
    return is_permutation_of_range(perm_values(perm_key_columns(s), key));
  });

  return r;
}

}  // namespace iterlara

#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "iterlara/scalar.hpp"
#include "iterlara/scalar_expr.hpp"
#include "iterlara/table.hpp"

namespace iterlara {

// ⊕ / ⊗: a commutative, associative scalar function with an identity per kind.
struct BinaryFn {
  std::string name;
  std::function<Scalar(const Scalar&, const Scalar&)> apply;
  std::map<Kind, Scalar> identity;     // kinds the function accepts
  std::map<Kind, Scalar> annihilator;  // x ⊗ a = a, when one exists
  std::optional<std::int64_t> op_cost;
  // Cartesian pairing: joins on equality of shared values and keeps both
  // sides' attributes. Its property check is waived.
  bool pairing = false;

  bool supports(Kind k) const { return identity.count(k) != 0; }
  bool annihilates(Kind k, const Scalar& v) const;
};

// Receives the fragment produced by a flatmap for one input record.
class FragmentSink {
public:
  virtual ~FragmentSink() = default;
  // Without key rewriting `key` holds only the appended key attributes;
  // with rewriting it holds the complete output key.
  virtual void emit(std::span<const Scalar> key, std::span<const Scalar> value) = 0;
};

struct BoundFlatmap {
  Schema output;
  std::function<void(std::span<const Scalar> key, std::span<const Scalar> value, FragmentSink& out)> row;
};

// f of ext: maps each record to a finite fragment over the output schema.
struct FlatmapFn {
  std::string name;
  std::optional<std::int64_t> op_cost;
  // Output keys are the input keys unchanged and each record yields at most
  // one output record (usable by map).
  bool key_preserving = false;
  // The fragment carries full output keys instead of appended ones.
  bool rewrites_keys = false;
  // Binds the function to an input schema; throws SchemaMismatch when the
  // input does not fit.
  std::function<BoundFlatmap(const Schema& input)> bind;
  // Input schemas used to spot-check f(defaults) = defaults at registration.
  std::vector<Schema> probe_schemas;
};

// Row predicate over a whole record (e.g. "the k-keys form a permutation").
using RowPredicate = std::function<bool(const Schema&, std::span<const Scalar> key, std::span<const Scalar> value)>;

// Name plus literal arguments, e.g. inc_key(entry_E) or const(w, 3).
struct FnRef {
  std::string name;
  std::vector<Scalar> args;
  friend bool operator==(const FnRef& a, const FnRef& b);
};

using FlatmapFactory = std::function<FlatmapFn(const std::vector<Scalar>& args)>;

// Append-only registry. Built-ins: plus, times, max, min, count, or, and,
// pair, plus the flatmap families used by the standard library and the BF
// compiler.
class FunctionRegistry {
public:
  FunctionRegistry() = default;
  static FunctionRegistry with_builtins();

  // Verifies commutativity, associativity and identity on `sample_budget`
  // random triples per supported kind (plus the identity itself).
  const BinaryFn& register_binary(BinaryFn fn, int sample_budget = 1000, std::uint64_t seed = 0x1a7a);
  void register_flatmap(FlatmapFn fn);
  void register_flatmap_family(std::string name, FlatmapFactory factory);
  void register_predicate(std::string name, RowPredicate p);

  bool has_binary(const std::string& name) const;
  bool has_flatmap(const std::string& name) const;
  bool has_predicate(const std::string& name) const;

  // Throw UnknownFunction.
  const BinaryFn& binary(const std::string& name) const;
  FlatmapFn flatmap(const FnRef& ref) const;
  const RowPredicate& predicate(const std::string& name) const;

private:
  std::map<std::string, std::shared_ptr<const BinaryFn>> binaries_;
  std::map<std::string, FlatmapFn> flatmaps_;
  std::map<std::string, FlatmapFactory> families_;
  std::map<std::string, RowPredicate> predicates_;
};

// Checks the three laws; throws PropertyViolation on the first failure.
void check_binary_properties(const BinaryFn& fn, int sample_budget, std::uint64_t seed);
// Throws DefaultViolation when f(defaults) has a non-default value.
void check_default_preservation(const FlatmapFn& fn);

// Builders for functions defined in the DSL prelude.
BinaryFn make_binary_from_expr(std::string name, std::string x, std::string y, ScalarExprPtr body, Scalar identity,
                               std::int64_t cost);
// Applies `body` (parameter `v`) to every value attribute; keys unchanged.
FlatmapFn make_value_map(std::string name, std::string v, ScalarExprPtr body, std::int64_t cost);

// Attribute names of the form k<digits>, in index order (permutation keys of
// the determinant construction).
std::vector<std::size_t> perm_key_columns(const Schema& s);

}  // namespace iterlara

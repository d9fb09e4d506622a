#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>
#include <variant>

namespace iterlara {

enum class Kind { Int, Real, Bool, Text };

const char* kind_name(Kind k);
// Accepts "int", "real", "bool", "text". Throws Error(SchemaMismatch) otherwise.
Kind parse_kind(std::string_view s);
bool is_numeric(Kind k);

// Interned string. Two symbols with the same text share one pointer, so
// equality is a pointer compare and Scalar stays trivially copyable.
class Symbol {
public:
  Symbol();
  explicit Symbol(std::string_view text);

  const std::string& str() const { return *p_; }

  friend bool operator==(Symbol a, Symbol b) { return a.p_ == b.p_; }
  friend std::strong_ordering operator<=>(Symbol a, Symbol b) {
    if (a.p_ == b.p_) return std::strong_ordering::equal;
    int c = a.p_->compare(*b.p_);
    return c < 0 ? std::strong_ordering::less : std::strong_ordering::greater;
  }

private:
  const std::string* p_;
};

using Scalar = std::variant<std::int64_t, double, bool, Symbol>;
using ScalarValue = Scalar;

inline Kind kind_of(const Scalar& s) { return static_cast<Kind>(s.index()); }

inline Scalar int_scalar(std::int64_t v) { return Scalar{v}; }
inline Scalar real_scalar(double v) { return Scalar{v}; }
inline Scalar bool_scalar(bool v) { return Scalar{v}; }
inline Scalar text_scalar(std::string_view v) { return Scalar{Symbol(v)}; }

// Zero-like value of a kind: 0, 0.0, false, "".
Scalar zero_of(Kind k);

// Total order used for canonical record order. Kinds order before values;
// reals compare numerically (NaN sorts last).
int compare(const Scalar& a, const Scalar& b);
inline bool less(const Scalar& a, const Scalar& b) { return compare(a, b) < 0; }

// Exact equality for int/bool/text, bitwise-numeric equality for reals.
bool same(const Scalar& a, const Scalar& b);
// Like same() but reals within an absolute tolerance.
bool close(const Scalar& a, const Scalar& b, double tol);

// Numeric view; throws SchemaMismatch for bool/text.
double as_real(const Scalar& s);
std::int64_t as_int(const Scalar& s);

// Human-oriented rendering: 3, 4.5, true, abc.
std::string to_string(const Scalar& s);
// Shortest round-trippable rendering of a double ("2", "4.5", "1e-09").
std::string format_real(double v);
// Converts a scalar to the given kind where lossless (int->real, integral real->int).
Scalar coerce(const Scalar& s, Kind k);

}  // namespace iterlara

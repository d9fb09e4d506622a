#include "iterlara/scalar.hpp"

#include <charconv>
#include <cmath>
#include <mutex>
#include <unordered_set>

#include "iterlara/error.hpp"

namespace iterlara {

namespace {

struct SymbolPool {
  std::mutex mu;
  std::unordered_set<std::string> strings;
};

SymbolPool& pool() {
  static SymbolPool* p = new SymbolPool();  // never destroyed; symbols outlive statics
  return *p;
}

const std::string* intern(std::string_view text) {
  auto& p = pool();
  std::lock_guard<std::mutex> lock(p.mu);
  auto it = p.strings.emplace(text).first;
  return &*it;
}

const std::string* empty_symbol() {
  static const std::string* e = intern("");
  return e;
}

}  // namespace

Symbol::Symbol() : p_(empty_symbol()) {}
Symbol::Symbol(std::string_view text) : p_(text.empty() ? empty_symbol() : intern(text)) {}

const char* kind_name(Kind k) {
  switch (k) {
    case Kind::Int: return "int";
    case Kind::Real: return "real";
    case Kind::Bool: return "bool";
    case Kind::Text: return "text";
  }
  return "?";
}

Kind parse_kind(std::string_view s) {
  if (s == "int") return Kind::Int;
  if (s == "real") return Kind::Real;
  if (s == "bool") return Kind::Bool;
  if (s == "text") return Kind::Text;
  fail(ErrorCode::SchemaMismatch, "unknown kind '" + std::string(s) + "'");
}

bool is_numeric(Kind k) { return k == Kind::Int || k == Kind::Real; }

Scalar zero_of(Kind k) {
  switch (k) {
    case Kind::Int: return Scalar{std::int64_t{0}};
    case Kind::Real: return Scalar{0.0};
    case Kind::Bool: return Scalar{false};
    case Kind::Text: return Scalar{Symbol()};
  }
  return Scalar{std::int64_t{0}};
}

int compare(const Scalar& a, const Scalar& b) {
  if (a.index() != b.index()) return a.index() < b.index() ? -1 : 1;
  switch (a.index()) {
    case 0: {
      auto x = std::get<0>(a), y = std::get<0>(b);
      return x < y ? -1 : (x > y ? 1 : 0);
    }
    case 1: {
      double x = std::get<1>(a), y = std::get<1>(b);
      bool nx = std::isnan(x), ny = std::isnan(y);
      if (nx || ny) return nx == ny ? 0 : (nx ? 1 : -1);
      return x < y ? -1 : (x > y ? 1 : 0);
    }
    case 2: {
      int x = std::get<2>(a), y = std::get<2>(b);
      return x - y;
    }
    default: {
      auto c = std::get<3>(a) <=> std::get<3>(b);
      return c < 0 ? -1 : (c > 0 ? 1 : 0);
    }
  }
}

bool same(const Scalar& a, const Scalar& b) { return compare(a, b) == 0; }

bool close(const Scalar& a, const Scalar& b, double tol) {
  if (a.index() == 1 || b.index() == 1) {
    if (!is_numeric(kind_of(a)) || !is_numeric(kind_of(b))) return false;
    return std::fabs(as_real(a) - as_real(b)) <= tol;
  }
  return same(a, b);
}

double as_real(const Scalar& s) {
  if (auto i = std::get_if<std::int64_t>(&s)) return static_cast<double>(*i);
  if (auto d = std::get_if<double>(&s)) return *d;
  fail(ErrorCode::SchemaMismatch, std::string("expected a numeric value, got ") + kind_name(kind_of(s)));
}

std::int64_t as_int(const Scalar& s) {
  if (auto i = std::get_if<std::int64_t>(&s)) return *i;
  if (auto d = std::get_if<double>(&s)) {
    if (std::trunc(*d) == *d && std::fabs(*d) < 9.2e18) return static_cast<std::int64_t>(*d);
    fail(ErrorCode::SchemaMismatch, "real value " + format_real(*d) + " is not integral");
  }
  fail(ErrorCode::SchemaMismatch, std::string("expected an integer value, got ") + kind_name(kind_of(s)));
}

std::string format_real(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v < 0 ? "-inf" : "inf";
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

std::string to_string(const Scalar& s) {
  switch (s.index()) {
    case 0: return std::to_string(std::get<0>(s));
    case 1: return format_real(std::get<1>(s));
    case 2: return std::get<2>(s) ? "true" : "false";
    default: return std::get<3>(s).str();
  }
}

Scalar coerce(const Scalar& s, Kind k) {
  Kind from = kind_of(s);
  if (from == k) return s;
  if (from == Kind::Int && k == Kind::Real) return Scalar{static_cast<double>(std::get<0>(s))};
  if (from == Kind::Real && k == Kind::Int) return Scalar{as_int(s)};
  fail(ErrorCode::SchemaMismatch,
       std::string("cannot convert ") + kind_name(from) + " value " + to_string(s) + " to " + kind_name(k));
}

}  // namespace iterlara

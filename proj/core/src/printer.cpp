#include <cctype>

#include "iterlara/dsl.hpp"
#include "iterlara/error.hpp"

namespace iterlara {

namespace {

bool ident_like(const std::string& s) {
  if (s.empty() || s == "true" || s == "false") return false;
  if (!std::isalpha(static_cast<unsigned char>(s[0])) && s[0] != '_') return false;
  for (char c : s)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '\'') return false;
  return true;
}

std::string fnref_source(const FnRef& f) {
  if (f.args.empty()) return f.name;
  std::string s = f.name + "(";
  for (std::size_t i = 0; i < f.args.size(); ++i) {
    const Scalar& a = f.args[i];
    s += i ? ", " : "";
    if (kind_of(a) == Kind::Text && ident_like(std::get<Symbol>(a).str()))
      s += std::get<Symbol>(a).str();
    else
      s += scalar_literal(a);
  }
  return s + ")";
}

std::string join_names(const std::vector<std::string>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + v[i];
  return s;
}

// Keyless one-attribute numeric tables print as plain numbers.
bool number_literal(const AssociativeTable& t, std::string& out) {
  const Schema& s = t.schema();
  if (s.key_arity() != 0 || s.value_arity() != 1) return false;
  const ValueAttr& v = s.values()[0];
  if (v.name != "v" || !is_numeric(v.kind) || !same(v.default_value, zero_of(v.kind)) || t.size() > 1) return false;
  out = scalar_literal(t.empty() ? zero_of(v.kind) : t.value(0)[0]);
  return true;
}

class Printer {
public:
  explicit Printer(bool unicode) : u_(unicode) {}

  std::string expr(const Expression& e) {
    const Node& n = *e;
    switch (n.kind) {
      case NodeKind::TableRef: return n.name;
      case NodeKind::TableLit: {
        std::string s;
        if (number_literal(n.table, s)) return s;
        return print_table_literal(n.table);
      }
      case NodeKind::Union:
        if (u_) return "(" + expr(n.args[0]) + " ⧗_" + n.fn + " " + expr(n.args[1]) + ")";
        return "union[" + n.fn + "](" + expr(n.args[0]) + ", " + expr(n.args[1]) + ")";
      case NodeKind::RelaxedJoin:
        if (u_) return "(" + expr(n.args[0]) + " ⋈_" + n.fn + " " + expr(n.args[1]) + ")";
        return "join[" + n.fn + "](" + expr(n.args[0]) + ", " + expr(n.args[1]) + ")";
      case NodeKind::StrictJoin:
        if (u_) return "(" + expr(n.args[0]) + " ⋈̂_" + n.fn + " " + expr(n.args[1]) + ")";
        return "sjoin[" + n.fn + "](" + expr(n.args[0]) + ", " + expr(n.args[1]) + ")";
      case NodeKind::Ext:
        if (u_) return "ext_{" + fnref_source(n.fref) + "}(" + expr(n.args[0]) + ")";
        return "ext[" + fnref_source(n.fref) + "](" + expr(n.args[0]) + ")";
      case NodeKind::Map:
        if (u_) return "map_{" + fnref_source(n.fref) + "}(" + expr(n.args[0]) + ")";
        return "map[" + fnref_source(n.fref) + "](" + expr(n.args[0]) + ")";
      case NodeKind::Relational: return rel(n);
      case NodeKind::Iter:
        if (u_) return "iter_{" + fn(*n.body) + "}^{" + expr(n.args[0]) + "}(" + expr(n.args[1]) + ")";
        return "iter[" + fn(*n.body) + "; " + expr(n.args[0]) + "](" + expr(n.args[1]) + ")";
      case NodeKind::ForN:
        if (u_) return "for^" + std::to_string(n.n) + "_{" + fn(*n.body) + "}(" + expr(n.args[0]) + ")";
        return "for[" + fn(*n.body) + "; " + std::to_string(n.n) + "](" + expr(n.args[0]) + ")";
      case NodeKind::ForCond:
        if (u_) return "for^{" + expr(n.args[0]) + "}_{" + fn(*n.body) + "}(" + expr(n.args[1]) + ")";
        return "forc[" + fn(*n.body) + "; " + expr(n.args[0]) + "](" + expr(n.args[1]) + ")";
      case NodeKind::Let: return "let " + n.name + " = " + expr(n.args[0]) + " in " + expr(n.args[1]);
    }
    fail(ErrorCode::InvalidArgument, "unknown node kind");
  }

  std::string fn(const ExprFn& f) {
    std::string s = "(" + f.param + ") => " + expr(f.body);
    for (const auto& [name, e] : f.aux) s += ", " + name + " := " + expr(e);
    return s;
  }

private:
  std::string rel(const Node& n) {
    auto arg = [&](std::size_t i) { return expr(n.args[i]); };
    switch (n.rel) {
      case RelOp::Select: return (u_ ? "σ[" : "select[") + print_scalar_expr(*n.pred) + "](" + arg(0) + ")";
      case RelOp::Project: return (u_ ? "π[" : "project[") + join_names(n.names) + "](" + arg(0) + ")";
      case RelOp::Rename: {
        std::string s = u_ ? "ρ[" : "rename[";
        for (std::size_t i = 0; i < n.renames.size(); ++i)
          s += (i ? ", " : "") + n.renames[i].first + " -> " + n.renames[i].second;
        return s + "](" + arg(0) + ")";
      }
      case RelOp::Aggregate: {
        std::string s = (u_ ? "γ[" : "agg[") + n.fn;
        if (!n.names.empty()) s += "; " + join_names(n.names);
        return s + "](" + arg(0) + ")";
      }
      case RelOp::StateInit: {
        std::string s = "state_init[" + join_names(n.names) + "](";
        for (std::size_t i = 0; i < n.args.size(); ++i) s += (i ? ", " : "") + arg(i);
        return s + ")";
      }
      case RelOp::StateGet: return "state_get[" + n.names[0] + "](" + arg(0) + ")";
      case RelOp::StateSet: return "state_set[" + n.names[0] + "](" + arg(0) + ", " + arg(1) + ")";
      default: break;
    }
    if (u_) {
      const char* sym = nullptr;
      switch (n.rel) {
        case RelOp::Divide: sym = " ÷ "; break;
        case RelOp::AntijoinL: sym = " ▷ "; break;
        case RelOp::AntijoinR: sym = " ◁ "; break;
        case RelOp::SetUnion: sym = " ∪ "; break;
        case RelOp::Intersect: sym = " ∩ "; break;
        case RelOp::Difference: sym = " ∖ "; break;
        case RelOp::Lt: sym = " < "; break;
        case RelOp::Le: sym = " ≤ "; break;
        case RelOp::Eq: sym = " = "; break;
        case RelOp::Ne: sym = " ≠ "; break;
        case RelOp::Gt: sym = " > "; break;
        case RelOp::Ge: sym = " ≥ "; break;
        default: break;
      }
      if (sym) return "(" + arg(0) + sym + arg(1) + ")";
    }
    return std::string(rel_op_name(n.rel)) + "(" + arg(0) + ", " + arg(1) + ")";
  }

  bool u_;
};

}  // namespace

std::string print_table_literal(const AssociativeTable& t) {
  const Schema& s = t.schema();
  std::string out = "table[";
  for (std::size_t i = 0; i < s.key_arity(); ++i)
    out += (i ? ", " : "") + s.keys()[i].name + ":" + kind_name(s.keys()[i].kind);
  out += s.key_arity() ? " -> " : "-> ";
  for (std::size_t i = 0; i < s.value_arity(); ++i) {
    const ValueAttr& v = s.values()[i];
    out += (i ? ", " : "") + v.name + ":" + kind_name(v.kind) + " = " + scalar_literal(v.default_value);
  }
  out += "]{";
  for (std::size_t r = 0; r < t.size(); ++r) {
    out += r ? ", (" : "(";
    auto k = t.key(r);
    for (std::size_t i = 0; i < k.size(); ++i) out += (i ? ", " : "") + scalar_literal(k[i]);
    out += "): (";
    auto v = t.value(r);
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + scalar_literal(v[i]);
    out += ")";
  }
  return out + "}";
}

std::string print_expression(const Expression& e, const PrintOptions& opts) { return Printer(opts.unicode).expr(e); }

std::string print_script(const Script& s) {
  Printer p(false);
  std::string out;
  for (const auto& d : s.binaries)
    out += "fn " + d.name + "(" + d.x + ", " + d.y + ") = " + print_scalar_expr(*d.body) + " identity = " +
           scalar_literal(d.identity) + " cost = " + std::to_string(d.cost) + ";\n";
  for (const auto& d : s.mapfns)
    out += "mapfn " + d.name + "(" + d.v + ") = " + print_scalar_expr(*d.body) + " cost = " + std::to_string(d.cost) +
           ";\n";
  for (const auto& d : s.fns) {
    out += "fn " + d.name + "(" + d.fn->param + ") = " + p.expr(d.fn->body);
    for (std::size_t i = 0; i < d.fn->aux.size(); ++i)
      out += (i ? ", " : " with ") + d.fn->aux[i].first + " := " + p.expr(d.fn->aux[i].second);
    out += ";\n";
  }
  for (const auto& d : s.loads) out += "load " + d.name + " " + scalar_literal(text_scalar(d.path)) + ";\n";
  for (const auto& [n, e] : s.lets) out += "let " + n + " = " + p.expr(e) + ";\n";
  if (s.result) out += p.expr(s.result) + "\n";
  return out;
}

}  // namespace iterlara

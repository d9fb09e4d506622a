#include "iterlara/expr.hpp"

#include "iterlara/error.hpp"

namespace iterlara {

const char* rel_op_name(RelOp op) {
  switch (op) {
    case RelOp::Select: return "select";
    case RelOp::Project: return "project";
    case RelOp::Rename: return "rename";
    case RelOp::Aggregate: return "agg";
    case RelOp::SetUnion: return "setunion";
    case RelOp::Intersect: return "intersect";
    case RelOp::Difference: return "minus";
    case RelOp::Divide: return "div";
    case RelOp::AntijoinL: return "antijoinL";
    case RelOp::AntijoinR: return "antijoinR";
    case RelOp::Concat: return "concat";
    case RelOp::Lt: return "lt";
    case RelOp::Le: return "le";
    case RelOp::Eq: return "eq";
    case RelOp::Ne: return "ne";
    case RelOp::Gt: return "gt";
    case RelOp::Ge: return "ge";
    case RelOp::StateInit: return "state_init";
    case RelOp::StateGet: return "state_get";
    case RelOp::StateSet: return "state_set";
  }
  return "?";
}

int rel_op_arity(RelOp op) {
  switch (op) {
    case RelOp::Select:
    case RelOp::Project:
    case RelOp::Rename:
    case RelOp::Aggregate:
    case RelOp::StateGet: return 1;
    case RelOp::StateInit: return -1;
    default: return 2;
  }
}

namespace ir {

namespace {
std::shared_ptr<Node> node(NodeKind k) {
  auto n = std::make_shared<Node>();
  n->kind = k;
  return n;
}
}  // namespace

Expression ref(std::string name) {
  auto n = node(NodeKind::TableRef);
  n->name = std::move(name);
  return n;
}

Expression lit(AssociativeTable t) {
  auto n = node(NodeKind::TableLit);
  n->table = std::move(t);
  return n;
}

static Expression binary(NodeKind k, Expression a, Expression b, std::string fn) {
  auto n = node(k);
  n->args = {std::move(a), std::move(b)};
  n->fn = std::move(fn);
  return n;
}

Expression union_(Expression a, Expression b, std::string fn) { return binary(NodeKind::Union, a, b, fn); }
Expression sjoin(Expression a, Expression b, std::string fn) { return binary(NodeKind::StrictJoin, a, b, fn); }
Expression join(Expression a, Expression b, std::string fn) { return binary(NodeKind::RelaxedJoin, a, b, fn); }

Expression ext(Expression a, FnRef f) {
  auto n = node(NodeKind::Ext);
  n->args = {std::move(a)};
  n->fref = std::move(f);
  return n;
}

Expression map(Expression a, FnRef f) {
  auto n = node(NodeKind::Map);
  n->args = {std::move(a)};
  n->fref = std::move(f);
  return n;
}

static std::shared_ptr<Node> relnode(RelOp op, std::vector<Expression> args) {
  auto n = node(NodeKind::Relational);
  n->rel = op;
  n->args = std::move(args);
  return n;
}

Expression select(Expression a, ScalarExprPtr pred) {
  auto n = relnode(RelOp::Select, {std::move(a)});
  n->pred = std::move(pred);
  return n;
}

Expression project(Expression a, std::vector<std::string> attrs) {
  auto n = relnode(RelOp::Project, {std::move(a)});
  n->names = std::move(attrs);
  return n;
}

Expression rename(Expression a, std::vector<std::pair<std::string, std::string>> pairs) {
  auto n = relnode(RelOp::Rename, {std::move(a)});
  n->renames = std::move(pairs);
  return n;
}

Expression aggregate(Expression a, std::string fn, std::vector<std::string> keys) {
  auto n = relnode(RelOp::Aggregate, {std::move(a)});
  n->fn = std::move(fn);
  n->names = std::move(keys);
  return n;
}

Expression rel(RelOp op, std::vector<Expression> args) {
  int arity = rel_op_arity(op);
  if (arity >= 0 && static_cast<std::size_t>(arity) != args.size())
    fail(ErrorCode::InvalidArgument, std::string(rel_op_name(op)) + " takes " + std::to_string(arity) + " operands");
  return relnode(op, std::move(args));
}

Expression state_init(std::vector<std::string> names, std::vector<Expression> args) {
  if (names.size() != args.size()) fail(ErrorCode::InvalidArgument, "state_init needs one operand per slot");
  auto n = relnode(RelOp::StateInit, std::move(args));
  n->names = std::move(names);
  return n;
}

Expression state_get(Expression s, std::string name) {
  auto n = relnode(RelOp::StateGet, {std::move(s)});
  n->names = {std::move(name)};
  return n;
}

Expression state_set(Expression s, std::string name, Expression value) {
  auto n = relnode(RelOp::StateSet, {std::move(s), std::move(value)});
  n->names = {std::move(name)};
  return n;
}

Expression iter(ExprFnPtr f, Expression cond, Expression seed) {
  auto n = node(NodeKind::Iter);
  n->body = std::move(f);
  n->args = {std::move(cond), std::move(seed)};
  return n;
}

Expression for_n(ExprFnPtr f, std::int64_t count, Expression seed) {
  if (count < 0) fail(ErrorCode::NegativeCond, "for needs a non-negative count");
  auto n = node(NodeKind::ForN);
  n->body = std::move(f);
  n->n = count;
  n->args = {std::move(seed)};
  return n;
}

Expression for_cond(ExprFnPtr f, Expression cond, Expression seed) {
  auto n = node(NodeKind::ForCond);
  n->body = std::move(f);
  n->args = {std::move(cond), std::move(seed)};
  return n;
}

Expression let(std::string name, Expression value, Expression body) {
  auto n = node(NodeKind::Let);
  n->name = std::move(name);
  n->args = {std::move(value), std::move(body)};
  return n;
}

ExprFnPtr fn(std::string param, Expression body, std::vector<std::pair<std::string, Expression>> aux, std::string name) {
  auto f = std::make_shared<ExprFn>();
  f->param = std::move(param);
  f->body = std::move(body);
  f->aux = std::move(aux);
  f->name = std::move(name);
  return f;
}

Expression sum(Expression a) { return aggregate(std::move(a), "plus", {}); }
Expression count(Expression a) { return sum(map(std::move(a), FnRef{"one", {}})); }

}  // namespace ir

// ------------------------------------------------------------------ equality

namespace {

// Binder pairs in scope, innermost last. Bound names compare by position, so
// renaming a let binder or a loop parameter does not change equality.
using Binds = std::vector<std::pair<std::string, std::string>>;

bool same_ref(const std::string& a, const std::string& b, const Binds& binds) {
  for (auto it = binds.rbegin(); it != binds.rend(); ++it)
    if (it->first == a || it->second == b) return it->first == a && it->second == b;
  return a == b;
}

bool eq(const Expression& a, const Expression& b, Binds& binds);

bool eq_fn(const ExprFnPtr& a, const ExprFnPtr& b, Binds& binds) {
  if (!a || !b) return !a && !b;
  if (a->aux.size() != b->aux.size()) return false;
  binds.emplace_back(a->param, b->param);
  bool ok = eq(a->body, b->body, binds);
  for (std::size_t i = 0; ok && i < a->aux.size(); ++i)
    ok = a->aux[i].first == b->aux[i].first && eq(a->aux[i].second, b->aux[i].second, binds);
  binds.pop_back();
  return ok;
}

bool eq(const Expression& a, const Expression& b, Binds& binds) {
  if (!a || !b) return !a && !b;
  if (a.get() == b.get() && binds.empty()) return true;
  const Node& x = *a;
  const Node& y = *b;
  if (x.kind != y.kind || x.args.size() != y.args.size()) return false;
  if (x.kind == NodeKind::Let) {
    if (!eq(x.args[0], y.args[0], binds)) return false;
    binds.emplace_back(x.name, y.name);
    bool ok = eq(x.args[1], y.args[1], binds);
    binds.pop_back();
    return ok;
  }
  if (x.kind == NodeKind::Iter && x.body && y.body) {
    // the condition also sees the loop parameter
    binds.emplace_back(x.body->param, y.body->param);
    bool ok = eq(x.args[0], y.args[0], binds);
    binds.pop_back();
    return ok && eq(x.args[1], y.args[1], binds) && eq_fn(x.body, y.body, binds);
  }
  for (std::size_t i = 0; i < x.args.size(); ++i)
    if (!eq(x.args[i], y.args[i], binds)) return false;
  switch (x.kind) {
    case NodeKind::TableRef: return same_ref(x.name, y.name, binds);
    case NodeKind::TableLit: return x.table == y.table;
    case NodeKind::Union:
    case NodeKind::StrictJoin:
    case NodeKind::RelaxedJoin: return x.fn == y.fn;
    case NodeKind::Ext:
    case NodeKind::Map: return x.fref == y.fref;
    case NodeKind::Relational:
      return x.rel == y.rel && x.fn == y.fn && x.names == y.names && x.renames == y.renames &&
             iterlara::equal(x.pred, y.pred);
    case NodeKind::Iter:
    case NodeKind::ForCond: return eq_fn(x.body, y.body, binds);
    case NodeKind::ForN: return x.n == y.n && eq_fn(x.body, y.body, binds);
    case NodeKind::Let: break;
  }
  return false;
}

}  // namespace

bool equal(const ExprFnPtr& a, const ExprFnPtr& b) {
  Binds binds;
  return eq_fn(a, b, binds);
}

bool equal(const Expression& a, const Expression& b) {
  Binds binds;
  return eq(a, b, binds);
}

// -------------------------------------------------------------- substitution

namespace {

Expression subst(const Expression& e, const std::map<std::string, Expression>& repl);

ExprFnPtr subst_fn(const ExprFnPtr& f, const std::map<std::string, Expression>& repl) {
  if (!f->aux.empty()) fail(ErrorCode::InvalidArgument, "substitution into a loop with auxiliary updates");
  if (repl.count(f->param)) {
    auto inner = repl;
    inner.erase(f->param);
    if (inner.empty()) return f;
    return ir::fn(f->param, subst(f->body, inner), {}, f->name);
  }
  Expression body = subst(f->body, repl);
  if (body == f->body) return f;
  return ir::fn(f->param, body, {}, f->name);
}

Expression subst(const Expression& e, const std::map<std::string, Expression>& repl) {
  if (repl.empty()) return e;
  const Node& n = *e;
  if (n.kind == NodeKind::TableRef) {
    auto it = repl.find(n.name);
    return it == repl.end() ? e : it->second;
  }
  auto copy = std::make_shared<Node>(n);
  bool changed = false;
  if (n.kind == NodeKind::Let) {
    copy->args[0] = subst(n.args[0], repl);
    if (repl.count(n.name)) {
      auto inner = repl;
      inner.erase(n.name);
      copy->args[1] = subst(n.args[1], inner);
    } else {
      copy->args[1] = subst(n.args[1], repl);
    }
  } else if (n.kind == NodeKind::Iter) {
    // The condition sees the parameter and, when the seed is a reference, the seed name.
    auto inner = repl;
    inner.erase(n.body->param);
    if (n.args[1]->kind == NodeKind::TableRef) inner.erase(n.args[1]->name);
    copy->args[0] = subst(n.args[0], inner);
    copy->args[1] = subst(n.args[1], repl);
    copy->body = subst_fn(n.body, repl);
    changed = copy->body != n.body;
  } else {
    for (auto& a : copy->args) a = subst(a, repl);
    if (n.body) {
      copy->body = subst_fn(n.body, repl);
      changed = copy->body != n.body;
    }
  }
  for (std::size_t i = 0; i < n.args.size(); ++i)
    if (copy->args[i] != n.args[i]) changed = true;
  return changed ? copy : e;
}

void collect_free(const Expression& e, std::set<std::string>& bound, std::set<std::string>& out) {
  const Node& n = *e;
  auto with_bound = [&](const std::vector<std::string>& names, auto&& fn) {
    std::vector<std::string> added;
    for (const auto& nm : names)
      if (bound.insert(nm).second) added.push_back(nm);
    fn();
    for (const auto& nm : added) bound.erase(nm);
  };
  switch (n.kind) {
    case NodeKind::TableRef:
      if (!bound.count(n.name)) out.insert(n.name);
      return;
    case NodeKind::Let:
      collect_free(n.args[0], bound, out);
      with_bound({n.name}, [&] { collect_free(n.args[1], bound, out); });
      return;
    case NodeKind::Iter: {
      std::vector<std::string> cb{n.body->param};
      if (n.args[1]->kind == NodeKind::TableRef) cb.push_back(n.args[1]->name);
      with_bound(cb, [&] { collect_free(n.args[0], bound, out); });
      collect_free(n.args[1], bound, out);
      break;
    }
    default:
      for (const auto& a : n.args) collect_free(a, bound, out);
  }
  if (n.body) {
    with_bound({n.body->param}, [&] {
      collect_free(n.body->body, bound, out);
      for (const auto& [name, x] : n.body->aux) collect_free(x, bound, out);
    });
    for (const auto& [name, x] : n.body->aux)
      if (!bound.count(name)) out.insert(name);
  }
}

void number(const Expression& e, std::unordered_map<const Node*, std::size_t>& ids) {
  ids.emplace(e.get(), ids.size());
  for (const auto& a : e->args) number(a, ids);
  if (e->body) {
    number(e->body->body, ids);
    for (const auto& [name, x] : e->body->aux) number(x, ids);
  }
}

std::string fnref_text(const FnRef& f) {
  if (f.args.empty()) return f.name;
  std::string s = f.name + "(";
  for (std::size_t i = 0; i < f.args.size(); ++i) s += (i ? ", " : "") + to_string(f.args[i]);
  return s + ")";
}

}  // namespace

Expression substitute(const Expression& e, const std::string& name, const Expression& replacement) {
  return subst(e, {{name, replacement}});
}

Expression substitute(const Expression& e, const std::map<std::string, Expression>& repl) { return subst(e, repl); }

Expression apply_fn(const ExprFn& f, const Expression& arg) {
  if (!f.aux.empty()) fail(ErrorCode::InvalidArgument, "literal application of a function with auxiliary updates");
  return subst(f.body, {{f.param, arg}});
}

std::set<std::string> free_names(const Expression& e) {
  std::set<std::string> bound, out;
  collect_free(e, bound, out);
  return out;
}

std::unordered_map<const Node*, std::size_t> number_nodes(const Expression& e) {
  std::unordered_map<const Node*, std::size_t> ids;
  number(e, ids);
  return ids;
}

std::string node_label(const Node& n) {
  switch (n.kind) {
    case NodeKind::TableRef: return n.name;
    case NodeKind::TableLit: return "table";
    case NodeKind::Union: return "union[" + n.fn + "]";
    case NodeKind::StrictJoin: return "sjoin[" + n.fn + "]";
    case NodeKind::RelaxedJoin: return "join[" + n.fn + "]";
    case NodeKind::Ext: return "ext[" + fnref_text(n.fref) + "]";
    case NodeKind::Map: return "map[" + fnref_text(n.fref) + "]";
    case NodeKind::Relational: {
      std::string s = rel_op_name(n.rel);
      if (n.rel == RelOp::Aggregate) return s + "[" + n.fn + "]";
      if (n.rel == RelOp::StateGet || n.rel == RelOp::StateSet) return s + "[" + n.names[0] + "]";
      return s;
    }
    case NodeKind::Iter: return "iter";
    case NodeKind::ForN: return "for[" + std::to_string(n.n) + "]";
    case NodeKind::ForCond: return "forc";
    case NodeKind::Let: return "let " + n.name;
  }
  return "?";
}

}  // namespace iterlara

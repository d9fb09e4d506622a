#include "iterlara/eval.hpp"

#include <atomic>
#include <cstdlib>
#include <unordered_map>

#include "iterlara/error.hpp"
#include "iterlara/state.hpp"

namespace iterlara {

std::uint64_t default_fuel() {
  if (const char* s = std::getenv("ITERLARA_FUEL")) {
    char* end = nullptr;
    unsigned long long v = std::strtoull(s, &end, 10);
    if (end && *end == '\0' && end != s) return v;
  }
  return 1000000;
}

const FunctionRegistry& builtin_registry() {
  static const FunctionRegistry r = FunctionRegistry::with_builtins();
  return r;
}

namespace {

struct Scope {
  const std::string* name;
  const AssociativeTable* value;
  const Scope* parent;
};

class Evaluator {
public:
  Evaluator(const Environment& env, const EvalOptions& opts, EvalStats* stats)
      : env_(env), opts_(opts), reg_(opts.registry ? *opts.registry : builtin_registry()), stats_(stats) {}

  AssociativeTable eval(const Expression& e, const Scope* scope) {
    try {
      return eval_node(*e, scope);
    } catch (Error& err) {
      err.prepend_path(node_label(*e));
      throw;
    }
  }

private:
  const AssociativeTable& resolve(const std::string& name, const Scope* scope) const {
    for (const Scope* s = scope; s; s = s->parent)
      if (s->name && *s->name == name) return *s->value;
    auto it = env_.find(name);
    if (it == env_.end()) fail(ErrorCode::UnboundName, "unbound table name '" + name + "'");
    return it->second;
  }

  const FlatmapFn& flatmap(const Node& n) {
    auto it = flatmaps_.find(&n);
    if (it != flatmaps_.end()) return it->second;
    return flatmaps_.emplace(&n, reg_.flatmap(n.fref)).first->second;
  }

  void burn_fuel(const Node& loop) {
    if (used_ >= opts_.fuel)
      fail(ErrorCode::FuelExhausted, "iteration budget of " + std::to_string(opts_.fuel) + " exhausted");
    ++used_;
    if (stats_) ++stats_->iterations;
    if (opts_.observer) opts_.observer->on_iteration(loop);
  }

  AssociativeTable notify(const Node& n, std::initializer_list<const AssociativeTable*> in, AssociativeTable out,
                          const OpStats& st) {
    if (opts_.observer) {
      std::vector<const AssociativeTable*> v(in);
      opts_.observer->on_node(n, v, out, st);
    }
    return out;
  }

  AssociativeTable run_body(const Node& loop, const AssociativeTable& cur, const Scope* scope) {
    Scope s{&loop.body->param, &cur, scope};
    return eval(loop.body->body, &s);
  }

  AssociativeTable eval_node(const Node& n, const Scope* scope) {
    OpStats st;
    switch (n.kind) {
      case NodeKind::TableRef: return resolve(n.name, scope);
      case NodeKind::TableLit: return notify(n, {}, n.table, st);
      case NodeKind::Let: {
        AssociativeTable v = eval(n.args[0], scope);
        Scope s{&n.name, &v, scope};
        return eval(n.args[1], &s);
      }
      case NodeKind::Union:
      case NodeKind::StrictJoin:
      case NodeKind::RelaxedJoin: {
        AssociativeTable a = eval(n.args[0], scope);
        AssociativeTable b = eval(n.args[1], scope);
        const BinaryFn& f = reg_.binary(n.fn);
        AssociativeTable out = n.kind == NodeKind::Union        ? union_tables(a, b, f, &st)
                               : n.kind == NodeKind::StrictJoin ? strict_join(a, b, f, &st)
                                                                : relaxed_join(a, b, f, &st);
        return notify(n, {&a, &b}, std::move(out), st);
      }
      case NodeKind::Ext:
      case NodeKind::Map: {
        AssociativeTable a = eval(n.args[0], scope);
        const FlatmapFn& f = flatmap(n);
        AssociativeTable out = n.kind == NodeKind::Ext ? ext(a, f, &st) : map_table(a, f, &st);
        return notify(n, {&a}, std::move(out), st);
      }
      case NodeKind::Relational: return eval_rel(n, scope);
      case NodeKind::Iter: {
        AssociativeTable cur = eval(n.args[1], scope);
        const std::string* seed_name = n.args[1]->kind == NodeKind::TableRef ? &n.args[1]->name : nullptr;
        while (true) {
          Scope p{&n.body->param, &cur, scope};
          Scope sn{seed_name, &cur, &p};
          if (!boole(eval(n.args[0], &sn))) break;
          burn_fuel(n);
          cur = run_body(n, cur, scope);
        }
        return cur;
      }
      case NodeKind::ForN: {
        if (n.n < 0) fail(ErrorCode::NegativeCond, "for needs a non-negative count");
        AssociativeTable cur = eval(n.args[0], scope);
        for (std::int64_t i = 0; i < n.n; ++i) {
          burn_fuel(n);
          cur = run_body(n, cur, scope);
        }
        return cur;
      }
      case NodeKind::ForCond: {
        AssociativeTable c = eval(n.args[0], scope);
        Scalar v = scalar(c);
        if (kind_of(v) != Kind::Int)
          fail(ErrorCode::NonIntegerCond, std::string("loop count is a ") + kind_name(kind_of(v)) + ", not an int");
        std::int64_t count = std::get<std::int64_t>(v);
        if (count < 0) fail(ErrorCode::NegativeCond, "loop count " + std::to_string(count) + " is negative");
        AssociativeTable cur = eval(n.args[1], scope);
        for (std::int64_t i = 0; i < count; ++i) {
          burn_fuel(n);
          cur = run_body(n, cur, scope);
        }
        return cur;
      }
    }
    fail(ErrorCode::InvalidArgument, "unknown node kind");
  }

  AssociativeTable eval_rel(const Node& n, const Scope* scope) {
    OpStats st;
    if (n.rel == RelOp::StateInit) {
      std::vector<std::pair<std::string, AssociativeTable>> slots;
      for (std::size_t i = 0; i < n.args.size(); ++i) slots.emplace_back(n.names[i], eval(n.args[i], scope));
      AssociativeTable out = state_init(std::move(slots));
      return notify(n, {}, std::move(out), st);
    }
    AssociativeTable a = eval(n.args[0], scope);
    if (n.args.size() == 1) {
      AssociativeTable out;
      switch (n.rel) {
        case RelOp::Select: out = select_rows(a, *n.pred, &reg_); break;
        case RelOp::Project: out = project(a, n.names); break;
        case RelOp::Rename: out = rename(a, n.renames); break;
        case RelOp::Aggregate: out = aggregate(a, n.names, reg_.binary(n.fn), &st); break;
        case RelOp::StateGet: out = state_get(a, n.names.at(0)); break;
        default: fail(ErrorCode::InvalidArgument, std::string(rel_op_name(n.rel)) + " takes two operands");
      }
      return notify(n, {&a}, std::move(out), st);
    }
    AssociativeTable b = eval(n.args[1], scope);
    AssociativeTable out;
    switch (n.rel) {
      case RelOp::SetUnion: out = set_union(a, b); break;
      case RelOp::Intersect: out = set_intersect(a, b); break;
      case RelOp::Difference: out = set_difference(a, b); break;
      case RelOp::Divide: out = divide(a, b); break;
      case RelOp::AntijoinL: out = antijoin_left(a, b); break;
      case RelOp::AntijoinR: out = antijoin_right(a, b); break;
      case RelOp::Concat: out = concat(a, b); break;
      case RelOp::Lt: out = compare_tables(a, b, CompareOp::Lt); break;
      case RelOp::Le: out = compare_tables(a, b, CompareOp::Le); break;
      case RelOp::Eq: out = compare_tables(a, b, CompareOp::Eq); break;
      case RelOp::Ne: out = compare_tables(a, b, CompareOp::Ne); break;
      case RelOp::Gt: out = compare_tables(a, b, CompareOp::Gt); break;
      case RelOp::Ge: out = compare_tables(a, b, CompareOp::Ge); break;
      case RelOp::StateSet: out = state_set(a, n.names.at(0), b); break;
      default: fail(ErrorCode::InvalidArgument, std::string(rel_op_name(n.rel)) + " takes one operand");
    }
    return notify(n, {&a, &b}, std::move(out), st);
  }

  const Environment& env_;
  const EvalOptions& opts_;
  const FunctionRegistry& reg_;
  EvalStats* stats_;
  std::uint64_t used_ = 0;
  std::unordered_map<const Node*, FlatmapFn> flatmaps_;
};

// ---------------------------------------------------------------- lowering

std::atomic<std::uint64_t> fresh_counter{0};

Expression lower_node(const Expression& e);

ExprFnPtr lower_fn(const ExprFnPtr& f) {
  Expression body = lower_node(f->body);
  std::vector<std::pair<std::string, Expression>> aux;
  bool changed = body != f->body;
  for (const auto& [name, x] : f->aux) {
    Expression lx = lower_node(x);
    changed = changed || lx != x;
    aux.emplace_back(name, lx);
  }
  return changed ? ir::fn(f->param, body, aux, f->name) : f;
}

Expression lower_node(const Expression& e) {
  const Node& n = *e;
  auto copy = std::make_shared<Node>(n);
  bool changed = false;
  for (auto& a : copy->args) {
    Expression la = lower_node(a);
    if (la != a) {
      a = la;
      changed = true;
    }
  }
  if (n.body) {
    copy->body = lower_fn(n.body);
    changed = changed || copy->body != n.body;
  }
  if (!n.body || copy->body->aux.empty()) return changed ? Expression(copy) : e;

  // Loop with auxiliary updates: iterate over a state holding the parameter
  // and every updated name, applying the updates in order.
  const ExprFn& f = *copy->body;
  std::uint64_t id = fresh_counter++;
  std::string sp = "__L" + std::to_string(id);
  std::vector<std::string> slots{f.param};
  for (const auto& [name, x] : f.aux) {
    if (name == f.param) fail(ErrorCode::NameClash, "auxiliary update of the loop parameter '" + name + "'");
    if (std::find(slots.begin(), slots.end(), name) != slots.end())
      fail(ErrorCode::NameClash, "'" + name + "' is updated twice");
    slots.push_back(name);
  }
  auto getters = [&](const Expression& state) {
    std::map<std::string, Expression> m;
    for (const auto& s : slots) m[s] = ir::state_get(state, s);
    return m;
  };
  std::vector<std::pair<std::string, Expression>> steps{{f.param, f.body}};
  for (const auto& a : f.aux) steps.push_back(a);
  // let __Lk_1 = set(p, ...) in let __Lk_2 = set(B, ...) in __Lk_n
  Expression prev = ir::ref(sp);
  std::vector<std::pair<std::string, Expression>> chain;
  for (std::size_t i = 0; i < steps.size(); ++i) {
    std::string tn = sp + "_" + std::to_string(i + 1);
    Expression val = ir::state_set(prev, steps[i].first, substitute(steps[i].second, getters(prev)));
    chain.emplace_back(tn, val);
    prev = ir::ref(tn);
  }
  Expression body = prev;
  for (auto it = chain.rbegin(); it != chain.rend(); ++it) body = ir::let(it->first, it->second, body);
  ExprFnPtr nf = ir::fn(sp, body, {}, f.name);

  std::vector<Expression> init_args{copy->args.back()};
  for (const auto& [name, x] : f.aux) init_args.push_back(ir::ref(name));
  Expression init = ir::state_init(slots, init_args);

  Expression loop;
  if (n.kind == NodeKind::Iter) {
    auto m = getters(ir::ref(sp));
    if (n.args[1]->kind == NodeKind::TableRef && !m.count(n.args[1]->name))
      m[n.args[1]->name] = ir::state_get(ir::ref(sp), f.param);
    loop = ir::iter(nf, substitute(copy->args[0], m), init);
  } else if (n.kind == NodeKind::ForN) {
    loop = ir::for_n(nf, n.n, init);
  } else {
    loop = ir::for_cond(nf, copy->args[0], init);
  }
  return ir::state_get(loop, f.param);
}

}  // namespace

Expression lower(const Expression& e) { return lower_node(e); }

AssociativeTable eval(const Expression& e, const Environment& env, const EvalOptions& opts, EvalStats* stats) {
  Evaluator ev(env, opts, stats);
  return ev.eval(lower(e), nullptr);
}

AssociativeTable iterate(const ExprFnPtr& f, const Expression& cond, const Expression& seed, const Environment& env,
                         std::uint64_t fuel, EvalStats* stats) {
  EvalOptions o;
  o.fuel = fuel;
  return eval(ir::iter(f, cond, seed), env, o, stats);
}

AssociativeTable for_n(const ExprFnPtr& f, std::int64_t n, const Expression& seed, const Environment& env,
                       EvalStats* stats) {
  return eval(ir::for_n(f, n, seed), env, {}, stats);
}

AssociativeTable for_cond(const ExprFnPtr& f, const Expression& cond, const Expression& seed, const Environment& env,
                          EvalStats* stats) {
  return eval(ir::for_cond(f, cond, seed), env, {}, stats);
}

}  // namespace iterlara

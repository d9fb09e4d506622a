#include "iterlara/compose.hpp"

#include <map>
#include <set>

#include "iterlara/error.hpp"
#include "iterlara/eval.hpp"

namespace iterlara {

Stmt Stmt::assign(std::string name, Expression e) {
  Stmt s;
  s.name = std::move(name);
  s.expr = std::move(e);
  return s;
}

static Stmt make_loop(LoopStmt::Kind k, Expression cond, std::int64_t n, std::vector<Stmt> body) {
  auto l = std::make_shared<LoopStmt>();
  l->kind = k;
  l->cond = std::move(cond);
  l->n = n;
  l->body = std::move(body);
  Stmt s;
  s.loop = std::move(l);
  return s;
}

Stmt Stmt::while_loop(Expression cond, std::vector<Stmt> body) {
  return make_loop(LoopStmt::Kind::While, std::move(cond), 0, std::move(body));
}
Stmt Stmt::for_n(std::int64_t n, std::vector<Stmt> body) {
  if (n < 0) fail(ErrorCode::NegativeCond, "for needs a non-negative count");
  return make_loop(LoopStmt::Kind::ForN, nullptr, n, std::move(body));
}
Stmt Stmt::for_cond(Expression cond, std::vector<Stmt> body) {
  return make_loop(LoopStmt::Kind::ForCond, std::move(cond), 0, std::move(body));
}

namespace {

bool reserved(const std::string& n) { return n.size() >= 2 && n[0] == '_' && n[1] == '_'; }

void collect_assigned(const std::vector<Stmt>& stmts, std::set<std::string>& out) {
  for (const auto& s : stmts) {
    if (s.loop) {
      collect_assigned(s.loop->body, out);
      continue;
    }
    if (s.name.empty()) fail(ErrorCode::InvalidArgument, "statement without a name");
    if (reserved(s.name)) fail(ErrorCode::NameClash, "name '" + s.name + "' is reserved");
    if (!s.expr) fail(ErrorCode::InvalidArgument, "statement '" + s.name + "' has no expression");
    out.insert(s.name);
  }
}

class Composer {
public:
  explicit Composer(std::set<std::string> assigned) : assigned_(std::move(assigned)) {}

  // Names read before any assignment; they seed the state from the environment.
  // A loop that may run zero times leaves its assignments possibly undone, so
  // later reads of those names also count as inputs.
  void find_inputs(const std::vector<Stmt>& stmts, std::set<std::string>& defined) {
    for (const auto& s : stmts) {
      if (s.loop) {
        if (s.loop->cond) note_reads(s.loop->cond, defined);
        std::set<std::string> before = defined;
        find_inputs(s.loop->body, defined);
        bool runs = s.loop->kind == LoopStmt::Kind::ForN && s.loop->n > 0;
        if (!runs)
          for (const auto& n : defined)
            if (!before.count(n)) maybe_.insert(n);
        continue;
      }
      note_reads(s.expr, defined);
      defined.insert(s.name);
      maybe_.erase(s.name);
    }
  }

  void note_result(const std::string& result) {
    if (maybe_.count(result)) inputs.insert(result);
  }

  std::set<std::string> inputs;

  Expression block(const std::vector<Stmt>& stmts, Expression state, std::set<std::string>& slots) {
    std::vector<std::pair<std::string, Expression>> chain;
    Expression cur = state;
    for (const auto& s : stmts) {
      Expression next;
      if (!s.loop) {
        Expression e = substitute(lower(s.expr), getters(cur, slots));
        next = ir::state_set(cur, s.name, e);
        slots.insert(s.name);
      } else {
        const LoopStmt& l = *s.loop;
        std::set<std::string> inner = slots;
        collect_assigned(l.body, inner);
        std::string p = "__S" + std::to_string(counter_++);
        Expression body = block(l.body, ir::ref(p), inner);
        ExprFnPtr f = ir::fn(p, body);
        switch (l.kind) {
          case LoopStmt::Kind::While:
            next = ir::iter(f, substitute(lower(l.cond), getters(ir::ref(p), inner)), cur);
            break;
          case LoopStmt::Kind::ForN: next = ir::for_n(f, l.n, cur); break;
          case LoopStmt::Kind::ForCond:
            next = ir::for_cond(f, substitute(lower(l.cond), getters(cur, slots)), cur);
            break;
        }
        slots = inner;
      }
      std::string name = "__s" + std::to_string(counter_++);
      chain.emplace_back(name, next);
      cur = ir::ref(name);
    }
    Expression out = cur;
    for (auto it = chain.rbegin(); it != chain.rend(); ++it) out = ir::let(it->first, it->second, out);
    return out;
  }

private:
  void note_reads(const Expression& e, const std::set<std::string>& defined) {
    for (const auto& n : free_names(e)) {
      if (reserved(n)) fail(ErrorCode::NameClash, "name '" + n + "' is reserved");
      if (assigned_.count(n) && (!defined.count(n) || maybe_.count(n))) inputs.insert(n);
    }
  }

  std::map<std::string, Expression> getters(const Expression& state, const std::set<std::string>& slots) const {
    std::map<std::string, Expression> m;
    for (const auto& s : slots) m[s] = ir::state_get(state, s);
    return m;
  }

  std::set<std::string> assigned_;
  std::set<std::string> maybe_;
  std::uint64_t counter_ = 0;
};

}  // namespace

Expression compose_statements(const std::vector<Stmt>& stmts, const std::string& result) {
  std::set<std::string> assigned;
  collect_assigned(stmts, assigned);
  if (!result.empty() && !assigned.count(result))
    fail(ErrorCode::UnknownName, "result '" + result + "' is never assigned");
  if (stmts.size() == 1 && !stmts[0].loop && stmts[0].name == result) return stmts[0].expr;

  Composer c(assigned);
  std::set<std::string> defined;
  c.find_inputs(stmts, defined);
  if (!result.empty()) c.note_result(result);
  std::vector<std::string> names(c.inputs.begin(), c.inputs.end());
  std::vector<Expression> refs;
  for (const auto& n : names) refs.push_back(ir::ref(n));
  std::string s0 = "__init";
  std::set<std::string> slots(names.begin(), names.end());
  Expression body = c.block(stmts, ir::ref(s0), slots);
  Expression out = ir::let(s0, ir::state_init(names, refs), body);
  return result.empty() ? out : ir::state_get(out, result);
}

Expression compose_statements(const std::vector<std::pair<std::string, Expression>>& stmts, const std::string& result) {
  std::vector<Stmt> v;
  for (const auto& [n, e] : stmts) v.push_back(Stmt::assign(n, e));
  return compose_statements(v, result);
}

}  // namespace iterlara

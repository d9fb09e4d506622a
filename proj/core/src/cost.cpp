#include "iterlara/cost.hpp"

#include <algorithm>
#include <map>
#include <nlohmann/json.hpp>
#include <unordered_map>

#include "iterlara/error.hpp"

namespace iterlara {

namespace {

void reject_iter(const Expression& e) {
  if (e->kind == NodeKind::Iter)
    fail(ErrorCode::UnboundedIteration, "the operation count of a while-loop is not defined");
  for (const auto& a : e->args) reject_iter(a);
  if (e->body) reject_iter(e->body->body);
}

std::uint64_t side_term(const AssociativeTable& t) {
  if (t.empty()) return 0;
  std::uint64_t p = 1;
  for (auto c : distinct_key_counts(t)) p *= c;
  return p;
}

std::uint64_t join_bound(const AssociativeTable& a, const AssociativeTable& b) {
  if (a.empty() || b.empty()) return 0;
  auto da = distinct_key_counts(a), db = distinct_key_counts(b);
  const Schema& sa = a.schema();
  const Schema& sb = b.schema();
  std::uint64_t p = 1;
  for (std::size_t i = 0; i < sa.key_arity(); ++i) {
    if (auto j = sb.key_index(sa.keys()[i].name))
      p *= std::min(da[i], db[*j]);
    else
      p *= da[i];
  }
  for (std::size_t j = 0; j < sb.key_arity(); ++j)
    if (!sa.key_index(sb.keys()[j].name)) p *= db[j];
  return p;
}

class CostObserver : public EvalObserver {
public:
  CostObserver(const FunctionRegistry& reg, std::unordered_map<const Node*, std::size_t> ids)
      : reg_(reg), ids_(std::move(ids)) {}

  void on_node(const Node& n, std::span<const AssociativeTable* const> in, const AssociativeTable& out,
               const OpStats& st) override {
    (void)out;
    CostEntry& e = entry(n);
    ++e.visits;
    switch (n.kind) {
      case NodeKind::Union: {
        std::uint64_t c = binary_cost(n.fn);
        e.formula = "union";
        e.exact += st.applications * c;
        e.upper_bound += (side_term(*in[0]) + side_term(*in[1])) * c;
        break;
      }
      case NodeKind::StrictJoin:
      case NodeKind::RelaxedJoin: {
        std::uint64_t c = binary_cost(n.fn);
        e.formula = "join";
        e.exact += st.applications * c;
        e.upper_bound += (st.dense ? st.applications : join_bound(*in[0], *in[1])) * c;
        break;
      }
      case NodeKind::Ext:
      case NodeKind::Map: {
        std::uint64_t c = flatmap_cost(n);
        e.formula = "ext";
        e.exact += st.applications * c;
        e.upper_bound += side_term(*in[0]) * c;
        break;
      }
      case NodeKind::Relational:
        if (n.rel == RelOp::Aggregate) {
          std::uint64_t c = binary_cost(n.fn);
          e.formula = "union";
          e.exact += st.applications * c;
          e.upper_bound += side_term(*in[0]) * c;
        }
        break;
      default: break;
    }
  }

  CostReport report() const {
    CostReport r;
    for (const auto& [id, e] : entries_) {
      r.exact += e.exact;
      r.upper_bound += e.upper_bound;
      r.breakdown.push_back(e);
    }
    return r;
  }

private:
  CostEntry& entry(const Node& n) {
    auto it = ids_.find(&n);
    std::size_t id = it == ids_.end() ? ids_.size() + entries_.size() : it->second;
    auto [pos, fresh] = entries_.try_emplace(id);
    if (fresh) {
      pos->second.node_id = id;
      pos->second.label = node_label(n);
      pos->second.formula = "none";
    }
    return pos->second;
  }

  std::uint64_t binary_cost(const std::string& name) {
    const BinaryFn& f = reg_.binary(name);
    if (f.pairing) return 0;
    if (!f.op_cost) fail(ErrorCode::UnknownFunctionCost, "function '" + name + "' has no declared cost");
    return static_cast<std::uint64_t>(*f.op_cost);
  }

  std::uint64_t flatmap_cost(const Node& n) {
    auto it = fcost_.find(&n);
    if (it != fcost_.end()) return it->second;
    FlatmapFn f = reg_.flatmap(n.fref);
    if (!f.op_cost) fail(ErrorCode::UnknownFunctionCost, "flatmap '" + f.name + "' has no declared cost");
    return fcost_[&n] = static_cast<std::uint64_t>(*f.op_cost);
  }

  const FunctionRegistry& reg_;
  std::unordered_map<const Node*, std::size_t> ids_;
  std::map<std::size_t, CostEntry> entries_;
  std::unordered_map<const Node*, std::uint64_t> fcost_;
};

}  // namespace

CostReport op_count(const Expression& e, const Environment& env, const EvalOptions& opts) {
  Expression lowered = lower(e);
  reject_iter(lowered);
  const FunctionRegistry& reg = opts.registry ? *opts.registry : builtin_registry();
  CostObserver obs(reg, number_nodes(lowered));
  EvalOptions o = opts;
  o.observer = &obs;
  AssociativeTable result = eval(lowered, env, o);
  CostReport r = obs.report();
  r.result = std::move(result);
  return r;
}

std::string cost_report_json(const CostReport& r) {
  nlohmann::ordered_json j;
  j["exact"] = r.exact;
  j["upper_bound"] = r.upper_bound;
  auto arr = nlohmann::ordered_json::array();
  for (const auto& e : r.breakdown) {
    nlohmann::ordered_json x;
    x["node"] = e.node_id;
    x["label"] = e.label;
    x["formula"] = e.formula;
    x["visits"] = e.visits;
    x["exact"] = e.exact;
    x["upper_bound"] = e.upper_bound;
    arr.push_back(x);
  }
  j["breakdown"] = arr;
  return j.dump(2);
}

std::string cost_report_text(const CostReport& r) {
  std::vector<std::vector<std::string>> rows{{"node", "op", "formula", "visits", "exact", "upper"}};
  for (const auto& e : r.breakdown) {
    if (e.formula == "none") continue;
    rows.push_back({std::to_string(e.node_id), e.label, e.formula, std::to_string(e.visits), std::to_string(e.exact),
                    std::to_string(e.upper_bound)});
  }
  std::vector<std::size_t> w(rows[0].size(), 0);
  for (const auto& row : rows)
    for (std::size_t c = 0; c < row.size(); ++c) w[c] = std::max(w[c], row[c].size());
  std::string s = "exact=" + std::to_string(r.exact) + " upper_bound=" + std::to_string(r.upper_bound) + "\n";
  for (const auto& row : rows) {
    std::string line;
    for (std::size_t c = 0; c < row.size(); ++c) {
      std::string cell = row[c];
      if (c + 1 < row.size()) cell.resize(w[c] + 2, ' ');
      line += cell;
    }
    s += line + "\n";
  }
  return s;
}

}  // namespace iterlara

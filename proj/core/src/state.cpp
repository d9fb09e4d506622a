#include "iterlara/state.hpp"

#include <algorithm>
#include <map>
#include <memory>

#include "iterlara/error.hpp"

namespace iterlara {

const AssociativeTable* StateParts::find(const std::string& name) const {
  auto it = std::lower_bound(slots.begin(), slots.end(), name,
                             [](const auto& s, const std::string& n) { return s.first < n; });
  if (it == slots.end() || it->first != name) return nullptr;
  return &it->second;
}

namespace {

void check_slot_name(const std::string& n) {
  if (n.empty() || n.find('.') != std::string::npos)
    fail(ErrorCode::InvalidArgument, "invalid state slot name '" + n + "'");
}

std::shared_ptr<const Schema> flat_schema(const StateParts& p) {
  std::vector<KeyAttr> keys{{"slot", Kind::Text}};
  std::vector<ValueAttr> vals;
  for (const auto& [name, t] : p.slots) {
    for (const auto& k : t.schema().keys()) keys.push_back({name + "." + k.name, k.kind});
    for (const auto& v : t.schema().values()) vals.push_back({name + "." + v.name, v.kind, v.default_value});
  }
  return std::make_shared<const Schema>(std::move(keys), std::move(vals));
}

detail::Rows flat_rows(const StateParts& p, const Schema& flat) {
  detail::Rows rows;
  const std::size_t kw = flat.key_arity(), vw = flat.value_arity();
  std::vector<Scalar> key_fill, val_fill = flat.defaults();
  for (const auto& k : flat.keys()) key_fill.push_back(zero_of(k.kind));
  std::size_t koff = 1, voff = 0;
  for (const auto& [name, t] : p.slots) {  // slots are sorted, so rows come out sorted
    Scalar tag = text_scalar(name);
    std::size_t ka = t.schema().key_arity(), va = t.schema().value_arity();
    for (std::size_t i = 0; i < t.size(); ++i) {
      std::vector<Scalar> k = key_fill, v = val_fill;
      k[0] = tag;
      std::copy_n(t.key(i).begin(), ka, k.begin() + koff);
      std::copy_n(t.value(i).begin(), va, v.begin() + voff);
      rows.keys.insert(rows.keys.end(), k.begin(), k.end());
      rows.vals.insert(rows.vals.end(), v.begin(), v.end());
      ++rows.n;
    }
    koff += ka;
    voff += va;
  }
  (void)kw;
  (void)vw;
  rows.normalized = true;
  for (std::size_t i = 0; i < rows.n && rows.normalized; ++i)
    if (is_default(std::span<const Scalar>(rows.vals.data() + i * vw, vw), flat.defaults())) rows.normalized = false;
  return rows;
}

AssociativeTable make_state(StateParts parts) {
  auto p = std::make_shared<const StateParts>(std::move(parts));
  auto schema = flat_schema(*p);
  return AssociativeTable::lazy(schema, [p, schema] { return flat_rows(*p, *schema); }, p);
}

}  // namespace

AssociativeTable state_init(std::vector<std::pair<std::string, AssociativeTable>> slots) {
  StateParts p;
  for (auto& s : slots) check_slot_name(s.first);
  std::sort(slots.begin(), slots.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  for (std::size_t i = 1; i < slots.size(); ++i)
    if (slots[i].first == slots[i - 1].first) fail(ErrorCode::NameClash, "state slot '" + slots[i].first + "' given twice");
  p.slots = std::move(slots);
  return make_state(std::move(p));
}

StateParts state_parts_of(const AssociativeTable& state) {
  if (const StateParts* p = state.state_parts()) return *p;
  const Schema& s = state.schema();
  if (s.key_arity() == 0 || s.keys()[0].name != "slot" || s.keys()[0].kind != Kind::Text)
    fail(ErrorCode::SchemaMismatch, "table " + s.to_string() + " is not a loop state");
  struct Layout {
    std::vector<std::size_t> key_cols, val_cols;
    std::vector<KeyAttr> keys;
    std::vector<ValueAttr> vals;
  };
  std::map<std::string, Layout> layout;
  auto split = [&](const std::string& n) -> std::pair<std::string, std::string> {
    auto dot = n.find('.');
    if (dot == std::string::npos || dot == 0) fail(ErrorCode::SchemaMismatch, "attribute '" + n + "' is not a slot attribute");
    return {n.substr(0, dot), n.substr(dot + 1)};
  };
  for (std::size_t i = 1; i < s.key_arity(); ++i) {
    auto [slot, attr] = split(s.keys()[i].name);
    layout[slot].key_cols.push_back(i);
    layout[slot].keys.push_back({attr, s.keys()[i].kind});
  }
  for (std::size_t i = 0; i < s.value_arity(); ++i) {
    auto [slot, attr] = split(s.values()[i].name);
    layout[slot].val_cols.push_back(i);
    layout[slot].vals.push_back({attr, s.values()[i].kind, s.values()[i].default_value});
  }
  for (std::size_t r = 0; r < state.size(); ++r) {
    const std::string& tag = std::get<Symbol>(state.key(r)[0]).str();
    if (!layout.count(tag)) layout[tag];
  }
  std::map<std::string, TableBuilder> builders;
  for (auto& [slot, l] : layout) builders.emplace(slot, TableBuilder(Schema(l.keys, l.vals)));
  for (std::size_t r = 0; r < state.size(); ++r) {
    const std::string& tag = std::get<Symbol>(state.key(r)[0]).str();
    const Layout& l = layout[tag];
    std::vector<Scalar> k, v;
    for (auto c : l.key_cols) k.push_back(state.key(r)[c]);
    for (auto c : l.val_cols) v.push_back(state.value(r)[c]);
    builders.at(tag).add_unchecked(k, v);
  }
  StateParts p;
  for (auto& [slot, b] : builders) p.slots.emplace_back(slot, b.build(true));
  return p;
}

AssociativeTable state_get(const AssociativeTable& state, const std::string& slot) {
  if (const StateParts* p = state.state_parts()) {
    if (const AssociativeTable* t = p->find(slot)) return *t;
    fail(ErrorCode::UnknownName, "state has no slot '" + slot + "'");
  }
  StateParts p = state_parts_of(state);
  if (const AssociativeTable* t = p.find(slot)) return *t;
  fail(ErrorCode::UnknownName, "state has no slot '" + slot + "'");
}

AssociativeTable state_set(const AssociativeTable& state, const std::string& slot, AssociativeTable value) {
  check_slot_name(slot);
  StateParts p = state_parts_of(state);
  auto it = std::lower_bound(p.slots.begin(), p.slots.end(), slot,
                             [](const auto& s, const std::string& n) { return s.first < n; });
  if (it != p.slots.end() && it->first == slot)
    it->second = std::move(value);
  else
    p.slots.insert(it, {slot, std::move(value)});
  return make_state(std::move(p));
}

}  // namespace iterlara

#include "iterlara/table_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "iterlara/error.hpp"

namespace iterlara {

using nlohmann::json;

namespace {

Scalar scalar_from_json(const json& j, Kind k, const std::string& attr) {
  switch (k) {
    case Kind::Int:
      if (j.is_number_integer()) return Scalar{j.get<std::int64_t>()};
      if (j.is_number_float()) {
        double d = j.get<double>();
        if (std::trunc(d) == d) return Scalar{static_cast<std::int64_t>(d)};
      }
      break;
    case Kind::Real:
      if (j.is_number()) return Scalar{j.get<double>()};
      break;
    case Kind::Bool:
      if (j.is_boolean()) return Scalar{j.get<bool>()};
      break;
    case Kind::Text:
      if (j.is_string()) return text_scalar(j.get<std::string>());
      break;
  }
  fail(ErrorCode::SchemaMismatch, "attribute '" + attr + "' expects " + kind_name(k) + ", got " + j.dump());
}

json scalar_to_json(const Scalar& s) {
  switch (s.index()) {
    case 0: return std::get<0>(s);
    case 1: return std::get<1>(s);
    case 2: return std::get<2>(s);
    default: return std::get<3>(s).str();
  }
}

json schema_to_json(const Schema& s) {
  json keys = json::array(), values = json::array();
  for (const auto& k : s.keys()) keys.push_back({{"name", k.name}, {"kind", kind_name(k.kind)}});
  for (const auto& v : s.values())
    values.push_back({{"name", v.name}, {"kind", kind_name(v.kind)}, {"default", scalar_to_json(v.default_value)}});
  return {{"keys", keys}, {"values", values}};
}

Schema schema_from_json(const json& j) {
  if (!j.is_object() || !j.contains("keys") || !j.contains("values"))
    fail(ErrorCode::SchemaMismatch, "schema line must be an object with 'keys' and 'values'");
  std::vector<KeyAttr> keys;
  std::vector<ValueAttr> values;
  for (const auto& k : j.at("keys")) keys.push_back({k.at("name").get<std::string>(), parse_kind(k.at("kind").get<std::string>())});
  for (const auto& v : j.at("values")) {
    Kind kind = parse_kind(v.at("kind").get<std::string>());
    std::string name = v.at("name").get<std::string>();
    Scalar def = v.contains("default") ? scalar_from_json(v.at("default"), kind, name) : zero_of(kind);
    values.push_back({name, kind, def});
  }
  return Schema(std::move(keys), std::move(values));
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  for (auto& f : out) {
    auto b = f.find_first_not_of(" \t");
    auto e = f.find_last_not_of(" \t");
    f = b == std::string::npos ? std::string() : f.substr(b, e - b + 1);
  }
  return out;
}

std::optional<std::int64_t> parse_int(const std::string& s) {
  std::int64_t v = 0;
  auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

std::optional<double> parse_real(const std::string& s) {
  if (s.empty()) return std::nullopt;
  try {
    std::size_t pos = 0;
    double d = std::stod(s, &pos);
    if (pos != s.size()) return std::nullopt;
    return d;
  } catch (...) {
    return std::nullopt;
  }
}

Scalar parse_field(const std::string& s, Kind k, const std::string& attr) {
  switch (k) {
    case Kind::Int:
      if (auto v = parse_int(s)) return Scalar{*v};
      break;
    case Kind::Real:
      if (auto v = parse_real(s)) return Scalar{*v};
      break;
    case Kind::Bool:
      if (s == "true" || s == "1") return Scalar{true};
      if (s == "false" || s == "0") return Scalar{false};
      break;
    case Kind::Text:
      return text_scalar(s);
  }
  fail(ErrorCode::SchemaMismatch, "cannot read '" + s + "' as " + kind_name(k) + " for attribute '" + attr + "'");
}

std::string csv_field(const Scalar& s) {
  std::string t = to_string(s);
  if (kind_of(s) == Kind::Text && t.find_first_of(",\"\n ") != std::string::npos) {
    std::string q = "\"";
    for (char c : t) q += c == '"' ? std::string("\"\"") : std::string(1, c);
    return q + "\"";
  }
  return t;
}

}  // namespace

AssociativeTable read_table_jsonl(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  std::optional<TableBuilder> builder;
  try {
    while (std::getline(in, line)) {
      ++lineno;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      json j = json::parse(line);
      if (!builder) {
        builder.emplace(schema_from_json(j));
        continue;
      }
      const Schema& s = builder->schema();
      const json& k = j.at("k");
      const json& v = j.at("v");
      if (k.size() != s.key_arity() || v.size() != s.value_arity())
        fail(ErrorCode::SchemaMismatch, "record arity mismatch on line " + std::to_string(lineno));
      std::vector<Scalar> key, val;
      for (std::size_t i = 0; i < k.size(); ++i) key.push_back(scalar_from_json(k[i], s.keys()[i].kind, s.keys()[i].name));
      for (std::size_t i = 0; i < v.size(); ++i)
        val.push_back(scalar_from_json(v[i], s.values()[i].kind, s.values()[i].name));
      builder->add(key, val);
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::IoError, "malformed JSON on line " + std::to_string(lineno) + ": " + e.what());
  }
  if (!builder) fail(ErrorCode::IoError, "table file has no schema line");
  return builder->build(true);
}

void write_table_jsonl(std::ostream& out, const AssociativeTable& t) {
  out << schema_to_json(t.schema()).dump() << "\n";
  for (std::size_t i = 0; i < t.size(); ++i) {
    json k = json::array(), v = json::array();
    for (const auto& s : t.key(i)) k.push_back(scalar_to_json(s));
    for (const auto& s : t.value(i)) v.push_back(scalar_to_json(s));
    out << json{{"k", k}, {"v", v}}.dump() << "\n";
  }
}

AssociativeTable read_table_csv(std::istream& in) {
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    if (line[line.find_first_not_of(" \t")] == '#') continue;
    rows.push_back(split_csv_line(line));
  }
  if (rows.empty()) fail(ErrorCode::IoError, "empty CSV input");

  bool dense = true;
  for (const auto& f : rows[0])
    if (!parse_real(f)) dense = false;

  if (dense) {
    bool integral = true;
    for (const auto& r : rows) {
      if (r.size() != rows[0].size()) fail(ErrorCode::SizeMismatch, "ragged dense matrix rows");
      for (const auto& f : r) {
        if (!parse_real(f)) fail(ErrorCode::IoError, "non-numeric matrix entry '" + f + "'");
        if (!parse_int(f)) integral = false;
      }
    }
    Kind k = integral ? Kind::Int : Kind::Real;
    TableBuilder b(Schema({{"i", Kind::Int}, {"j", Kind::Int}}, {{"v", k, zero_of(k)}}));
    for (std::size_t i = 0; i < rows.size(); ++i)
      for (std::size_t j = 0; j < rows[i].size(); ++j) {
        Scalar key[2] = {Scalar{static_cast<std::int64_t>(i)}, Scalar{static_cast<std::int64_t>(j)}};
        Scalar v = parse_field(rows[i][j], k, "v");
        b.add_unchecked(key, std::span<const Scalar>(&v, 1));
      }
    return b.build(true);
  }

  if (rows.size() < 2) fail(ErrorCode::IoError, "CSV table needs a names row and a kinds row");
  const auto& names = rows[0];
  const auto& kinds = rows[1];
  if (names.size() != kinds.size()) fail(ErrorCode::IoError, "CSV header rows differ in width");
  std::vector<KeyAttr> keys;
  std::vector<ValueAttr> values;
  std::vector<bool> is_key;
  for (std::size_t c = 0; c < names.size(); ++c) {
    const std::string& spec = kinds[c];
    if (spec.rfind("key:", 0) == 0) {
      if (!values.empty()) fail(ErrorCode::IoError, "key columns must precede value columns");
      keys.push_back({names[c], parse_kind(spec.substr(4))});
      is_key.push_back(true);
    } else {
      auto eq = spec.find('=');
      Kind k = parse_kind(spec.substr(0, eq));
      Scalar def = eq == std::string::npos ? zero_of(k) : parse_field(spec.substr(eq + 1), k, names[c]);
      values.push_back({names[c], k, def});
      is_key.push_back(false);
    }
  }
  TableBuilder b(Schema(std::move(keys), std::move(values)));
  const Schema& s = b.schema();
  for (std::size_t r = 2; r < rows.size(); ++r) {
    if (rows[r].size() != names.size()) fail(ErrorCode::IoError, "CSV row " + std::to_string(r + 1) + " has wrong width");
    std::vector<Scalar> key, val;
    for (std::size_t c = 0; c < names.size(); ++c) {
      if (is_key[c])
        key.push_back(parse_field(rows[r][c], s.keys()[key.size()].kind, names[c]));
      else
        val.push_back(parse_field(rows[r][c], s.values()[val.size()].kind, names[c]));
    }
    b.add(key, val);
  }
  return b.build(true);
}

void write_table_csv(std::ostream& out, const AssociativeTable& t) {
  const Schema& s = t.schema();
  std::vector<std::string> names, kinds;
  for (const auto& k : s.keys()) {
    names.push_back(k.name);
    kinds.push_back(std::string("key:") + kind_name(k.kind));
  }
  for (const auto& v : s.values()) {
    names.push_back(v.name);
    std::string spec = kind_name(v.kind);
    if (!same(v.default_value, zero_of(v.kind))) spec += "=" + to_string(v.default_value);
    kinds.push_back(spec);
  }
  auto emit = [&](const std::vector<std::string>& row) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
    out << "\n";
  };
  emit(names);
  emit(kinds);
  for (std::size_t i = 0; i < t.size(); ++i) {
    std::vector<std::string> row;
    for (const auto& x : t.key(i)) row.push_back(csv_field(x));
    for (const auto& x : t.value(i)) row.push_back(csv_field(x));
    emit(row);
  }
}

AssociativeTable load_table_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::IoError, "cannot open table file '" + path + "'");
  bool csv = path.size() >= 4 && path.compare(path.size() - 4, 4, ".csv") == 0;
  return csv ? read_table_csv(in) : read_table_jsonl(in);
}

void save_table_file(const std::string& path, const AssociativeTable& t) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::IoError, "cannot write table file '" + path + "'");
  bool csv = path.size() >= 4 && path.compare(path.size() - 4, 4, ".csv") == 0;
  if (csv)
    write_table_csv(out, t);
  else
    write_table_jsonl(out, t);
}

std::string format_table(const AssociativeTable& t) {
  const Schema& s = t.schema();
  std::size_t kw = s.key_arity(), vw = s.value_arity();
  std::vector<std::vector<std::string>> cells;
  std::vector<std::string> header;
  for (const auto& k : s.keys()) header.push_back(k.name);
  for (const auto& v : s.values()) header.push_back(v.name);
  cells.push_back(header);
  for (std::size_t i = 0; i < t.size(); ++i) {
    std::vector<std::string> row;
    for (const auto& x : t.key(i)) row.push_back(to_string(x));
    for (const auto& x : t.value(i)) row.push_back(to_string(x));
    cells.push_back(row);
  }
  std::vector<std::size_t> width(kw + vw, 0);
  for (const auto& r : cells)
    for (std::size_t c = 0; c < r.size(); ++c) width[c] = std::max(width[c], r[c].size());
  std::ostringstream out;
  for (const auto& r : cells) {
    std::string line;
    for (std::size_t c = 0; c < r.size(); ++c) {
      if (c == kw) line += kw ? " | " : "| ";
      else if (c) line += "  ";
      line += r[c] + std::string(width[c] - r[c].size(), ' ');
    }
    if (vw == 0) line += " |";
    while (!line.empty() && line.back() == ' ') line.pop_back();
    out << line << "\n";
  }
  return out.str();
}

std::string table_to_json(const AssociativeTable& t) {
  json j = schema_to_json(t.schema());
  json recs = json::array();
  for (std::size_t i = 0; i < t.size(); ++i) {
    json k = json::array(), v = json::array();
    for (const auto& s : t.key(i)) k.push_back(scalar_to_json(s));
    for (const auto& s : t.value(i)) v.push_back(scalar_to_json(s));
    recs.push_back({{"k", k}, {"v", v}});
  }
  j["records"] = recs;
  return j.dump();
}

}  // namespace iterlara

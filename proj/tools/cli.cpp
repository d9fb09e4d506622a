#include "cli.hpp"

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "iterlara/bf.hpp"
#include "iterlara/cost.hpp"
#include "iterlara/dsl.hpp"
#include "iterlara/error.hpp"
#include "iterlara/eval.hpp"
#include "iterlara/stdlib.hpp"
#include "iterlara/table_io.hpp"

namespace iterlara::cli {

namespace {

using json = nlohmann::ordered_json;

std::string read_file(const std::string& path) {
  if (path == "-") {
    std::ostringstream s;
    s << std::cin.rdbuf();
    return s.str();
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::IoError, "cannot open '" + path + "'");
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string parent_dir(const std::string& path) {
  if (path == "-") return ".";
  auto p = std::filesystem::path(path).parent_path();
  return p.empty() ? "." : p.string();
}

json scalar_json(const Scalar& s) {
  switch (kind_of(s)) {
    case Kind::Int: return std::get<std::int64_t>(s);
    case Kind::Real: return std::get<double>(s);
    case Kind::Bool: return std::get<bool>(s);
    default: return std::get<Symbol>(s).str();
  }
}

Scalar scalar_value(const AssociativeTable& t) {
  if (t.schema().key_arity() != 0 || t.schema().value_arity() != 1)
    fail(ErrorCode::NotScalarTable, "expected a keyless one-value table");
  return t.empty() ? t.schema().defaults()[0] : t.value(0)[0];
}

// ---- dense matrix files

struct Dense {
  std::vector<std::vector<Scalar>> cells;
  bool integral = true;
  std::size_t rows() const { return cells.size(); }
  std::size_t cols() const { return cells.empty() ? 0 : cells[0].size(); }
};

Scalar parse_number(const std::string& f, std::size_t line) {
  const char* b = f.data();
  const char* e = b + f.size();
  std::int64_t i = 0;
  if (auto r = std::from_chars(b, e, i); r.ec == std::errc() && r.ptr == e) return Scalar{i};
  double d = 0;
  if (auto r = std::from_chars(b, e, d); r.ec == std::errc() && r.ptr == e) return Scalar{d};
  fail(ErrorCode::IoError, "non-numeric entry '" + f + "' on line " + std::to_string(line));
}

Dense read_dense(const std::string& path) {
  std::istringstream in(read_file(path));
  Dense m;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::vector<Scalar> row;
    std::string field;
    std::istringstream ls(line);
    while (std::getline(ls, field, ',')) {
      auto a = field.find_first_not_of(" \t\r");
      auto z = field.find_last_not_of(" \t\r");
      if (a == std::string::npos) fail(ErrorCode::IoError, "empty entry on line " + std::to_string(lineno));
      Scalar v = parse_number(field.substr(a, z - a + 1), lineno);
      if (kind_of(v) == Kind::Real) m.integral = false;
      row.push_back(v);
    }
    if (!m.cells.empty() && row.size() != m.cols())
      fail(ErrorCode::SizeMismatch, "line " + std::to_string(lineno) + " has " + std::to_string(row.size()) +
                                        " entries, expected " + std::to_string(m.cols()));
    m.cells.push_back(std::move(row));
  }
  if (m.cells.empty()) fail(ErrorCode::EmptyInput, "'" + path + "' holds no matrix entries");
  return m;
}

IntMatrix int_cells(const Dense& m) {
  IntMatrix out(m.rows(), std::vector<std::int64_t>(m.cols()));
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) out[i][j] = as_int(m.cells[i][j]);
  return out;
}

RealMatrix real_cells(const Dense& m) {
  RealMatrix out(m.rows(), std::vector<double>(m.cols()));
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) out[i][j] = as_real(m.cells[i][j]);
  return out;
}

AssociativeTable matrix_table(const Dense& m) {
  return m.integral ? matrix_from_dense(int_cells(m)) : matrix_from_dense(real_cells(m));
}

AssociativeTable occupancy_table(const Dense& m) {
  return m.integral ? matrix_occupancy(int_cells(m)) : matrix_occupancy(real_cells(m));
}

// Reads an [i,j] table (or an [i] vector as one row) back into rows x cols cells.
std::vector<std::vector<Scalar>> dense_cells(const AssociativeTable& t, std::size_t rows, std::size_t cols) {
  std::vector<std::vector<Scalar>> out(rows, std::vector<Scalar>(cols));
  bool vector = t.schema().key_arity() == 1;
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) {
      std::vector<Scalar> key;
      if (!vector) key.push_back(Scalar{static_cast<std::int64_t>(i)});
      key.push_back(Scalar{static_cast<std::int64_t>(j)});
      out[i][j] = t.lookup(key)[0];
    }
  return out;
}

void emit_dense(std::ostream& out, const std::vector<std::vector<Scalar>>& cells, bool as_json) {
  if (as_json) {
    json data = json::array();
    for (const auto& row : cells) {
      json r = json::array();
      for (const auto& v : row) r.push_back(scalar_json(v));
      data.push_back(r);
    }
    json doc;
    doc["rows"] = cells.size();
    doc["cols"] = cells.empty() ? 0 : cells[0].size();
    doc["data"] = data;
    out << doc.dump(2) << "\n";
    return;
  }
  for (const auto& row : cells) {
    for (std::size_t j = 0; j < row.size(); ++j) out << (j ? "," : "") << to_string(row[j]);
    out << "\n";
  }
}

// ---- BF input

std::vector<std::int64_t> decode_input(const std::string& data, const std::string& format) {
  std::vector<std::int64_t> out;
  if (format == "text") {
    for (unsigned char c : data) out.push_back(c);
  } else if (format == "hex") {
    std::string digits;
    for (char c : data)
      if (!std::isspace(static_cast<unsigned char>(c))) digits.push_back(c);
    if (digits.size() % 2) fail(ErrorCode::InvalidArgument, "hex input needs an even number of digits");
    for (std::size_t i = 0; i < digits.size(); i += 2) {
      unsigned v = 0;
      auto r = std::from_chars(digits.data() + i, digits.data() + i + 2, v, 16);
      if (r.ec != std::errc() || r.ptr != digits.data() + i + 2)
        fail(ErrorCode::InvalidArgument, "bad hex digits '" + digits.substr(i, 2) + "'");
      out.push_back(v);
    }
  } else {
    // commas or whitespace separate values
    std::string spaced = data;
    std::replace(spaced.begin(), spaced.end(), ',', ' ');
    std::istringstream s(spaced);
    std::string field;
    while (s >> field) {
      Scalar v = parse_number(field, 1);
      if (kind_of(v) != Kind::Int) fail(ErrorCode::InvalidArgument, "input values must be integers");
      out.push_back(std::get<std::int64_t>(v));
    }
  }
  return out;
}

struct BFRun {
  std::string status = "ok";
  std::string message;
  std::vector<std::int64_t> output;
};

template <class F>
BFRun capture(F&& f) {
  BFRun r;
  try {
    r.output = f();
  } catch (const Error& e) {
    r.status = error_code_name(e.code());
    r.message = e.message();
  }
  return r;
}

std::string output_text(const std::vector<std::int64_t>& out, const std::string& format) {
  std::string s;
  if (format == "text") {
    for (auto v : out) s.push_back(static_cast<char>(v & 0xff));
    return s;
  }
  for (std::size_t i = 0; i < out.size(); ++i) s += (i ? " " : "") + std::to_string(out[i]);
  return s + "\n";
}

json run_json(const BFRun& r) {
  json j;
  j["status"] = r.status;
  j["output"] = r.output;
  if (!r.message.empty()) j["message"] = r.message;
  return j;
}

// ---- scripts

struct Loaded {
  Script script;
  FunctionRegistry registry;
  Environment env;
};

Loaded load_script(const std::string& path, const std::vector<std::string>& bindings) {
  Environment extra;
  std::set<std::string> names;
  for (const auto& b : bindings) {
    auto eq = b.find('=');
    if (eq == std::string::npos || eq == 0)
      fail(ErrorCode::InvalidArgument, "--table expects name=path, got '" + b + "'");
    std::string name = b.substr(0, eq);
    extra[name] = load_table_file(b.substr(eq + 1));
    names.insert(name);
  }
  ParseOptions po;
  po.registry = &builtin_registry();
  po.tables = &names;
  Loaded l{parse_script(read_file(path), po), {}, {}};
  l.registry = l.script.registry(builtin_registry());
  l.env = l.script.load_tables(parent_dir(path));
  for (auto& [n, t] : extra) l.env[n] = std::move(t);
  return l;
}

struct Globals {
  bool json = false;
  std::uint64_t fuel = 0;
};

int cmd_eval(const Globals& g, const std::string& path, const std::vector<std::string>& tables,
             const std::string& expect, double tolerance, bool stats, std::ostream& out, std::ostream& err) {
  Loaded l = load_script(path, tables);
  EvalOptions opts;
  opts.fuel = g.fuel;
  opts.registry = &l.registry;
  EvalStats st;
  AssociativeTable result = eval(l.script.program(), l.env, opts, &st);

  if (g.json) {
    json doc;
    doc["iterations"] = st.iterations;
    doc["result"] = json::parse(table_to_json(result));
    out << doc.dump(2) << "\n";
  } else {
    out << format_table(result);
  }
  if (stats) err << "iterations: " << st.iterations << "\n";

  if (!expect.empty()) {
    AssociativeTable want = load_table_file(expect);
    if (!(result.schema() == want.schema())) {
      err << "error: result schema " << result.schema().to_string() << " differs from expected "
          << want.schema().to_string() << "\n";
      return 1;
    }
    if (!approx_equal(result, want, tolerance)) {
      err << "error: result differs from '" << expect << "' beyond tolerance " << tolerance << "\n";
      return 1;
    }
  }
  return 0;
}

int cmd_op_count(const Globals& g, const std::string& path, const std::vector<std::string>& tables,
                 std::ostream& out) {
  Loaded l = load_script(path, tables);
  EvalOptions opts;
  opts.fuel = g.fuel;
  opts.registry = &l.registry;
  CostReport r = op_count(l.script.program(), l.env, opts);
  out << (g.json ? cost_report_json(r) + "\n" : cost_report_text(r));
  return 0;
}

int cmd_bf_run(const Globals& g, const std::string& path, const std::string& input, const std::string& input_format,
               const std::string& via, const std::string& output_format, std::ostream& out, std::ostream& err) {
  BFProgram p = parse_bf(read_file(path));
  std::vector<std::int64_t> in = decode_input(input, input_format);

  std::optional<BFRun> a, b;
  if (via != "lara") a = capture([&] { return interpret_bf(p, in, g.fuel); });
  if (via != "interp") b = capture([&] { return run_bf_via_iterlara(p, in, g.fuel); });

  if (via == "both") {
    bool agree = a->status == b->status && (a->status != "ok" || a->output == b->output);
    if (g.json) {
      json doc;
      doc["interp"] = run_json(*a);
      doc["lara"] = run_json(*b);
      doc["agree"] = agree;
      out << doc.dump(2) << "\n";
    } else {
      out << "interp: " << a->status << (a->status == "ok" ? "  " + output_text(a->output, "numbers") : "\n");
      out << "lara:   " << b->status << (b->status == "ok" ? "  " + output_text(b->output, "numbers") : "\n");
    }
    if (!agree) {
      err << "error: interpreter and compiled program disagree\n";
      return 1;
    }
    return 0;
  }

  const BFRun& r = a ? *a : *b;
  if (g.json) {
    out << run_json(r).dump(2) << "\n";
  } else if (r.status == "ok") {
    out << output_text(r.output, output_format);
  }
  if (r.status != "ok") {
    err << "error: " << r.status << ": " << r.message << "\n";
    return 1;
  }
  return 0;
}

int cmd_bf_compile(const std::string& path, const std::string& emit, std::ostream& out) {
  BFProgram p = parse_bf(read_file(path));
  PrintOptions po;
  po.unicode = emit == "unicode";
  out << print_expression(compile_bf(p), po) << "\n";
  return 0;
}

int cmd_tables_dump(const Globals& g, const std::vector<std::string>& files, std::ostream& out) {
  json doc = json::object();
  for (std::size_t i = 0; i < files.size(); ++i) {
    AssociativeTable t = load_table_file(files[i]);
    std::string name = std::filesystem::path(files[i]).stem().string();
    if (g.json) {
      doc[name] = json::parse(table_to_json(t));
    } else {
      out << (i ? "\n" : "") << name << " " << t.schema().to_string() << "\n" << format_table(t);
    }
  }
  if (g.json) out << doc.dump(2) << "\n";
  return 0;
}

void write_or_print(const std::string& dest, const std::vector<std::vector<Scalar>>& cells, bool as_json,
                    std::ostream& out) {
  if (dest.empty()) {
    emit_dense(out, cells, as_json);
    return;
  }
  std::ofstream f(dest);
  if (!f) fail(ErrorCode::IoError, "cannot write '" + dest + "'");
  emit_dense(f, cells, false);
}

int cmd_matmul(const Globals& g, const std::string& fa, const std::string& fb, const std::string& dest,
               std::ostream& out) {
  Dense a = read_dense(fa), b = read_dense(fb);
  if (a.cols() != b.rows())
    fail(ErrorCode::SizeMismatch, "cannot multiply " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                                      " by " + std::to_string(b.rows()) + "x" + std::to_string(b.cols()));
  if (a.integral != b.integral) {
    a.integral = b.integral = false;
  }
  EvalOptions opts;
  opts.fuel = g.fuel;
  AssociativeTable c = matmul(matrix_table(a), matrix_table(b), opts);
  write_or_print(dest, dense_cells(c, a.rows(), b.cols()), g.json, out);
  return 0;
}

int cmd_pool(const Globals& g, const std::string& file, std::int64_t stride, const std::string& kind,
             const std::string& dest, std::ostream& out) {
  Dense m = read_dense(file);
  std::vector<std::int64_t> iv;
  std::vector<double> rv;
  for (const auto& row : m.cells)
    for (const auto& v : row) {
      if (m.integral) iv.push_back(as_int(v));
      rv.push_back(as_real(v));
    }
  auto length = static_cast<std::int64_t>(rv.size());
  AssociativeTable a = m.integral ? vector_from_dense(iv) : vector_from_dense(rv);
  AssociativeTable r = kind == "max" ? maxpool1d(a, stride, length) : avgpool1d(a, stride, length);
  write_or_print(dest, dense_cells(r, 1, static_cast<std::size_t>(length / stride)), g.json, out);
  return 0;
}

void require_square(const Dense& m) {
  if (m.rows() != m.cols())
    fail(ErrorCode::NotSquare, "matrix is " + std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
}

int cmd_det(const Globals& g, const std::string& file, const std::string& method, std::ostream& out) {
  Dense m = read_dense(file);
  require_square(m);
  auto n = static_cast<std::int64_t>(m.rows());
  EvalOptions opts;
  opts.fuel = g.fuel;
  std::optional<Scalar> fixed, counted;
  if (method != "count") fixed = scalar_value(det_fixed(matrix_table(m), n));
  if (method != "fixed") counted = scalar_value(det_count(occupancy_table(m), opts));
  if (fixed && counted && !close(*fixed, *counted, 1e-9))
    throw std::logic_error("det_fixed " + to_string(*fixed) + " and det_count " + to_string(*counted) + " differ");
  Scalar d = fixed ? *fixed : *counted;
  if (g.json) {
    json doc;
    doc["n"] = n;
    doc["det"] = scalar_json(d);
    out << doc.dump(2) << "\n";
  } else {
    out << to_string(d) << "\n";
  }
  return 0;
}

int cmd_inv(const Globals& g, const std::string& file, const std::string& method, const std::string& dest,
            std::ostream& out) {
  Dense m = read_dense(file);
  require_square(m);
  auto n = static_cast<std::int64_t>(m.rows());
  EvalOptions opts;
  opts.fuel = g.fuel;
  AssociativeTable inv = method == "fixed" ? inv_fixed(matrix_table(m), n) : inv_count(occupancy_table(m), opts);
  write_or_print(dest, dense_cells(inv, m.rows(), m.cols()), g.json, out);
  return 0;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Evaluate key-value algebra scripts, count their cost, and run the BF encoding.", "iterlara"};
  app.fallthrough();
  app.require_subcommand(1);

  Globals g;
  g.fuel = default_fuel();
  app.add_flag("--json", g.json, "Print results as JSON");
  app.add_option("--fuel", g.fuel, "Loop body executions allowed (default 1000000 or $ITERLARA_FUEL)");

  std::string script, expect;
  std::vector<std::string> tables;
  double tolerance = 1e-9;
  bool stats = false;
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a script and print its result");
  eval_cmd->add_option("script", script, "Script file ('-' for stdin)")->required();
  eval_cmd->add_option("--table", tables, "Bind a table file: name=path (repeatable)");
  eval_cmd->add_option("--expect", expect, "Compare the result against a table file");
  eval_cmd->add_option("--tolerance", tolerance, "Absolute tolerance for real values with --expect");
  eval_cmd->add_flag("--stats", stats, "Report loop body executions on stderr");

  auto* cost_cmd = app.add_subcommand("op-count", "Count the operations a script performs");
  cost_cmd->add_option("script", script, "Script file ('-' for stdin)")->required();
  cost_cmd->add_option("--table", tables, "Bind a table file: name=path (repeatable)");

  std::string bf_file, bf_input, input_format = "text", via = "interp", output_format = "numbers", emit = "dsl";
  auto* bf_cmd = app.add_subcommand("bf", "BF programs");
  bf_cmd->require_subcommand(1);
  auto* bf_run = bf_cmd->add_subcommand("run", "Run a BF program");
  bf_run->add_option("file", bf_file, "Program file")->required();
  bf_run->add_option("--input", bf_input, "Program input");
  bf_run->add_option("--input-format", input_format, "How --input is read")
      ->check(CLI::IsMember({"text", "hex", "numbers"}));
  bf_run->add_option("--via", via, "Execution path")->check(CLI::IsMember({"interp", "lara", "both"}));
  bf_run->add_option("--output", output_format, "Output as byte text or numbers")
      ->check(CLI::IsMember({"text", "numbers"}));
  auto* bf_compile = bf_cmd->add_subcommand("compile", "Print the compiled algebra expression");
  bf_compile->add_option("file", bf_file, "Program file")->required();
  bf_compile->add_option("--emit", emit, "Notation")->check(CLI::IsMember({"dsl", "unicode"}));

  std::vector<std::string> dump_files;
  auto* tables_cmd = app.add_subcommand("tables", "Table files");
  tables_cmd->require_subcommand(1);
  auto* dump_cmd = tables_cmd->add_subcommand("dump", "Print table files");
  dump_cmd->add_option("files", dump_files, "Table files (.csv or .jsonl)")->required();

  std::string fa, fb, dest, pool_kind = "avg", method = "count";
  std::int64_t stride = 1;
  auto* matmul_cmd = app.add_subcommand("matmul", "Multiply two matrix CSV files");
  matmul_cmd->add_option("a", fa, "Left matrix")->required();
  matmul_cmd->add_option("b", fb, "Right matrix")->required();
  matmul_cmd->add_option("-o,--output", dest, "Write the product as CSV");

  auto* pool_cmd = app.add_subcommand("pool", "1-D pooling of a vector CSV file");
  pool_cmd->add_option("vector", fa, "Values, row by row")->required();
  pool_cmd->add_option("-s,--stride", stride, "Window width")->required();
  pool_cmd->add_option("--kind", pool_kind, "Pooling function")->check(CLI::IsMember({"avg", "max"}));
  pool_cmd->add_option("-o,--output", dest, "Write the pooled vector as CSV");

  auto* det_cmd = app.add_subcommand("det", "Determinant of a square matrix CSV file");
  det_cmd->add_option("matrix", fa, "Matrix")->required();
  det_cmd->add_option("--method", method, "Fixed-size or count-driven construction")
      ->check(CLI::IsMember({"fixed", "count", "both"}));

  auto* inv_cmd = app.add_subcommand("inv", "Inverse of a square matrix CSV file");
  inv_cmd->add_option("matrix", fa, "Matrix")->required();
  inv_cmd->add_option("--method", method, "Fixed-size or count-driven construction")
      ->check(CLI::IsMember({"fixed", "count"}));
  inv_cmd->add_option("-o,--output", dest, "Write the inverse as CSV");

  std::vector<std::string> argv_store{"iterlara"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& s : argv_store) argv.push_back(s.data());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }

  if (eval_cmd->parsed()) return cmd_eval(g, script, tables, expect, tolerance, stats, out, err);
  if (cost_cmd->parsed()) return cmd_op_count(g, script, tables, out);
  if (bf_run->parsed()) return cmd_bf_run(g, bf_file, bf_input, input_format, via, output_format, out, err);
  if (bf_compile->parsed()) return cmd_bf_compile(bf_file, emit, out);
  if (dump_cmd->parsed()) return cmd_tables_dump(g, dump_files, out);
  if (matmul_cmd->parsed()) return cmd_matmul(g, fa, fb, dest, out);
  if (pool_cmd->parsed()) return cmd_pool(g, fa, stride, pool_kind, dest, out);
  if (det_cmd->parsed()) return cmd_det(g, fa, method, out);
  if (inv_cmd->parsed()) return cmd_inv(g, fa, method, dest, out);
  return 2;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  try {
    return run(args, out, err);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return 2;
  }
}

int run_cli(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run_cli(args, std::cout, std::cerr);
}

}  // namespace iterlara::cli

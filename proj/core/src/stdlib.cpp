#include "iterlara/stdlib.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "iterlara/compose.hpp"
#include "iterlara/error.hpp"
#include "iterlara/state.hpp"

namespace iterlara {

namespace {

using Op = ScalarExpr::Op;

constexpr std::int64_t kMaxDetSize = 6;

Schema matrix_schema(Kind k) { return Schema({{"i", Kind::Int}, {"j", Kind::Int}}, {{"v", k, zero_of(k)}}); }

Scalar one_of(Kind k) { return k == Kind::Real ? Scalar{1.0} : Scalar{std::int64_t{1}}; }

AssociativeTable run(const Expression& e, Environment env, const EvalOptions& opts = {}) {
  return eval(e, env, opts);
}

Kind value_kind(const AssociativeTable& t, const char* what) {
  const Schema& s = t.schema();
  auto vi = s.value_index("v");
  if (!vi || !is_numeric(s.values()[*vi].kind))
    fail(ErrorCode::SchemaMismatch, std::string(what) + " expects a numeric value attribute 'v', got " + s.to_string());
  return s.values()[*vi].kind;
}

void require_matrix(const AssociativeTable& t, const char* what) {
  const Schema& s = t.schema();
  auto i = s.key_index("i"), j = s.key_index("j");
  if (s.key_arity() != 2 || !i || !j || s.keys()[*i].kind != Kind::Int || s.keys()[*j].kind != Kind::Int)
    fail(ErrorCode::SchemaMismatch, std::string(what) + " expects a matrix [[i,j]: v], got " + s.to_string());
  value_kind(t, what);
}

std::int64_t vector_length(const AssociativeTable& a) {
  const Schema& s = a.schema();
  if (s.key_arity() != 1 || s.keys()[0].kind != Kind::Int)
    fail(ErrorCode::SchemaMismatch, "pooling expects a vector with one int key, got " + s.to_string());
  std::int64_t n = 0;
  for (std::size_t r = 0; r < a.size(); ++r) n = std::max(n, as_int(a.key(r)[0]) + 1);
  return n;
}

void check_stride(const AssociativeTable& a, std::int64_t s, std::optional<std::int64_t> length) {
  if (s < 1) fail(ErrorCode::BadStride, "stride must be at least 1, got " + std::to_string(s));
  std::int64_t stored = vector_length(a);
  std::int64_t n = length.value_or(stored);
  if (n < stored) fail(ErrorCode::BadStride, "length " + std::to_string(n) + " is shorter than the stored vector");
  if (n % s != 0)
    fail(ErrorCode::BadStride, "length " + std::to_string(n) + " is not a multiple of stride " + std::to_string(s));
}

// B_r: the r-th row selector of the permutation expansion, (r, j, k_r=j) -> 1.
AssociativeTable selector(std::int64_t r, std::int64_t cols, Kind k) {
  Schema s({{"i", Kind::Int}, {"j", Kind::Int}, {"k" + std::to_string(r), Kind::Int}}, {{"v", k, zero_of(k)}});
  TableBuilder b(s);
  Scalar one = one_of(k);
  for (std::int64_t j = 0; j < cols; ++j) {
    Scalar key[3] = {Scalar{r}, Scalar{j}, Scalar{j}};
    b.add(key, std::span<const Scalar>(&one, 1));
  }
  return b.build();
}

AssociativeTable unit(Kind k) { return scalar_table(one_of(k)); }

// X ⋈̂_× π_{-i,-j}(M ⋈_× B): extends every partial product by one row choice.
Expression step(Expression x, Expression m, Expression b) {
  return ir::sjoin(x, ir::project(ir::join(m, b, "times"), {"-i", "-j"}), "times");
}

// C ⧗_+ (ext_one σ_perm X ⋈̂_× ext_d X), grouped by `group`.
Expression permutation_sum(Expression x, std::vector<std::string> group, Kind k) {
  FnRef one = k == Kind::Real ? FnRef{"const", {text_scalar("v"), Scalar{1.0}}} : FnRef{"one", {}};
  Expression filtered = ir::ext(ir::select(x, sx::call("perm", {})), one);
  Expression signed_ = ir::ext(x, FnRef{"perm_sign", {}});
  return ir::aggregate(ir::sjoin(filtered, signed_, "times"), "plus", std::move(group));
}

Expression selector0(Expression j, Kind k) {
  Expression b = ir::ext(std::move(j), FnRef{"selector0", {}});
  return k == Kind::Real ? ir::map(b, FnRef{"to_real", {}}) : b;
}

Expression next_selector(Expression b) { return ir::ext(std::move(b), FnRef{"next_selector", {}}); }

Expression values_only(Expression a) { return ir::project(std::move(a), {"i", "j", "v"}); }

// Signed minors: for every removed cell (x,y), the cells outside row x and
// column y re-indexed to an (n-1)-matrix, entry (i,j) multiplied by (-1)^(i+j).
Expression minors(Expression m, Expression g) {
  auto ne = [](const char* a, const char* b) { return sx::binary(Op::Ne, sx::var(a), sx::var(b)); };
  Expression pairs = ir::join(m, ir::rename(g, {{"v", "g"}}), "pair");
  Expression off = ir::select(pairs, sx::binary(Op::And, ne("i", "x"), ne("j", "y")));
  return ir::project(ir::ext(off, FnRef{"minor_reindex", {}}), {"x", "y", "i", "j", "v"});
}

Expression adjugate(Expression cof) {
  return ir::project(ir::rename(std::move(cof), {{"x", "j"}, {"y", "i"}}), {"i", "j", "v"});
}

Expression divide_by_det(Expression adj, Expression det) {
  return ir::join(ir::map(std::move(adj), FnRef{"to_real", {}}), ir::ext(std::move(det), FnRef{"reciprocal", {}}),
                  "times");
}

AssociativeTable cells_box(const IntMatrix* im, const RealMatrix* rm, std::size_t rows, std::size_t cols) {
  Kind k = im ? Kind::Int : Kind::Real;
  Schema s({{"i", Kind::Int}, {"j", Kind::Int}}, {{"v", k, zero_of(k)}, {"in", Kind::Int, std::int64_t{0}}});
  TableBuilder b(s);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) {
      Scalar key[2] = {Scalar{static_cast<std::int64_t>(i)}, Scalar{static_cast<std::int64_t>(j)}};
      Scalar val[2] = {im ? Scalar{(*im)[i][j]} : Scalar{(*rm)[i][j]}, Scalar{std::int64_t{1}}};
      b.add(key, val);
    }
  return b.build();
}

template <class M>
void check_rectangular(const M& m) {
  for (const auto& row : m)
    if (row.size() != m.front().size()) fail(ErrorCode::SizeMismatch, "matrix rows differ in length");
}

// Occupancy form of `a`, plus its side length.
std::pair<AssociativeTable, std::int64_t> square_occupancy(const AssociativeTable& a) {
  require_matrix(a, "matrix operation");
  const Schema& s = a.schema();
  AssociativeTable occ = a;
  if (!s.value_index("in")) {
    std::int64_t rows = 0, cols = 0;
    std::size_t ii = *s.key_index("i"), jj = *s.key_index("j");
    for (std::size_t r = 0; r < a.size(); ++r) {
      rows = std::max(rows, as_int(a.key(r)[ii]) + 1);
      cols = std::max(cols, as_int(a.key(r)[jj]) + 1);
    }
    occ = with_occupancy(a, rows, cols);
  }
  std::set<std::int64_t> is, js;
  const Schema& os = occ.schema();
  std::size_t ii = *os.key_index("i"), jj = *os.key_index("j");
  for (std::size_t r = 0; r < occ.size(); ++r) {
    is.insert(as_int(occ.key(r)[ii]));
    js.insert(as_int(occ.key(r)[jj]));
  }
  if (is.size() != js.size())
    fail(ErrorCode::NotSquare,
         "matrix has " + std::to_string(is.size()) + " rows and " + std::to_string(js.size()) + " columns");
  auto n = static_cast<std::int64_t>(is.size());
  if (n == 0) fail(ErrorCode::InvalidArgument, "empty matrix");
  if (n > kMaxDetSize)
    fail(ErrorCode::SizeTooLarge, "determinant of size " + std::to_string(n) + " exceeds the limit of " +
                                      std::to_string(kMaxDetSize));
  return {occ, n};
}

void check_fixed_size(const AssociativeTable& a, std::int64_t n) {
  require_matrix(a, "matrix operation");
  if (n < 1) fail(ErrorCode::InvalidArgument, "matrix size must be positive");
  if (n > kMaxDetSize)
    fail(ErrorCode::SizeTooLarge,
         "determinant of size " + std::to_string(n) + " exceeds the limit of " + std::to_string(kMaxDetSize));
  const Schema& s = a.schema();
  std::size_t ii = *s.key_index("i"), jj = *s.key_index("j");
  for (std::size_t r = 0; r < a.size(); ++r)
    if (as_int(a.key(r)[ii]) >= n || as_int(a.key(r)[jj]) >= n)
      fail(ErrorCode::SizeMismatch, "matrix has entries outside the " + std::to_string(n) + "x" + std::to_string(n) +
                                        " box");
}

}  // namespace

// ------------------------------------------------------------- conversions

AssociativeTable matrix_from_dense(const IntMatrix& m) {
  check_rectangular(m);
  TableBuilder b(matrix_schema(Kind::Int));
  for (std::size_t i = 0; i < m.size(); ++i)
    for (std::size_t j = 0; j < m[i].size(); ++j) {
      Scalar key[2] = {Scalar{static_cast<std::int64_t>(i)}, Scalar{static_cast<std::int64_t>(j)}};
      Scalar v{m[i][j]};
      b.add(key, std::span<const Scalar>(&v, 1));
    }
  return b.build();
}

AssociativeTable matrix_from_dense(const RealMatrix& m) {
  check_rectangular(m);
  TableBuilder b(matrix_schema(Kind::Real));
  for (std::size_t i = 0; i < m.size(); ++i)
    for (std::size_t j = 0; j < m[i].size(); ++j) {
      Scalar key[2] = {Scalar{static_cast<std::int64_t>(i)}, Scalar{static_cast<std::int64_t>(j)}};
      Scalar v{m[i][j]};
      b.add(key, std::span<const Scalar>(&v, 1));
    }
  return b.build();
}

RealMatrix matrix_to_dense(const AssociativeTable& t, std::size_t rows, std::size_t cols) {
  require_matrix(t, "matrix_to_dense");
  const Schema& s = t.schema();
  std::size_t ii = *s.key_index("i"), jj = *s.key_index("j"), vi = *s.value_index("v");
  RealMatrix m(rows, std::vector<double>(cols, 0.0));
  for (std::size_t r = 0; r < t.size(); ++r) {
    auto i = as_int(t.key(r)[ii]), j = as_int(t.key(r)[jj]);
    if (i < 0 || j < 0 || static_cast<std::size_t>(i) >= rows || static_cast<std::size_t>(j) >= cols)
      fail(ErrorCode::SizeMismatch, "entry (" + std::to_string(i) + "," + std::to_string(j) + ") is outside " +
                                        std::to_string(rows) + "x" + std::to_string(cols));
    m[i][j] = as_real(t.value(r)[vi]);
  }
  return m;
}

AssociativeTable vector_from_dense(const std::vector<std::int64_t>& v) {
  TableBuilder b(Schema({{"i", Kind::Int}}, {{"v", Kind::Int, std::int64_t{0}}}));
  for (std::size_t i = 0; i < v.size(); ++i) {
    Scalar k{static_cast<std::int64_t>(i)}, x{v[i]};
    b.add(std::span<const Scalar>(&k, 1), std::span<const Scalar>(&x, 1));
  }
  return b.build();
}

AssociativeTable vector_from_dense(const std::vector<double>& v) {
  TableBuilder b(Schema({{"i", Kind::Int}}, {{"v", Kind::Real, 0.0}}));
  for (std::size_t i = 0; i < v.size(); ++i) {
    Scalar k{static_cast<std::int64_t>(i)}, x{v[i]};
    b.add(std::span<const Scalar>(&k, 1), std::span<const Scalar>(&x, 1));
  }
  return b.build();
}

AssociativeTable matrix_occupancy(const IntMatrix& m) {
  check_rectangular(m);
  return cells_box(&m, nullptr, m.size(), m.empty() ? 0 : m[0].size());
}

AssociativeTable matrix_occupancy(const RealMatrix& m) {
  check_rectangular(m);
  return cells_box(nullptr, &m, m.size(), m.empty() ? 0 : m[0].size());
}

AssociativeTable with_occupancy(const AssociativeTable& m, std::size_t rows, std::size_t cols) {
  Kind k = value_kind(m, "with_occupancy");
  auto dense = matrix_to_dense(m, rows, cols);
  if (k == Kind::Real) return cells_box(nullptr, &dense, rows, cols);
  // Integers are copied from the table so large values stay exact.
  IntMatrix im(rows, std::vector<std::int64_t>(cols, 0));
  const Schema& s = m.schema();
  std::size_t ii = *s.key_index("i"), jj = *s.key_index("j"), vi = *s.value_index("v");
  for (std::size_t r = 0; r < m.size(); ++r) im[as_int(m.key(r)[ii])][as_int(m.key(r)[jj])] = as_int(m.value(r)[vi]);
  return cells_box(&im, nullptr, rows, cols);
}

// ------------------------------------------------------------------ matmul

Expression matmul_expr(Expression a, Expression b, Kind value_kind) {
  AssociativeTable e(Schema({{"i", Kind::Int}, {"k", Kind::Int}}, {{"v", value_kind, zero_of(value_kind)}}));
  Expression prod = ir::join(std::move(a), ir::rename(std::move(b), {{"i", "j"}, {"j", "k"}}), "times");
  return ir::rename(ir::union_(ir::lit(e), prod, "plus"), {{"k", "j"}});
}

AssociativeTable matmul(const AssociativeTable& a, const AssociativeTable& b, const EvalOptions& opts) {
  require_matrix(a, "matmul");
  require_matrix(b, "matmul");
  Kind ka = value_kind(a, "matmul"), kb = value_kind(b, "matmul");
  if (ka != kb) fail(ErrorCode::SchemaMismatch, "matmul operands have different value kinds");
  return run(matmul_expr(ir::ref("A"), ir::ref("B"), ka), {{"A", a}, {"B", b}}, opts);
}

// ----------------------------------------------------------------- pooling

Expression avgpool1d_expr(Expression a, std::int64_t s) {
  Expression windows = ir::ext(std::move(a), FnRef{"reshape", {Scalar{s}}});
  return ir::map(ir::aggregate(windows, "plus", {"i'"}), FnRef{"divide", {Scalar{s}}});
}

AssociativeTable avgpool1d(const AssociativeTable& a, std::int64_t s, std::optional<std::int64_t> length) {
  check_stride(a, s, length);
  return run(avgpool1d_expr(ir::ref("A"), s), {{"A", a}});
}

// Windows with fewer than s stored cells hold implicit zeros, so their max is
// at least 0: keep the stored max only when it is positive or the window is full.
Expression maxpool1d_expr(Expression a, std::int64_t s) {
  Expression windows = ir::ext(std::move(a), FnRef{"reshape", {Scalar{s}}});
  Expression mx = ir::aggregate(windows, "max", {"i'"});
  Expression cnt = ir::aggregate(ir::ext(windows, FnRef{"one", {text_scalar("c")}}), "plus", {"i'"});
  ScalarExprPtr keep = sx::binary(Op::Or, sx::binary(Op::Eq, sx::var("c"), sx::lit(Scalar{s})),
                                  sx::binary(Op::Gt, sx::var("v"), sx::lit(Scalar{std::int64_t{0}})));
  return ir::project(ir::select(ir::join(mx, cnt, "pair"), keep), {"-c"});
}

AssociativeTable maxpool1d(const AssociativeTable& a, std::int64_t s, std::optional<std::int64_t> length) {
  check_stride(a, s, length);
  return run(maxpool1d_expr(ir::ref("A"), s), {{"A", a}});
}

AssociativeTable relu(const AssociativeTable& a) { return run(ir::map(ir::ref("A"), FnRef{"relu", {}}), {{"A", a}}); }

AssociativeTable argmax(const AssociativeTable& a) {
  if (a.empty()) fail(ErrorCode::EmptyInput, "argmax of an empty table");
  Expression e = ir::rel(RelOp::Divide, {ir::ref("A"), ir::aggregate(ir::ref("A"), "max", {})});
  return run(e, {{"A", a}});
}

// ------------------------------------------------------- fixed-size det/inv

Expression det_fixed_expr(Expression a, std::int64_t n, Kind k) {
  if (n < 1) fail(ErrorCode::InvalidArgument, "matrix size must be positive");
  if (n > kMaxDetSize)
    fail(ErrorCode::SizeTooLarge,
         "determinant of size " + std::to_string(n) + " exceeds the limit of " + std::to_string(kMaxDetSize));
  Expression m = values_only(std::move(a));
  Expression x = ir::lit(unit(k));
  for (std::int64_t r = 0; r < n; ++r) x = step(x, m, ir::lit(selector(r, n, k)));
  return permutation_sum(x, {}, k);
}

AssociativeTable det_fixed(const AssociativeTable& a, std::int64_t n) {
  check_fixed_size(a, n);
  return run(det_fixed_expr(ir::ref("A"), n, value_kind(a, "det")), {{"A", a}});
}

AssociativeTable inv_fixed(const AssociativeTable& a, std::int64_t n) {
  check_fixed_size(a, n);
  Kind k = value_kind(a, "inv");
  AssociativeTable d = run(det_fixed_expr(ir::ref("A"), n, k), {{"A", a}});
  if (std::abs(as_real(scalar(d))) <= 1e-9) fail(ErrorCode::Singular, "matrix is singular");

  TableBuilder gb(Schema({{"x", Kind::Int}, {"y", Kind::Int}}, {{"v", k, zero_of(k)}}));
  Scalar one = one_of(k);
  for (std::int64_t x = 0; x < n; ++x)
    for (std::int64_t y = 0; y < n; ++y) {
      Scalar key[2] = {Scalar{x}, Scalar{y}};
      gb.add(key, std::span<const Scalar>(&one, 1));
    }
  Expression g = ir::lit(gb.build());
  Expression mn = minors(values_only(ir::ref("A")), g);
  Expression x = g;
  for (std::int64_t r = 0; r + 1 < n; ++r) x = step(x, mn, ir::lit(selector(r, n - 1, k)));
  Expression inv = divide_by_det(adjugate(permutation_sum(x, {"x", "y"}, k)), ir::ref("D"));
  return run(inv, {{"A", a}, {"D", d}});
}

// -------------------------------------------------- size-agnostic det/inv

namespace {

// Statements shared by det_count and inv_count: D := Det(A).
void det_statements(std::vector<Stmt>& out, Kind k) {
  out.push_back(Stmt::assign("M", values_only(ir::ref("A"))));
  out.push_back(Stmt::assign("J", ir::project(ir::ref("A"), {"j", "in"})));
  out.push_back(Stmt::assign("B", selector0(ir::ref("J"), k)));
  out.push_back(Stmt::assign("X", ir::lit(unit(k))));
  out.push_back(Stmt::for_cond(ir::count(ir::ref("J")),
                               {Stmt::assign("X", step(ir::ref("X"), ir::ref("M"), ir::ref("B"))),
                                Stmt::assign("B", next_selector(ir::ref("B")))}));
  out.push_back(Stmt::assign("D", permutation_sum(ir::ref("X"), {}, k)));
}

}  // namespace

Expression det_count_expr(Expression a, Kind k) {
  std::vector<Stmt> s;
  det_statements(s, k);
  return substitute(compose_statements(s, "D"), "A", a);
}

AssociativeTable det_count(const AssociativeTable& a, const EvalOptions& opts) {
  auto [occ, n] = square_occupancy(a);
  (void)n;
  return run(det_count_expr(ir::ref("A"), value_kind(occ, "det")), {{"A", occ}}, opts);
}

Expression inv_count_expr(Expression a, Kind k) {
  std::vector<Stmt> s;
  det_statements(s, k);
  FnRef one = k == Kind::Real ? FnRef{"const", {text_scalar("v"), Scalar{1.0}}} : FnRef{"one", {}};
  Expression cells = ir::rename(ir::project(ir::ref("A"), {"i", "j", "in"}), {{"i", "x"}, {"j", "y"}});
  s.push_back(Stmt::assign("G", ir::ext(cells, one)));
  s.push_back(Stmt::assign("Mn", minors(ir::ref("M"), ir::ref("G"))));
  Expression tail = ir::select(ir::ref("J"), sx::binary(Op::Gt, sx::var("j"), sx::lit(Scalar{std::int64_t{0}})));
  s.push_back(Stmt::assign("Bm", selector0(ir::ext(tail, FnRef{"dec_key", {text_scalar("j")}}), k)));
  s.push_back(Stmt::assign("Y", ir::ref("G")));
  s.push_back(Stmt::for_cond(ir::count(tail), {Stmt::assign("Y", step(ir::ref("Y"), ir::ref("Mn"), ir::ref("Bm"))),
                                               Stmt::assign("Bm", next_selector(ir::ref("Bm")))}));
  s.push_back(Stmt::assign("Adj", adjugate(permutation_sum(ir::ref("Y"), {"x", "y"}, k))));
  s.push_back(Stmt::assign("Inv", divide_by_det(ir::ref("Adj"), ir::ref("D"))));
  return substitute(compose_statements(s, ""), "A", a);
}

AssociativeTable inv_count(const AssociativeTable& a, const EvalOptions& opts) {
  auto [occ, n] = square_occupancy(a);
  (void)n;
  AssociativeTable st = run(inv_count_expr(ir::ref("A"), value_kind(occ, "inv")), {{"A", occ}}, opts);
  if (std::abs(as_real(scalar(state_get(st, "D")))) <= 1e-9) fail(ErrorCode::Singular, "matrix is singular");
  return state_get(st, "Inv");
}

}  // namespace iterlara

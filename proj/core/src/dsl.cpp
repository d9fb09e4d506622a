#include "iterlara/dsl.hpp"

#include <cctype>
#include <charconv>
#include <filesystem>
#include <map>

#include "iterlara/compose.hpp"
#include "iterlara/error.hpp"
#include "iterlara/table_io.hpp"

namespace iterlara {

namespace {

using Op = ScalarExpr::Op;

// ------------------------------------------------------------------- lexer

enum class Tok { Ident, Int, Real, String, Punct, End };

struct Token {
  Tok kind = Tok::End;
  std::string text;
  std::size_t line = 1, col = 1;
};

class Lexer {
public:
  explicit Lexer(std::string_view src) : src_(src) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    while (true) {
      skip_space();
      Token t;
      t.line = line_;
      t.col = col_;
      if (pos_ >= src_.size()) {
        out.push_back(t);
        return out;
      }
      char c = src_[pos_];
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        t.kind = Tok::Ident;
        while (pos_ < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_' ||
                                      src_[pos_] == '\''))
          t.text += advance();
      } else if (std::isdigit(static_cast<unsigned char>(c))) {
        lex_number(t);
      } else if (c == '"') {
        lex_string(t);
      } else {
        t.kind = Tok::Punct;
        static const char* two[] = {"->", "=>", ":=", "==", "!=", "<=", ">=", "&&", "||"};
        for (const char* p : two)
          if (src_.substr(pos_, 2) == p) {
            t.text = p;
            advance();
            advance();
            break;
          }
        if (t.text.empty()) {
          if (std::string_view("()[]{},;:=+-*/%<>!").find(c) == std::string_view::npos)
            throw SyntaxError(line_, col_, std::string("unexpected character '") + c + "'");
          t.text = std::string(1, advance());
        }
      }
      out.push_back(std::move(t));
    }
  }

private:
  char advance() {
    char c = src_[pos_++];
    if (c == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    return c;
  }

  void skip_space() {
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else if (c == '#' || src_.substr(pos_, 2) == "//") {
        while (pos_ < src_.size() && src_[pos_] != '\n') advance();
      } else {
        return;
      }
    }
  }

  void lex_number(Token& t) {
    t.kind = Tok::Int;
    auto digits = [&] {
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) t.text += advance();
    };
    digits();
    if (pos_ + 1 < src_.size() && src_[pos_] == '.' && std::isdigit(static_cast<unsigned char>(src_[pos_ + 1]))) {
      t.kind = Tok::Real;
      t.text += advance();
      digits();
    }
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      std::size_t save = pos_;
      std::string exp(1, src_[pos_]);
      std::size_t k = pos_ + 1;
      if (k < src_.size() && (src_[k] == '+' || src_[k] == '-')) exp += src_[k++];
      if (k < src_.size() && std::isdigit(static_cast<unsigned char>(src_[k]))) {
        t.kind = Tok::Real;
        while (pos_ < k) t.text += advance();
        digits();
      } else {
        pos_ = save;
      }
    }
  }

  void lex_string(Token& t) {
    t.kind = Tok::String;
    std::size_t line = line_, col = col_;
    advance();
    while (true) {
      if (pos_ >= src_.size()) throw SyntaxError(line, col, "unterminated string");
      char c = advance();
      if (c == '"') return;
      if (c == '\\') {
        if (pos_ >= src_.size()) throw SyntaxError(line, col, "unterminated string");
        char e = advance();
        t.text += e == 'n' ? '\n' : e == 't' ? '\t' : e;
      } else {
        t.text += c;
      }
    }
  }

  std::string_view src_;
  std::size_t pos_ = 0, line_ = 1, col_ = 1;
};

// ------------------------------------------------------------------ parser

const std::map<std::string, RelOp>& binary_rel_ops() {
  static const std::map<std::string, RelOp> m{
      {"div", RelOp::Divide},         {"antijoinL", RelOp::AntijoinL}, {"antijoinR", RelOp::AntijoinR},
      {"setunion", RelOp::SetUnion},  {"intersect", RelOp::Intersect}, {"minus", RelOp::Difference},
      {"concat", RelOp::Concat},      {"lt", RelOp::Lt},               {"le", RelOp::Le},
      {"eq", RelOp::Eq},              {"ne", RelOp::Ne},               {"gt", RelOp::Gt},
      {"ge", RelOp::Ge}};
  return m;
}

class Parser {
public:
  Parser(std::string_view src, const ParseOptions& opts) : toks_(Lexer(src).run()), opts_(opts) {}

  Script script() {
    Script s;
    script_ = &s;
    while (!at_end()) {
      if (is_ident("fn")) {
        fn_item(s);
      } else if (is_ident("mapfn")) {
        mapfn_item(s);
      } else if (is_ident("load")) {
        next();
        LoadDef d;
        d.name = ident("table name");
        d.path = expect_kind(Tok::String, "a quoted path").text;
        expect(";");
        s.loads.push_back(d);
        bound_.insert(d.name);
      } else if (is_ident("let") && peek(2).text == "=" && !let_is_expression()) {
        next();
        std::string name = ident("name");
        expect("=");
        Expression e = expr();
        expect(";");
        s.lets.emplace_back(name, e);
        bound_.insert(name);
      } else {
        s.result = expr();
        accept(";");
        if (!at_end()) fail_here("expected end of script after the final expression");
      }
    }
    if (!s.result) fail_here("expected expression");
    return s;
  }

  Expression single_expression() {
    Expression e = expr();
    accept(";");
    if (!at_end()) fail_here("unexpected input after expression");
    return e;
  }

  ScalarExprPtr single_scalar() {
    ScalarExprPtr e = sexpr();
    if (!at_end()) fail_here("unexpected input after expression");
    return e;
  }

private:
  // ---- token helpers
  const Token& cur() const { return toks_[pos_]; }
  const Token& peek(std::size_t k) const { return toks_[std::min(pos_ + k, toks_.size() - 1)]; }
  bool at_end() const { return cur().kind == Tok::End; }
  const Token& next() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }
  bool is(const char* p) const { return cur().kind == Tok::Punct && cur().text == p; }
  bool is_ident(const char* w) const { return cur().kind == Tok::Ident && cur().text == w; }
  bool accept(const char* p) {
    if (!is(p)) return false;
    next();
    return true;
  }
  [[noreturn]] void fail_here(const std::string& msg) const {
    std::string got = at_end() ? "end of input" : "'" + cur().text + "'";
    throw SyntaxError(cur().line, cur().col, msg + ", found " + got);
  }
  void expect(const char* p) {
    if (!accept(p)) fail_here(std::string("expected '") + p + "'");
  }
  const Token& expect_kind(Tok k, const char* what) {
    if (cur().kind != k) fail_here(std::string("expected ") + what);
    return next();
  }
  std::string ident(const char* what) { return expect_kind(Tok::Ident, what).text; }

  // `let x = e in body` used as the final expression, as opposed to `let x = e;`.
  bool let_is_expression() {
    std::size_t save = pos_;
    next();
    next();
    next();
    try {
      expr();
    } catch (const SyntaxError&) {
      pos_ = save;
      return false;
    }
    bool r = is_ident("in");
    pos_ = save;
    return r;
  }

  // ---- items
  void fn_item(Script& s) {
    next();
    std::string name = ident("function name");
    expect("(");
    std::string a = ident("parameter");
    if (accept(",")) {
      BinaryDef d;
      d.name = name;
      d.x = a;
      d.y = ident("parameter");
      expect(")");
      expect("=");
      d.body = sexpr();
      if (!is_ident("identity")) fail_here("expected 'identity'");
      next();
      expect("=");
      d.identity = literal();
      if (!is_ident("cost")) fail_here("expected 'cost'");
      next();
      expect("=");
      d.cost = int_literal();
      expect(";");
      s.binaries.push_back(d);
      return;
    }
    expect(")");
    expect("=");
    bool had = bound_.count(a) != 0;
    bound_.insert(a);
    Expression body = expr();
    if (!had) bound_.erase(a);
    std::vector<std::pair<std::string, Expression>> aux;
    if (is_ident("with")) {
      next();
      do {
        std::string n = ident("name");
        expect(":=");
        aux.emplace_back(n, expr());
      } while (accept(","));
    }
    expect(";");
    s.fns.push_back({name, ir::fn(a, body, aux, name)});
  }

  void mapfn_item(Script& s) {
    next();
    MapDef d;
    d.name = ident("function name");
    expect("(");
    d.v = ident("parameter");
    expect(")");
    expect("=");
    d.body = sexpr();
    if (is_ident("cost")) {
      next();
      expect("=");
      d.cost = int_literal();
    }
    expect(";");
    s.mapfns.push_back(d);
  }

  // ---- literals
  Scalar literal() {
    bool neg = accept("-");
    const Token& t = cur();
    if (t.kind == Tok::Int || t.kind == Tok::Real) {
      next();
      return number(t, neg);
    }
    if (neg) fail_here("expected a number after '-'");
    if (t.kind == Tok::String) {
      next();
      return text_scalar(t.text);
    }
    if (is_ident("true") || is_ident("false")) {
      bool b = next().text == "true";
      return Scalar{b};
    }
    fail_here("expected a literal");
  }

  Scalar number(const Token& t, bool neg) {
    if (t.kind == Tok::Int) {
      std::int64_t v = 0;
      auto [p, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
      if (ec != std::errc() || p != t.text.data() + t.text.size())
        throw SyntaxError(t.line, t.col, "integer literal out of range");
      return Scalar{neg ? -v : v};
    }
    double v = std::stod(t.text);
    return Scalar{neg ? -v : v};
  }

  std::int64_t int_literal() {
    Scalar s = literal();
    if (kind_of(s) != Kind::Int) fail_here("expected an integer");
    return std::get<std::int64_t>(s);
  }

  // ---- scalar expressions
  ScalarExprPtr sexpr() { return s_or(); }

  ScalarExprPtr s_or() {
    auto l = s_and();
    while (accept("||")) l = sx::binary(Op::Or, l, s_and());
    return l;
  }
  ScalarExprPtr s_and() {
    auto l = s_cmp();
    while (accept("&&")) l = sx::binary(Op::And, l, s_cmp());
    return l;
  }
  ScalarExprPtr s_cmp() {
    auto l = s_add();
    static const std::pair<const char*, Op> ops[] = {{"<=", Op::Le}, {">=", Op::Ge}, {"==", Op::Eq},
                                                     {"!=", Op::Ne}, {"<", Op::Lt},  {">", Op::Gt}};
    while (true) {
      bool hit = false;
      for (auto [p, op] : ops)
        if (accept(p)) {
          l = sx::binary(op, l, s_add());
          hit = true;
          break;
        }
      if (!hit) return l;
    }
  }
  ScalarExprPtr s_add() {
    auto l = s_mul();
    while (true) {
      if (accept("+")) l = sx::binary(Op::Add, l, s_mul());
      else if (accept("-")) l = sx::binary(Op::Sub, l, s_mul());
      else return l;
    }
  }
  ScalarExprPtr s_mul() {
    auto l = s_unary();
    while (true) {
      if (accept("*")) l = sx::binary(Op::Mul, l, s_unary());
      else if (accept("/")) l = sx::binary(Op::Div, l, s_unary());
      else if (accept("%")) l = sx::binary(Op::Mod, l, s_unary());
      else return l;
    }
  }
  ScalarExprPtr s_unary() {
    if (is("-")) {
      if (peek(1).kind == Tok::Int || peek(1).kind == Tok::Real) return sx::lit(literal());
      next();
      return sx::unary(Op::Neg, s_unary());
    }
    if (accept("!")) return sx::unary(Op::Not, s_unary());
    return s_primary();
  }
  ScalarExprPtr s_primary() {
    if (accept("(")) {
      auto e = sexpr();
      expect(")");
      return e;
    }
    const Token& t = cur();
    if (t.kind == Tok::Int || t.kind == Tok::Real || t.kind == Tok::String || is_ident("true") || is_ident("false"))
      return sx::lit(literal());
    if (t.kind == Tok::Ident) {
      std::string name = next().text;
      if (!accept("(")) return sx::var(name);
      std::vector<ScalarExprPtr> args;
      if (!is(")")) do args.push_back(sexpr());
        while (accept(","));
      expect(")");
      return sx::call(name, args);
    }
    fail_here("expected a scalar expression");
  }

  // ---- table expressions
  void check_binary(const std::string& name, const Token& at) {
    if (!opts_.registry || opts_.registry->has_binary(name)) return;
    if (script_)
      for (const auto& d : script_->binaries)
        if (d.name == name) return;
    throw Error(ErrorCode::UnknownFunction, "unknown binary function '" + name + "' at line " +
                                                std::to_string(at.line) + ", column " + std::to_string(at.col));
  }
  void check_flatmap(const std::string& name, const Token& at) {
    if (!opts_.registry || opts_.registry->has_flatmap(name)) return;
    if (script_)
      for (const auto& d : script_->mapfns)
        if (d.name == name) return;
    throw Error(ErrorCode::UnknownFunction, "unknown flatmap '" + name + "' at line " + std::to_string(at.line) +
                                                ", column " + std::to_string(at.col));
  }

  std::string bracket_fn() {
    expect("[");
    const Token& at = cur();
    std::string f = ident("function name");
    check_binary(f, at);
    expect("]");
    return f;
  }

  FnRef fnref() {
    const Token& at = cur();
    FnRef r;
    r.name = ident("function name");
    check_flatmap(r.name, at);
    if (accept("(")) {
      if (!is(")")) do {
          if (cur().kind == Tok::Ident && cur().text != "true" && cur().text != "false")
            r.args.push_back(text_scalar(next().text));
          else
            r.args.push_back(literal());
        } while (accept(","));
      expect(")");
    }
    return r;
  }

  std::vector<Expression> operands(std::size_t n) {
    expect("(");
    std::vector<Expression> v;
    for (std::size_t i = 0; i < n; ++i) {
      if (i) expect(",");
      v.push_back(expr());
    }
    expect(")");
    return v;
  }

  std::vector<Expression> operand_list() {
    expect("(");
    std::vector<Expression> v;
    if (!is(")")) do v.push_back(expr());
      while (accept(","));
    expect(")");
    return v;
  }

  std::vector<std::string> name_list() {
    std::vector<std::string> v;
    if (is("]")) return v;
    do v.push_back(ident("attribute name"));
    while (accept(","));
    return v;
  }

  ExprFnPtr loop_fn() {
    if (accept("(")) {
      std::string p = ident("parameter");
      expect(")");
      expect("=>");
      bool had = bound_.count(p) != 0;
      bound_.insert(p);
      Expression body = expr();
      if (!had) bound_.erase(p);
      std::vector<std::pair<std::string, Expression>> aux;
      while (accept(",")) {
        std::string n = ident("name");
        expect(":=");
        aux.emplace_back(n, expr());
      }
      return ir::fn(p, body, aux);
    }
    const Token& at = cur();
    std::string name = ident("loop function");
    if (script_)
      for (const auto& d : script_->fns)
        if (d.name == name) return d.fn;
    throw Error(ErrorCode::UnknownFunction, "unknown expression function '" + name + "' at line " +
                                                std::to_string(at.line) + ", column " + std::to_string(at.col));
  }

  Expression table_literal() {
    expect("[");
    std::vector<KeyAttr> keys;
    std::vector<ValueAttr> vals;
    if (!is("->")) do {
        KeyAttr k;
        k.name = ident("key attribute");
        expect(":");
        k.kind = kind_name_token();
        keys.push_back(k);
      } while (accept(","));
    expect("->");
    if (!is("]")) do {
        ValueAttr v;
        v.name = ident("value attribute");
        expect(":");
        v.kind = kind_name_token();
        v.default_value = zero_of(v.kind);
        if (accept("=")) v.default_value = coerce_lit(literal(), v.kind);
        vals.push_back(v);
      } while (accept(","));
    expect("]");
    Schema schema(keys, vals);
    TableBuilder b(schema);
    expect("{");
    if (!is("}")) do {
        auto k = tuple(keys.size(), [&](std::size_t i) { return keys[i].kind; });
        expect(":");
        auto v = tuple(vals.size(), [&](std::size_t i) { return vals[i].kind; });
        b.add(k, v);
      } while (accept(","));
    expect("}");
    const Token& at = cur();
    try {
      return ir::lit(b.build());
    } catch (const Error& e) {
      throw SyntaxError(at.line, at.col, e.message());
    }
  }

  template <class KindAt>
  std::vector<Scalar> tuple(std::size_t n, KindAt kind_at) {
    expect("(");
    std::vector<Scalar> out;
    for (std::size_t i = 0; i < n; ++i) {
      if (i) expect(",");
      out.push_back(coerce_lit(literal(), kind_at(i)));
    }
    expect(")");
    return out;
  }

  Scalar coerce_lit(const Scalar& s, Kind k) {
    if (kind_of(s) == k) return s;
    if (k == Kind::Real && kind_of(s) == Kind::Int) return Scalar{static_cast<double>(std::get<std::int64_t>(s))};
    fail_here(std::string("literal does not fit kind ") + kind_name(k));
  }

  Kind kind_name_token() {
    const Token& t = cur();
    std::string k = ident("kind");
    try {
      return parse_kind(k);
    } catch (const Error&) {
      throw SyntaxError(t.line, t.col, "unknown kind '" + k + "'");
    }
  }

  Expression expr() {
    const Token& t = cur();
    if (t.kind == Tok::Int || t.kind == Tok::Real || (is("-") && (peek(1).kind == Tok::Int || peek(1).kind == Tok::Real)))
      return ir::lit(scalar_table(literal()));
    if (accept("(")) {
      Expression e = expr();
      expect(")");
      return e;
    }
    if (t.kind != Tok::Ident) fail_here("expected expression");
    const std::string w = t.text;
    bool call = peek(1).text == "(" && peek(1).kind == Tok::Punct;
    bool bracket = peek(1).text == "[" && peek(1).kind == Tok::Punct;

    if (w == "let" && peek(1).kind == Tok::Ident) {
      next();
      std::string name = ident("name");
      expect("=");
      Expression v = expr();
      if (!is_ident("in")) fail_here("expected 'in'");
      next();
      bool had = bound_.count(name) != 0;
      bound_.insert(name);
      Expression body = expr();
      if (!had) bound_.erase(name);
      return ir::let(name, v, body);
    }
    if (bracket) {
      next();
      if (w == "table") return table_literal();
      if (w == "union" || w == "join" || w == "sjoin") {
        std::string f = bracket_fn();
        auto a = operands(2);
        if (w == "union") return ir::union_(a[0], a[1], f);
        if (w == "join") return ir::join(a[0], a[1], f);
        return ir::sjoin(a[0], a[1], f);
      }
      if (w == "ext" || w == "map") {
        expect("[");
        FnRef f = fnref();
        expect("]");
        auto a = operands(1);
        return w == "ext" ? ir::ext(a[0], f) : ir::map(a[0], f);
      }
      if (w == "select") {
        expect("[");
        ScalarExprPtr p = sexpr();
        expect("]");
        return ir::select(operands(1)[0], p);
      }
      if (w == "project") {
        expect("[");
        std::vector<std::string> attrs;
        if (!is("]")) do attrs.push_back(accept("-") ? "-" + ident("attribute name") : ident("attribute name"));
          while (accept(","));
        expect("]");
        return ir::project(operands(1)[0], attrs);
      }
      if (w == "rename") {
        expect("[");
        std::vector<std::pair<std::string, std::string>> pairs;
        if (!is("]")) do {
            std::string a = ident("attribute name");
            expect("->");
            pairs.emplace_back(a, ident("attribute name"));
          } while (accept(","));
        expect("]");
        return ir::rename(operands(1)[0], pairs);
      }
      if (w == "agg") {
        expect("[");
        const Token& at = cur();
        std::string f = ident("function name");
        check_binary(f, at);
        std::vector<std::string> keys;
        if (accept(";")) keys = name_list();
        expect("]");
        return ir::aggregate(operands(1)[0], f, keys);
      }
      if (w == "iter" || w == "for" || w == "forc") {
        expect("[");
        ExprFnPtr f = loop_fn();
        expect(";");
        if (w == "for") {
          const Token& at = cur();
          std::int64_t n = int_literal();
          expect("]");
          Expression seed = operands(1)[0];
          if (n < 0) throw SyntaxError(at.line, at.col, "loop count must be non-negative");
          return ir::for_n(f, n, seed);
        }
        Expression cond = expr();
        expect("]");
        Expression seed = operands(1)[0];
        return w == "iter" ? ir::iter(f, cond, seed) : ir::for_cond(f, cond, seed);
      }
      if (w == "state_init") {
        expect("[");
        auto names = name_list();
        expect("]");
        auto args = operand_list();
        if (args.size() != names.size()) fail_here("state_init needs one operand per slot");
        return ir::state_init(names, args);
      }
      if (w == "state_get" || w == "state_set") {
        expect("[");
        std::string slot = ident("slot name");
        expect("]");
        if (w == "state_get") return ir::state_get(operands(1)[0], slot);
        auto a = operands(2);
        return ir::state_set(a[0], slot, a[1]);
      }
      fail_here("unknown operator '" + w + "'");
    }
    if (call) {
      if (auto it = binary_rel_ops().find(w); it != binary_rel_ops().end()) {
        next();
        return ir::rel(it->second, operands(2));
      }
      if (w == "sum" || w == "count") {
        next();
        Expression a = operands(1)[0];
        return w == "sum" ? ir::sum(a) : ir::count(a);
      }
    }
    next();
    if (opts_.tables && !bound_.count(w) && !opts_.tables->count(w))
      throw Error(ErrorCode::UnknownTable, "unknown table '" + w + "' at line " + std::to_string(t.line) +
                                               ", column " + std::to_string(t.col));
    return ir::ref(w);
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  const ParseOptions& opts_;
  Script* script_ = nullptr;
  std::set<std::string> bound_;
};

}  // namespace

// ------------------------------------------------------------------ Script

Script parse_script(std::string_view src, const ParseOptions& opts) { return Parser(src, opts).script(); }

Expression parse_expression(std::string_view src) {
  ParseOptions o;
  return Parser(src, o).single_expression();
}

ScalarExprPtr parse_scalar(std::string_view src) {
  ParseOptions o;
  return Parser(src, o).single_scalar();
}

Expression Script::program() const {
  if (!result) fail(ErrorCode::InvalidArgument, "script has no final expression");
  if (lets.empty()) return result;
  if (result->kind == NodeKind::TableRef)
    for (const auto& [n, e] : lets)
      if (n == result->name) return compose_statements(lets, n);
  std::map<std::string, Expression> getters;
  for (const auto& [n, e] : lets) getters[n] = ir::state_get(ir::ref("__state"), n);
  return ir::let("__state", compose_statements(lets, ""), substitute(result, getters));
}

FunctionRegistry Script::registry(const FunctionRegistry& base) const {
  FunctionRegistry r = base;
  for (const auto& d : binaries) r.register_binary(make_binary_from_expr(d.name, d.x, d.y, d.body, d.identity, d.cost));
  for (const auto& d : mapfns) r.register_flatmap(make_value_map(d.name, d.v, d.body, d.cost));
  return r;
}

Environment Script::load_tables(const std::string& base_dir) const {
  Environment env;
  for (const auto& d : loads) {
    std::filesystem::path p(d.path);
    if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
    env[d.name] = load_table_file(p.string());
  }
  return env;
}

std::set<std::string> Script::external_tables() const {
  std::set<std::string> out;
  std::set<std::string> provided;
  for (const auto& d : loads) provided.insert(d.name);
  auto add = [&](const Expression& e) {
    for (const auto& n : free_names(e))
      if (!provided.count(n)) out.insert(n);
  };
  for (const auto& [n, e] : lets) {
    add(e);
    provided.insert(n);
  }
  if (result) add(result);
  return out;
}

}  // namespace iterlara

#include "iterlara/bf.hpp"

#include "iterlara/error.hpp"
#include "iterlara/state.hpp"

namespace iterlara {

namespace {

bool is_op(char c) {
  switch (c) {
    case '>': case '<': case '+': case '-': case '.': case ',': case '[': case ']': return true;
    default: return false;
  }
}

// Builds the loop tree of code[pos..] up to the matching ']'.
std::vector<BFNode> build_tree(const std::string& code, std::size_t& pos) {
  std::vector<BFNode> out;
  while (pos < code.size()) {
    char c = code[pos++];
    if (c == ']') return out;
    BFNode n;
    n.op = c;
    if (c == '[') n.body = build_tree(code, pos);
    out.push_back(std::move(n));
  }
  return out;
}

struct Tape {
  std::vector<std::int64_t> cells{0};
  std::size_t p = 0;
};

class Interpreter {
public:
  Interpreter(const std::vector<std::int64_t>& in, std::uint64_t fuel) : in_(in), fuel_(fuel) {}

  void run(const std::vector<BFNode>& nodes) {
    for (const auto& n : nodes) {
      switch (n.op) {
        case '>':
          if (++mem_.p == mem_.cells.size()) mem_.cells.push_back(0);
          break;
        case '<':
          if (mem_.p == 0) fail(ErrorCode::NegativePointer, "memory pointer moved left of cell 0");
          --mem_.p;
          break;
        case '+': ++mem_.cells[mem_.p]; break;
        case '-':
          if (mem_.cells[mem_.p] == 0) fail(ErrorCode::NegativeCell, "decrement of a zero cell");
          --mem_.cells[mem_.p];
          break;
        case ',': {
          ++pi_;
          mem_.cells[mem_.p] = pi_ <= in_.size() ? in_[pi_ - 1] : 0;
          break;
        }
        case '.': out_.push_back(mem_.cells[mem_.p]); break;
        case '[':
          while (mem_.cells[mem_.p] != 0) {
            if (used_ >= fuel_) fail(ErrorCode::FuelExhausted, "iteration budget of " + std::to_string(fuel_) + " exhausted");
            ++used_;
            run(n.body);
          }
          break;
      }
    }
  }

  std::vector<std::int64_t> output() && { return std::move(out_); }

private:
  const std::vector<std::int64_t>& in_;
  std::uint64_t fuel_;
  std::uint64_t used_ = 0;
  Tape mem_;
  std::size_t pi_ = 0;  // entry 0 is the placeholder, input starts at 1
  std::vector<std::int64_t> out_;
};

Schema cells_schema(const std::string& s) {
  return Schema({{"entry_" + s, Kind::Int}}, {{"val_" + s, Kind::Int, std::int64_t{0}}});
}

AssociativeTable pointer_table(const std::string& s) {
  TableBuilder b(Schema({{"ptr", Kind::Text}, {"entry_" + s, Kind::Int}}, {{"dummy_" + s, Kind::Bool, false}}));
  Scalar key[2] = {text_scalar("P"), Scalar{std::int64_t{0}}};
  Scalar v{true};
  b.add(key, std::span<const Scalar>(&v, 1));
  return b.build();
}

std::int64_t pointer_entry(const AssociativeTable& p, const char* name) {
  if (p.size() != 1) fail(ErrorCode::InvalidArgument, std::string("pointer table ") + name + " does not hold one record");
  return as_int(p.key(0)[1]);
}

using ir::ref;

Expression cell_of(const std::string& p, const std::string& t) { return ir::join(ref(p), ref(t), "pair"); }

// E ⧗_+ π(ext_{const(delta)} PE)
Expression add_to_cell(std::int64_t delta) {
  Expression one = ir::ext(ref("PE"), FnRef{"const", {text_scalar("val_E"), Scalar{delta}}});
  return ir::union_(ref("E"), ir::project(one, {"entry_E", "val_E"}), "plus");
}

// dst := (value at the source pointer moved to dst's pointer) ⧗_+ (dst without that cell)
Expression transfer(const std::string& src_ptr, const std::string& src, const std::string& dst_ptr,
                    const std::string& dst, const std::string& s_suffix, const std::string& d_suffix) {
  Expression v = ir::project(cell_of(src_ptr, src), {"ptr", "val_" + s_suffix});
  v = ir::rename(v, {{"val_" + s_suffix, "val_" + d_suffix}});
  Expression placed = ir::project(ir::join(v, ref(dst_ptr), "pair"), {"entry_" + d_suffix, "val_" + d_suffix});
  Expression rest = ir::rel(RelOp::AntijoinR, {ref(dst_ptr), ref(dst)});
  return ir::union_(placed, rest, "plus");
}

Expression loop_cond() { return ir::project(cell_of("PE", "E"), {"val_E"}); }

void lower_nodes(const std::vector<BFNode>& nodes, std::vector<Stmt>& out) {
  for (const auto& n : nodes) {
    switch (n.op) {
      case '>': out.push_back(Stmt::assign("PE", ir::ext(ref("PE"), FnRef{"inc_key", {text_scalar("entry_E")}}))); break;
      case '<': out.push_back(Stmt::assign("PE", ir::ext(ref("PE"), FnRef{"dec_key", {text_scalar("entry_E")}}))); break;
      case '+': out.push_back(Stmt::assign("E", add_to_cell(1))); break;
      case '-': out.push_back(Stmt::assign("E", ir::map(add_to_cell(-1), FnRef{"check_nonneg", {}}))); break;
      case '.':
        out.push_back(Stmt::assign("PO", ir::ext(ref("PO"), FnRef{"inc_key", {text_scalar("entry_O")}})));
        out.push_back(Stmt::assign("O", transfer("PE", "E", "PO", "O", "E", "O")));
        break;
      case ',':
        out.push_back(Stmt::assign("PI", ir::ext(ref("PI"), FnRef{"inc_key", {text_scalar("entry_I")}})));
        out.push_back(Stmt::assign("E", transfer("PI", "I", "PE", "E", "I", "E")));
        break;
      case '[': {
        std::vector<Stmt> body;
        lower_nodes(n.body, body);
        out.push_back(Stmt::while_loop(loop_cond(), std::move(body)));
        break;
      }
    }
  }
}

}  // namespace

BFProgram parse_bf(std::string_view src) {
  BFProgram p;
  std::vector<std::size_t> open;
  for (std::size_t i = 0; i < src.size(); ++i) {
    char c = src[i];
    if (!is_op(c)) continue;
    if (c == '[') open.push_back(i);
    if (c == ']') {
      if (open.empty()) throw UnbalancedBrackets(i);
      open.pop_back();
    }
    p.code.push_back(c);
  }
  if (!open.empty()) throw UnbalancedBrackets(open.back());
  std::size_t pos = 0;
  p.tree = build_tree(p.code, pos);
  return p;
}

std::vector<std::int64_t> interpret_bf(const BFProgram& p, const std::vector<std::int64_t>& input, std::uint64_t fuel) {
  for (auto x : input)
    if (x < 0) fail(ErrorCode::InvalidArgument, "input values must be non-negative");
  Interpreter in(input, fuel);
  in.run(p.tree);
  return std::move(in).output();
}

MachineEncoding encode_machine(const std::vector<std::int64_t>& input) {
  MachineEncoding m;
  m.E = AssociativeTable(cells_schema("E"));
  m.O = AssociativeTable(cells_schema("O"));
  TableBuilder b(cells_schema("I"));
  for (std::size_t k = 0; k < input.size(); ++k) {
    if (input[k] < 0) fail(ErrorCode::InvalidArgument, "input values must be non-negative");
    Scalar key{static_cast<std::int64_t>(k + 1)}, v{input[k]};
    b.add(std::span<const Scalar>(&key, 1), std::span<const Scalar>(&v, 1));
  }
  m.I = b.build();
  m.PE = pointer_table("E");
  m.PI = pointer_table("I");
  m.PO = pointer_table("O");
  return m;
}

Environment machine_environment(const MachineEncoding& m) {
  return {{"E", m.E}, {"I", m.I}, {"O", m.O}, {"PE", m.PE}, {"PI", m.PI}, {"PO", m.PO}};
}

MachineEncoding machine_from_state(const AssociativeTable& state, const MachineEncoding& initial) {
  StateParts parts = state_parts_of(state);
  MachineEncoding m = initial;
  auto take = [&](const char* name, AssociativeTable& slot) {
    if (const AssociativeTable* t = parts.find(name)) slot = *t;
  };
  take("E", m.E);
  take("I", m.I);
  take("O", m.O);
  take("PE", m.PE);
  take("PI", m.PI);
  take("PO", m.PO);
  return m;
}

std::vector<std::int64_t> decode_output(const MachineEncoding& m) {
  std::int64_t n = pointer_entry(m.PO, "PO");
  std::vector<std::int64_t> out;
  for (std::int64_t e = 1; e <= n; ++e) {
    Scalar k{e};
    out.push_back(as_int(m.O.lookup(std::span<const Scalar>(&k, 1))[0]));
  }
  return out;
}

std::vector<Stmt> bf_statements(const BFProgram& p) {
  std::vector<Stmt> out;
  lower_nodes(p.tree, out);
  return out;
}

Expression compile_bf(const BFProgram& p) { return compose_statements(bf_statements(p), ""); }

std::vector<std::int64_t> run_bf_via_iterlara(const BFProgram& p, const std::vector<std::int64_t>& input,
                                              std::uint64_t fuel) {
  MachineEncoding init = encode_machine(input);
  EvalOptions opts;
  opts.fuel = fuel;
  AssociativeTable state = eval(compile_bf(p), machine_environment(init), opts);
  return decode_output(machine_from_state(state, init));
}

}  // namespace iterlara

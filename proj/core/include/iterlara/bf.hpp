#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "iterlara/compose.hpp"
#include "iterlara/eval.hpp"
#include "iterlara/expr.hpp"
#include "iterlara/table.hpp"

namespace iterlara {

struct BFNode {
  char op = '+';              // one of > < + - . , or '[' for a loop
  std::vector<BFNode> body;   // loop body when op == '['
};

struct BFProgram {
  std::string code;           // operators only, comments stripped
  std::vector<BFNode> tree;
};

// Characters other than the eight operators are comments.
// Throws UnbalancedBrackets with the offending position in `src`.
BFProgram parse_bf(std::string_view src);

// Reference semantics: unbounded non-negative cells, tape grows to the right.
//   ,  advances the input pointer, then copies that input cell (0 past the end)
//   .  advances the output pointer, then writes the current cell there
// Fuel counts loop-body entries. Errors: FuelExhausted, NegativePointer,
// NegativeCell.
std::vector<std::int64_t> interpret_bf(const BFProgram& p, const std::vector<std::int64_t>& input,
                                       std::uint64_t fuel);

// Memory, input and output tables E, I, O ([entry]: val, default 0) and the
// pointer tables PE, PI, PO ([ptr, entry]: dummy) with one record each.
struct MachineEncoding {
  AssociativeTable E, I, O, PE, PI, PO;
};

MachineEncoding encode_machine(const std::vector<std::int64_t>& input);
Environment machine_environment(const MachineEncoding& m);
// Reads the six tables back from a final state table; tables the program
// never assigned keep their value from `initial`.
MachineEncoding machine_from_state(const AssociativeTable& state, const MachineEncoding& initial);
// O entries 1..p_O in order.
std::vector<std::int64_t> decode_output(const MachineEncoding& m);

// Statement form of a program: one assignment per operator, one while-loop
// per bracket pair.
std::vector<Stmt> bf_statements(const BFProgram& p);
// Whole program as one expression over the six tables; evaluates to the
// final state.
Expression compile_bf(const BFProgram& p);

std::vector<std::int64_t> run_bf_via_iterlara(const BFProgram& p, const std::vector<std::int64_t>& input,
                                              std::uint64_t fuel);

}  // namespace iterlara

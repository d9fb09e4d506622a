#pragma once

#include <iosfwd>
#include <string>

#include "iterlara/table.hpp"

namespace iterlara {

// JSON-lines: line 1 is {"keys":[{"name","kind"}...],"values":[{"name","kind","default"}...]},
// every further non-blank line is {"k":[...],"v":[...]}.
AssociativeTable read_table_jsonl(std::istream& in);
void write_table_jsonl(std::ostream& out, const AssociativeTable& t);

// CSV with a two-row header: attribute names, then kinds. Key columns are
// tagged "key:int" / "key:text"; value columns "int", "real=0.5", ... (the
// default follows '=' and is the kind's zero when omitted).
// A file whose first row is entirely numeric is read as a dense matrix
// [[i,j]:v] (int when every entry is integral, real otherwise).
AssociativeTable read_table_csv(std::istream& in);
void write_table_csv(std::ostream& out, const AssociativeTable& t);

// Dispatches on extension: .csv -> CSV, anything else -> JSON-lines.
AssociativeTable load_table_file(const std::string& path);
void save_table_file(const std::string& path, const AssociativeTable& t);

// Aligned text layout: key columns, a bar, value columns.
std::string format_table(const AssociativeTable& t);
// One JSON document {"keys":..,"values":..,"records":[{"k":..,"v":..}]}.
std::string table_to_json(const AssociativeTable& t);

}  // namespace iterlara

#pragma once

#include <string>
#include <utility>
#include <vector>

#include "iterlara/table.hpp"

namespace iterlara {

// A multi-table loop state. Its flat (table) form is a tagged union of the
// slots with attributes renamed apart:
//   keys   slot:text, <s>.<key>... for every slot s
//   values <s>.<value>... for every slot s
// A record of slot s fills the other slots' keys with 0 / "" and their
// values with defaults. The engine keeps the slots separately and builds
// the flat rows only when something reads the state as an ordinary table.
struct StateParts {
  std::vector<std::pair<std::string, AssociativeTable>> slots;  // sorted by name

  const AssociativeTable* find(const std::string& name) const;
};

// Slot names must be non-empty and distinct; order does not matter.
AssociativeTable state_init(std::vector<std::pair<std::string, AssociativeTable>> slots);
// Throws UnknownName when the slot is absent.
AssociativeTable state_get(const AssociativeTable& state, const std::string& slot);
// Replaces (or adds) a slot.
AssociativeTable state_set(const AssociativeTable& state, const std::string& slot, AssociativeTable value);
// Slot tables of a state, recovering them from the flat form when needed.
StateParts state_parts_of(const AssociativeTable& state);

}  // namespace iterlara

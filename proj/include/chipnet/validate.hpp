#pragma once

#include <string>
#include <vector>

#include "chipnet/model.hpp"

namespace chipnet {

enum class InputKind { chiplets, placement, topology, packaging, routing_table, traffic, trace, technology, simulator };

const char* to_string(InputKind kind);

struct Violation {
    InputKind kind;
    int index;  // element index within that input, -1 for the document as a whole
    std::string message;
    bool operator==(const Violation&) const = default;
};

using ValidationReport = std::vector<Violation>;

// Checks every invariant of the input model, including cross-references
// between documents. An empty report means the bundle is valid.
ValidationReport validate(const DesignBundle& bundle);

std::string format_violation(const Violation& v);

}  // namespace chipnet

#pragma once

#include <stdexcept>
#include <string>

namespace diophlab {

// Raised when a request is structurally valid but the parameters make the
// computation meaningless (e.g. a weight support that lets the log argument
// of an oscillating sum go nonpositive). The message names the offending
// quantity so configs can be fixed without reading source.
struct config_error : std::runtime_error {
    explicit config_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Raised by the config loader and the schedule mini-language on malformed
// input; the message carries the field or the position inside the expression.
struct parse_error : std::runtime_error {
    explicit parse_error(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace diophlab

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "roe/scenario.hpp"

namespace roe {

struct Diagnostic {
  enum class Severity { Error, Violation, Info };
  Severity severity = Severity::Error;
  std::string code;  // e.g. SYNTAX_ERROR, UNKNOWN_REFERENCE
  int line = 0;      // 1-based; 0 when not tied to a position
  int column = 0;
  std::string message;
};

struct ParseResult {
  std::optional<Scenario> scenario;
  std::vector<Diagnostic> diagnostics;
  bool ok() const { return scenario.has_value(); }
};

// Parses scenario text. Never throws: either `scenario` is set or
// `diagnostics` holds the error (SYNTAX_ERROR, UNKNOWN_REFERENCE,
// NEGATIVE_RATE or BAD_NORMALIZATION) with its position.
ParseResult parse_scenario(const std::string& text);

// Same, but raises SimError carrying the diagnostic code.
Scenario parse_scenario_or_throw(const std::string& text);

// Canonical text form; parse(format_scenario(s)) reproduces s exactly.
std::string format_scenario(const Scenario& s);

// Structural lint of a parsed scenario. Violations flag declarations that
// break the selection rules (a physiological interaction must not mint a
// conscious state out of nowhere); Info entries report which edges the
// anomalous-capture filter would drop and components that can never carry
// weight. Never fails.
std::vector<Diagnostic> validate(const Scenario& s);

// Shipped scenario library. builtin() throws UNKNOWN_SCENARIO.
const std::vector<std::string>& catalog_names();
const std::string& builtin_text(const std::string& name);
Scenario builtin(const std::string& name);

// Shortest decimal form that parses back to the same double.
std::string format_double(double v);

}  // namespace roe

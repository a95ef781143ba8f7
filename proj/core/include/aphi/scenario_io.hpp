#pragma once

// Scenario files.
//
// Line oriented, a small subset of TOML:
//
//   # comment
//   key = value              root keys
//   [section]                following keys belong to the section
//   [[target]]               one waypoint per block (t, q)
//
// Values are "strings", true/false, numbers or [a, b, ...] arrays of numbers.
// Numbers accept inf/-inf and a `deg` suffix (converted to radians). Six
// element gain vectors also take a single number for all axes. SI units
// throughout.
//
// `scenario = "<preset>"` starts from a built-in scenario; every other key
// overrides it. Any [[target]] block replaces the preset's schedule. The
// environment sections (wall, plug, cart, wind) exist once they appear and
// are removed with `enabled = false`.

#include <filesystem>
#include <string>
#include <string_view>

#include "aphi/sim_engine.hpp"

namespace aphi {

/// Malformed input. `line` is 1-based (0 when not tied to a line).
class ParseError : public Error {
 public:
  ParseError(const std::string& origin, int line, std::string key,
             const std::string& what);

  int line() const { return line_; }
  const std::string& key() const { return key_; }

 private:
  int line_;
  std::string key_;
};

/// Parses, applies defaults and validates. Throws ParseError or
/// ValidationError.
Scenario parse_scenario(std::string_view text,
                        const std::string& origin = "<string>");

Scenario load_scenario(const std::filesystem::path& path);

/// Fully explicit text that parses back to an equal Scenario.
std::string serialize_scenario(const Scenario& scenario);

}  // namespace aphi

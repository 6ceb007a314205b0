#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "cfmargin/scenario.hpp"

namespace cfmargin {

/// Canonical float formatting used by every writer: %.9g (9 significant
/// digits, shortest form). Values written this way reparse bit-exactly.
/// Non-finite input is rejected.
std::string format_double(double v);

/// Malformed syntax: bad tokens, bad numbers, broken XML.
struct ParseError : std::runtime_error {
  ParseError(int line_, int offset_, const std::string& msg);
  int line;    // 1-based
  int offset;  // 1-based column
};

/// Well-formed input that violates an invariant. `element` names the
/// offending record ("lanelet 'ramp'", "agent 'ego'").
struct SemanticError : std::runtime_error {
  SemanticError(std::string element_, const std::string& msg);
  std::string element;
};

enum class ScenarioFormat { Native, CommonRoadXmlSubset };

/// Parses a scenario from text. The CommonRoad reader covers the lanelet /
/// obstacle / initialState subset; unknown elements are skipped and reported
/// through `warnings` when given. Never crashes on arbitrary bytes: all
/// failures surface as ParseError or SemanticError.
ScenarioFile parse_scenario(const std::string& text, ScenarioFormat format,
                            std::vector<std::string>* warnings = nullptr);

/// Reads a scenario file, sniffing the format from its content
/// (native header vs leading '<').
ScenarioFile load_scenario(const std::string& path, std::vector<std::string>* warnings = nullptr);

/// Serializes to the native format (cfmargin_scenario_v1). Writing the
/// CommonRoad XML format is not supported.
std::string write_scenario(const ScenarioFile& sc);
void save_scenario(const ScenarioFile& sc, const std::string& path);

/// Invariant check shared by both parsers; throws SemanticError.
void validate_scenario(const ScenarioFile& sc);

/// Episode log round-trip (cfmargin_episode_v1). One state record per
/// (step, agent); serialize-then-parse is the identity and the serialized
/// form is a byte-exact fixed point.
Episode parse_episode(const std::string& text);
std::string write_episode(const Episode& e);
Episode load_episode(const std::string& path);
void save_episode(const Episode& e, const std::string& path);

}  // namespace cfmargin

#pragma once

#include <string>
#include <string_view>

#include "scengraph/model.hpp"

namespace scengraph {

inline constexpr std::string_view kFormatVersion = "1";

/// Canonical scenario document: JSON, 2-space indent, fixed key order,
/// trailing newline. serialize is byte-deterministic.
std::string serialize(const ScenarioGraph& g);

/// Parses a scenario document. Malformed JSON raises ParseError (with
/// line/column); structural violations raise SchemaError with a field path.
ScenarioGraph parse(std::string_view text, const Registry& reg = Registry::builtin());

std::string serialize_module(const ModuleDef& def);
ModuleDef parse_module(std::string_view text, const Registry& reg = Registry::builtin());

/// Canonical compact encoding of a definition without its revision field;
/// the revision is derived from this.
std::string module_content(const ModuleDef& def);

std::string read_text_file(const std::string& path);   // IoError/NotFound
void write_text_file(const std::string& path, std::string_view text);

}  // namespace scengraph

#pragma once

/// @file config.hpp
/// JSON scenario configuration: strict parsing with field-path errors,
/// canonical serialization (stable key order, all defaults made explicit),
/// bundled presets, and the git-style content hash used by run manifests.

#include <string>
#include <vector>

#include "bastion/sim.hpp"

namespace bastion {

/// Parse a config from a JSON document. Unknown keys are rejected with their
/// path; defaults are applied; every cross-field invariant is validated.
ScenarioConfig parse_config_text(const std::string& json_text);

/// Resolve `path_or_preset` as a file first, then as a bundled preset name
/// (with or without the .json suffix). Applies the BASTION_SEED environment
/// override to the grid seed when set.
ScenarioConfig parse_config(const std::string& path_or_preset);

/// Canonical JSON form: round-trips through parse_config_text to an
/// identical config and an identical string.
std::string serialize_config(const ScenarioConfig& cfg);

/// Names of the bundled presets.
std::vector<std::string> preset_names();

/// Raw JSON text of a bundled preset; throws ConfigError for unknown names.
std::string preset_text(const std::string& name);

/// SHA-1 of the git blob preimage ("blob <len>\0" + content), hex encoded;
/// equals `git hash-object` on a file with exactly these bytes.
std::string git_blob_hash(const std::string& content);

}  // namespace bastion

#pragma once

#include <string>
#include <string_view>

#include "autosd/trace_model.hpp"

namespace autosd {

inline constexpr std::string_view kSessionSchema = "autosd-session/1";

/// Canonical session document (pretty-printed JSON with fixed key order, see
/// docs/session-format.md). Byte-identical for equal sessions.
std::string serialize_session(const RepairSession& session);

/// Parses and validates; throws SchemaError carrying the JSON path of the bad field.
RepairSession deserialize_session(std::string_view document);

}  // namespace autosd

#pragma once

#include <string>

#include <json.hpp>

namespace concircle {

/// Deterministic JSON rendering: object keys sorted (nlohmann's default
/// ordered map), floats as %.12e, integers verbatim, two-space indent,
/// LF line endings. Byte-stable across runs and platforms.
std::string canonical_json(const nlohmann::json& j);

} // namespace concircle

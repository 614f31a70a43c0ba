#pragma once

#include <string>

#include "ooprompt/gateway.hpp"

namespace ooprompt::mock {

/// Built-in per-role fallback used by MockAssistant when no fixture matches the digest.
/// Deterministic keyword heuristics over the payload; never consults the clock or RNG.
Json fallback_output(AssistantRole role, const Json& input, const std::string& digest);

}  // namespace ooprompt::mock

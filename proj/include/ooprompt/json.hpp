#pragma once

#include <json.hpp>

namespace ooprompt {

// Insertion-ordered so every document we emit has a fixed, documented key order.
using Json = nlohmann::ordered_json;

}  // namespace ooprompt

#pragma once

// JSON documents for games, strategy profiles, decision instances and
// verdicts. Writers emit keys in a fixed order so equal values serialize to
// equal bytes; readers are strict and report the path of a bad field.

#include <string>

#include "collusion/complexity.hpp"
#include "collusion/io/json_reader.hpp"
#include "collusion/market.hpp"
#include "collusion/profile.hpp"

namespace collusion::io {

OrderedJson game_to_json(const MarketGame& game);
MarketGame game_from_json(const Json& value, const std::string& path = "game");

OrderedJson matrix_to_json(const FirmProductMatrix& m);
FirmProductMatrix matrix_from_json(const Json& value, const std::string& path);

OrderedJson profile_to_json(const StrategyProfile& profile);
StrategyProfile profile_from_json(const Json& value, const std::string& path = "profile");

OrderedJson instance_to_json(const DecisionInstance& instance);
DecisionInstance instance_from_json(const Json& value, const std::string& path = "instance");

OrderedJson verdict_to_json(const Verdict& verdict);

OrderedJson budget_to_json(const CapacityBudget& budget);
// A nonnegative integer or the string "unlimited".
CapacityBudget budget_from_json(const Json& value, const std::string& path);

// Parses text as JSON, turning syntax errors into ValidationError.
Json parse_json(const std::string& text, const std::string& source);

}  // namespace collusion::io

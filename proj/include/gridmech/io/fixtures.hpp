#pragma once

#include <json.hpp>
#include <string>

#include "gridmech/markets/system_data.hpp"

namespace gridmech::io {

class FixtureError : public std::runtime_error {
 public:
  explicit FixtureError(const std::string& what) : std::runtime_error(what) {}
};

/// Strict loaders: unknown fields are rejected, schema tags are checked.
markets::SystemData load_system(const std::string& path);
void load_scenarios(const std::string& path, markets::SystemData& sys);
markets::TransmissionShares load_shares(const std::string& path,
                                        const markets::SystemData& sys);

nlohmann::json read_json(const std::string& path);

}  // namespace gridmech::io

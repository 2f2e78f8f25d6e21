// Registry of Monte Carlo verification entries. Each entry runs with its own
// fixed budget on a caller-supplied root system and returns a JSON-ready
// record with statistics, tolerances, verdict and the seeds that reproduce it.

#ifndef HOPROC_VERIFY_HPP_
#define HOPROC_VERIFY_HPP_

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "hoproc/root_algebra.hpp"

namespace hop {

struct RegistryEntry {
  std::string id;
  std::string anchor;  // one-line statement of the property checked
  std::string budget;  // human-readable default budget
};

const std::vector<RegistryEntry>& verification_registry();
const RegistryEntry* find_entry(std::string_view id);

struct VerifyOptions {
  std::uint64_t seed = 20240611;
  std::size_t workers = 0;
  // Multiplies every path count (rounded, at least 10); 1 is the documented budget.
  double budget_scale = 1.0;
};

struct VerificationEntry {
  std::string id;
  std::string anchor;
  nlohmann::json statistics = nlohmann::json::object();
  nlohmann::json tolerance = nlohmann::json::object();
  bool pass = false;
  bool skipped = false;
  std::string reason;  // why skipped
  nlohmann::json seeds = nlohmann::json::array();
  double seconds = 0.0;
};

nlohmann::json to_json(const VerificationEntry& e);

// Throws std::invalid_argument for an unknown id. Infeasible requests
// produce skipped entries.
VerificationEntry run_entry(std::string_view id, const RootSystem& model,
                            const VerifyOptions& options);

// Every entry's anchor equals the registry text for its id.
bool audit_anchors(const nlohmann::json& entries);

}  // namespace hop

#endif

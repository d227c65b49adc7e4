#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include <json.hpp>

#include "betalab/dos.hpp"
#include "betalab/equilibrium.hpp"
#include "betalab/measures.hpp"
#include "betalab/rates.hpp"
#include "betalab/sampler.hpp"

namespace betalab {

using Json = nlohmann::ordered_json;

/// Shortest decimal form that parses back to the same double.
std::string format_double(double x);

/// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view data);
std::string hex64(std::uint64_t h);

/// Writes to a temporary sibling, then renames over the target.
void write_atomic(const std::filesystem::path& path, std::string_view content);
std::string read_file(const std::filesystem::path& path);

// Measures. Atomic: header "position,weight"; grid: "position,density" at the nodes.
std::string measure_to_csv(const Measure& mu);
Measure measure_from_csv(std::string_view text);
Json measure_to_json(const Measure& mu);
Measure measure_from_json(const Json& j);

Json equilibrium_to_json(const EquilibriumResult& eq, const Potential& v);
/// Columns x, density (closed-form density at the grid nodes).
std::string equilibrium_density_csv(const EquilibriumResult& eq);

/// Header "index,eigenvalue".
std::string sample_to_csv(const SpectrumSample& s);
Json sample_to_json(const SpectrumSample& s);
SpectrumSample sample_from_files(std::string_view csv, const Json& sidecar);

Json rate_to_json(const RateEvaluation& r, std::string_view inputs_hash);

}  // namespace betalab

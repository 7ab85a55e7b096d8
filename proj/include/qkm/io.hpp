#pragma once

// Input parsing and output files. Inputs skip blank and '#' lines. CSV
// outputs start with a "# config: {...}" line; JSON summaries carry the same
// object under "config".

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "qkm/exact.hpp"
#include "qkm/kmeans.hpp"
#include "qkm/oracle.hpp"
#include "qkm/sim.hpp"

namespace qkm {

using Json = nlohmann::json;

/// Parses a token such as "7", "-3/4" or "2.25" exactly.
Fraction parse_number(std::string_view token, std::size_t line = 0);

/// One vector per line, all of the same dimension. Each token is multiplied
/// by scale and rounded to the nearest integer (halves away from zero).
std::vector<IntVector> parse_observations(std::string_view text, std::int64_t scale = 1);

/// k lines of d rational tokens, each multiplied by scale exactly.
CentroidSet parse_centroids(std::string_view text, std::int64_t scale = 1);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

Json fractions_json(const FractionVector& v);
Json config_json(const ExperimentConfig& config);

std::string consensus_trace_csv(const ConsensusTrace& trace, const Json& config);
Json consensus_summary(const ConsensusTrace& trace, const Json& config);

std::string kmeans_trace_csv(const KMeansTrace& trace, const Json& config);
std::string objective_csv(const KMeansTrace& trace, const Json& config);
std::string trajectories_csv(const KMeansTrace& trace, const Json& config);
std::string assignments_csv(const KMeansTrace& trace, const Json& config);
std::string messages_csv(const std::vector<MessageLogEntry>& log, const Json& config);
Json kmeans_summary(const KMeansTrace& trace, const Json& config,
                    const std::optional<EquivalenceReport>& equivalence = std::nullopt);

std::string sweep_runs_csv(const SweepResult& result, const Json& config);
std::string histogram_csv(const SweepResult& result, const Json& config);
std::string mean_objective_csv(const SweepResult& result, const Json& config);
Json sweep_summary(const SweepResult& result, const Json& config);

/// Pretty JSON with a trailing newline.
std::string dump(const Json& j);

}  // namespace qkm

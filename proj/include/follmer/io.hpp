#pragma once

#include "follmer/common.hpp"
#include "follmer/flow.hpp"
#include "follmer/measures.hpp"
#include "follmer/sample_set.hpp"

#include <json.hpp>

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

namespace follmer {

using Json = nlohmann::ordered_json;

enum class OutputFormat { Csv, Json };

std::string to_string(OutputFormat f);
OutputFormat parse_output_format(const std::string& s);

// Shortest round-trip decimal form ("inf", "-inf", "nan" for non-finite values).
std::string format_double(double x);

// JSON number, or the format_double string for non-finite values.
Json json_number(double x);
Json json_vector(const Vector& v);

Json mixture_to_json(const GaussianMixture& m);
// Strict: keys dim, sigma, weights, centers; nothing else.
GaussianMixture mixture_from_json(const Json& j);

// FNV-1a over the shortest-form text of dim, sigma, weights and centers, as 16 hex digits.
std::string target_hash(const GaussianMixture& m);

struct SampleHeader {
    std::uint64_t seed = 0;
    int steps = 0;
    std::string method;
    std::string scheme;
    std::string target_hash;
};

// CSV: one "# key=value,..." metadata line, then a header row x0,...,x{d-1}.
// JSON: an object with the header fields and a "samples" array of rows.
void write_samples(std::ostream& os, const SampleSet& s, const SampleHeader& header, OutputFormat format);

struct TrajectoryRecord {
    std::uint64_t particle_id = 0;
    const Trajectory* trajectory = nullptr;
};

// One record per (particle, node) with fields seed, particle_id, t, x, opnorm.
// CSV columns: seed,particle_id,t,x0..x{d-1},opnorm. JSON: one object per line.
void write_trajectories(std::ostream& os, std::uint64_t seed, const std::vector<TrajectoryRecord>& records,
                        OutputFormat format);

} // namespace follmer

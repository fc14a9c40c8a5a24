#pragma once

#include <iosfwd>
#include <string>
#include <string_view>

#include "hmmdiag/model.hpp"

namespace hmmdiag {

/// Reads the JSON model document (n_states, n_symbols, transition, emission,
/// initial). Throws ParseError for malformed text, missing fields, wrong
/// types or shapes; throws ValidationError when the parameters are not
/// stochastic.
HmmModel parse_model(std::string_view text);
HmmModel read_model_file(const std::string& path);

/// Shortest round-trip decimal for every entry, one matrix row per line.
std::string serialize_model(const HmmModel& model);
void write_model_file(const std::string& path, const HmmModel& model);

/// Whitespace- or comma-separated zero-based symbol indices.
ObservationSequence parse_observations(std::string_view text);
ObservationSequence read_observation_file(const std::string& path);

/// Reads a whole file; throws IoError naming the path on failure.
std::string read_text_file(const std::string& path);

}  // namespace hmmdiag

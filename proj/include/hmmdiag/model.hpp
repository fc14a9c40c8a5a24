#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "hmmdiag/matrix.hpp"

namespace hmmdiag {

/// Discrete HMM parameters (A, B, pi). Symbols and states are zero-based.
struct HmmModel {
  std::size_t n_states = 0;
  std::size_t n_symbols = 0;
  Matrix transition;            // N x N, a_ij
  Matrix emission;              // N x M, b_j(k)
  std::vector<double> initial;  // N

  friend bool operator==(const HmmModel&, const HmmModel&) = default;
};

using Symbol = std::uint32_t;

/// o_1 ... o_T as zero-based symbol indices.
class ObservationSequence {
 public:
  ObservationSequence() = default;
  explicit ObservationSequence(std::vector<Symbol> symbols)
      : symbols_(std::move(symbols)) {}

  std::size_t size() const { return symbols_.size(); }
  bool empty() const { return symbols_.empty(); }
  Symbol operator[](std::size_t t) const { return symbols_[t]; }
  const std::vector<Symbol>& symbols() const { return symbols_; }
  auto begin() const { return symbols_.begin(); }
  auto end() const { return symbols_.end(); }

  /// Throws DimensionError if empty or if any symbol is >= n_symbols.
  void check_against(std::size_t n_symbols) const;

  friend bool operator==(const ObservationSequence&, const ObservationSequence&) = default;

 private:
  std::vector<Symbol> symbols_;
};

struct Run {
  Symbol symbol = 0;
  std::size_t count = 0;
  friend bool operator==(const Run&, const Run&) = default;
};

/// Maximal runs in encounter order. Adjacent runs never share a symbol.
struct RunLengthSequence {
  std::vector<Run> runs;

  std::size_t total_length() const;
  ObservationSequence decode() const;

  friend bool operator==(const RunLengthSequence&, const RunLengthSequence&) = default;
};

RunLengthSequence run_length_encode(std::span<const Symbol> symbols);
inline RunLengthSequence run_length_encode(const ObservationSequence& obs) {
  return run_length_encode(std::span<const Symbol>(obs.symbols()));
}

inline constexpr double kStochasticTolerance = 1e-12;

struct Violation {
  std::string location;     // e.g. "A row 0", "B[0][1]", "pi"
  std::string description;  // e.g. "row 0 sums to 1.1"
  double measured = 0.0;
};

struct ValidationReport {
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
};

/// Checks entry ranges and row sums at kStochasticTolerance.
/// Throws DimensionError when the matrices do not match n_states/n_symbols.
ValidationReport validate_model(const HmmModel& model);

/// Thrown for a syntactically valid model whose parameters violate the
/// stochastic invariants.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(ValidationReport report);
  const ValidationReport& report() const noexcept { return report_; }

 private:
  ValidationReport report_;
};

/// validate_model, throwing ValidationError on any violation.
void require_valid(const HmmModel& model);

/// Deterministic random model.
///
/// Draws come from std::mt19937_64 seeded with `seed`; each 64-bit output x
/// maps to ((x >> 11) + 0.5) * 2^-53, a value strictly inside (0, 1). Rows
/// are filled in the order transition rows, emission rows, initial vector,
/// each row left to right, and every row is divided by its sum.
HmmModel gen_random_model(std::size_t n_states, std::size_t n_symbols,
                          std::uint64_t seed);

/// Uniform random symbols drawn with the same generator mapping.
ObservationSequence gen_random_sequence(std::size_t n_symbols, std::size_t length,
                                        std::uint64_t seed);

std::string describe(const ValidationReport& report);

}  // namespace hmmdiag

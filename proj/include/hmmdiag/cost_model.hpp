#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "hmmdiag/evaluators.hpp"
#include "hmmdiag/model.hpp"
#include "hmmdiag/op_counter.hpp"

namespace hmmdiag {

/// Direct enumeration: (2T-1) N^T multiplications, N^T - 1 additions.
/// Throws CountOverflowError when the counts do not fit in 64 bits.
OpCount cost_direct(std::size_t n_states, std::size_t seq_len);

/// Diagonalization method with per-symbol exponents l_k:
///   multiplications N + N^2 + sum_k N max(0, l_k - 1) + N^3 (M - 1)
///   additions       N^2 (N - 1) M + (N^2 - 1)
/// Throws DimensionError unless run_lengths has exactly M entries.
OpCount cost_proposed(std::size_t n_states, std::size_t n_symbols,
                      std::span<const std::size_t> run_lengths);

/// Occurrences of each symbol among o_2..o_T (length M, sums to T - 1).
std::vector<std::size_t> symbol_run_lengths(const ObservationSequence& obs,
                                            std::size_t n_symbols);

/// T - 1 split over M symbols as evenly as possible, larger shares first.
std::vector<std::size_t> balanced_run_lengths(std::size_t n_symbols, std::size_t seq_len);

/// Smallest T in [1, max_len] for which the balanced proposed multiplication
/// count is strictly below the direct one.
std::optional<std::size_t> crossover_length(std::size_t n_states, std::size_t n_symbols,
                                            std::size_t max_len = 4096);

struct CostReport {
  Method method = Method::forward;
  std::optional<OpCount> formula;
  OpCount measured;
  /// Set only where the formula is declared exact (direct).
  std::optional<bool> match;
  /// measured / formula multiplications, when a formula exists.
  std::optional<double> mult_ratio;
};

/// One report per measured method, ordered direct, forward, chain, diag.
/// Direct asserts formula == measured; diag shows the formula for comparison
/// only; forward and chain carry measurements alone. A direct formula that
/// overflows is left empty.
std::vector<CostReport> compare_costs(std::size_t n_states, std::size_t n_symbols,
                                      const ObservationSequence& obs,
                                      const std::map<Method, OpCount>& measured);

}  // namespace hmmdiag

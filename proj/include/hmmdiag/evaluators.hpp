#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "hmmdiag/linalg.hpp"
#include "hmmdiag/model.hpp"
#include "hmmdiag/op_counter.hpp"

namespace hmmdiag {

enum class Method { direct, forward, chain, diag_power };

/// "direct", "forward", "chain", "diag".
std::string_view method_name(Method m);
std::optional<Method> parse_method(std::string_view name);

/// Per-symbol step operators A_k[i][j] = a_ij * b_j(k) with their cached
/// eigen-factorizations. A missing factorization marks a defective A_k.
struct ScaledMatrixSet {
  std::vector<Matrix> matrices;
  std::vector<std::optional<DiagFactorization>> factorizations;
  /// Column-scaling cost of building the matrices, N^2 multiplications per k.
  OpCount construction_cost;

  std::size_t n_symbols() const { return matrices.size(); }
};

/// Scales column j of the transition matrix by b_j(k).
Matrix scaled_matrix(const HmmModel& model, Symbol k, OpCounter& counter);

/// Throws ConvergenceError (annotated with the symbol) when an eigensolve
/// fails.
ScaledMatrixSet build_scaled_set(const HmmModel& model);

/// pi_i * b_i(o1), N multiplications.
std::vector<double> initial_vector(const HmmModel& model, Symbol o1, OpCounter& counter);

struct Diagnostics {
  double max_imaginary_residue = 0.0;
  /// Symbols whose runs were powered by repeated multiplication.
  std::vector<Symbol> fallbacks_used;
  /// Set when the probability is below the smallest positive normal double.
  bool underflow = false;
};

struct EvaluationResult {
  double probability = 0.0;
  double log_probability = 0.0;
  Method method = Method::forward;
  /// Operations tallied by this evaluation alone.
  OpCount counts;
  Diagnostics diagnostics;
};

/// Sequence-steps (N^T * T) the direct method may enumerate by default.
inline constexpr std::uint64_t kDefaultEnumerationCap = 100'000'000;

/// Sequence-steps direct enumeration needs for (N, T); saturates at +inf.
double direct_enumeration_steps(std::size_t n_states, std::size_t seq_len);

/// Sum over all N^T hidden state sequences. Tallies exactly (2T-1) N^T
/// multiplications and N^T - 1 additions. Throws CapExceededError when
/// N^T * T exceeds `cap`.
EvaluationResult eval_direct(const HmmModel& model, const ObservationSequence& obs,
                             OpCounter& counter,
                             std::uint64_t cap = kDefaultEnumerationCap);

/// Forward recursion with per-step rescaling. The log-likelihood is always
/// finite for a positive probability; when the probability is below the
/// smallest normal double it is reported as 0 with the underflow flag set.
EvaluationResult eval_forward(const HmmModel& model, const ObservationSequence& obs,
                              OpCounter& counter);

/// Left-to-right row vector times A_{o_2} ... A_{o_T}, then sum of entries.
EvaluationResult eval_chain(const HmmModel& model, const ObservationSequence& obs,
                            OpCounter& counter);

/// Product of run powers A_v^l over the maximal runs of o_2..o_T (encounter
/// order), each power taken through the cached factorization. Defective
/// matrices, and powers whose imaginary residue is too large, fall back to
/// repeated multiplication and are listed in the diagnostics.
EvaluationResult eval_diag_power(const HmmModel& model, const ObservationSequence& obs,
                                 OpCounter& counter, const ScaledMatrixSet& set);

/// Dispatches on `method`. `set` is required for Method::diag_power.
EvaluationResult evaluate(Method method, const HmmModel& model,
                          const ObservationSequence& obs, OpCounter& counter,
                          const ScaledMatrixSet* set = nullptr,
                          std::uint64_t cap = kDefaultEnumerationCap);

}  // namespace hmmdiag

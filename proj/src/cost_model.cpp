#include "hmmdiag/cost_model.hpp"

#include <string>

namespace hmmdiag {

namespace {

std::uint64_t checked_mul(std::uint64_t a, std::uint64_t b, const char* what) {
  std::uint64_t out;
  if (__builtin_mul_overflow(a, b, &out)) {
    throw CountOverflowError(std::string(what) + " exceeds 2^64 - 1");
  }
  return out;
}

std::uint64_t checked_add(std::uint64_t a, std::uint64_t b, const char* what) {
  std::uint64_t out;
  if (__builtin_add_overflow(a, b, &out)) {
    throw CountOverflowError(std::string(what) + " exceeds 2^64 - 1");
  }
  return out;
}

}  // namespace

OpCount cost_direct(std::size_t n_states, std::size_t seq_len) {
  if (n_states == 0 || seq_len == 0) {
    throw DimensionError("cost_direct: N and T must be positive");
  }
  std::uint64_t sequences = 1;
  for (std::size_t t = 0; t < seq_len; ++t) {
    if (__builtin_mul_overflow(sequences, n_states, &sequences)) {
      throw CountOverflowError("N^T overflows 64 bits for N=" + std::to_string(n_states) +
                               ", T=" + std::to_string(seq_len));
    }
  }
  const std::uint64_t per_sequence = checked_mul(2, seq_len, "2T") - 1;
  return {checked_mul(per_sequence, sequences, "(2T-1) N^T"), sequences - 1};
}

OpCount cost_proposed(std::size_t n_states, std::size_t n_symbols,
                      std::span<const std::size_t> run_lengths) {
  if (n_states == 0 || n_symbols == 0) {
    throw DimensionError("cost_proposed: N and M must be positive");
  }
  if (run_lengths.size() != n_symbols) {
    throw DimensionError("cost_proposed: " + std::to_string(run_lengths.size()) +
                         " run lengths for M=" + std::to_string(n_symbols));
  }
  const std::uint64_t n = n_states, m = n_symbols;
  const std::uint64_t n2 = checked_mul(n, n, "N^2");
  const std::uint64_t n3 = checked_mul(n2, n, "N^3");

  std::uint64_t diag_powers = 0;
  for (std::size_t l : run_lengths) {
    if (l > 1) diag_powers = checked_add(diag_powers, checked_mul(n, l - 1, "N(l-1)"), "sum N(l-1)");
  }
  std::uint64_t mults = checked_add(n, n2, "N + N^2");
  mults = checked_add(mults, diag_powers, "multiplications");
  mults = checked_add(mults, checked_mul(n3, m - 1, "N^3(M-1)"), "multiplications");

  const std::uint64_t adds =
      checked_add(checked_mul(checked_mul(n2, n - 1, "N^2(N-1)"), m, "N^2(N-1)M"), n2 - 1,
                  "additions");
  return {mults, adds};
}

std::vector<std::size_t> symbol_run_lengths(const ObservationSequence& obs,
                                            std::size_t n_symbols) {
  std::vector<std::size_t> out(n_symbols, 0);
  for (std::size_t t = 1; t < obs.size(); ++t) {
    if (obs[t] >= n_symbols) throw DimensionError("symbol_run_lengths: symbol out of range");
    ++out[obs[t]];
  }
  return out;
}

std::vector<std::size_t> balanced_run_lengths(std::size_t n_symbols, std::size_t seq_len) {
  if (n_symbols == 0 || seq_len == 0) {
    throw DimensionError("balanced_run_lengths: M and T must be positive");
  }
  const std::size_t steps = seq_len - 1;
  std::vector<std::size_t> out(n_symbols, steps / n_symbols);
  for (std::size_t k = 0; k < steps % n_symbols; ++k) ++out[k];
  return out;
}

std::optional<std::size_t> crossover_length(std::size_t n_states, std::size_t n_symbols,
                                            std::size_t max_len) {
  for (std::size_t t = 1; t <= max_len; ++t) {
    const auto l = balanced_run_lengths(n_symbols, t);
    const OpCount proposed = cost_proposed(n_states, n_symbols, l);
    try {
      if (proposed.multiplications < cost_direct(n_states, t).multiplications) return t;
    } catch (const CountOverflowError&) {
      return t;  // direct no longer even fits in 64 bits
    }
  }
  return std::nullopt;
}

std::vector<CostReport> compare_costs(std::size_t n_states, std::size_t n_symbols,
                                      const ObservationSequence& obs,
                                      const std::map<Method, OpCount>& measured) {
  std::vector<CostReport> out;
  for (const auto& [method, count] : measured) {
    CostReport rep;
    rep.method = method;
    rep.measured = count;
    if (method == Method::direct) {
      try {
        rep.formula = cost_direct(n_states, obs.size());
        rep.match = *rep.formula == count;
      } catch (const CountOverflowError&) {
        rep.match = false;
      }
    } else if (method == Method::diag_power) {
      rep.formula = cost_proposed(n_states, n_symbols, symbol_run_lengths(obs, n_symbols));
    }
    if (rep.formula && rep.formula->multiplications > 0) {
      rep.mult_ratio = static_cast<double>(count.multiplications) /
                       static_cast<double>(rep.formula->multiplications);
    }
    out.push_back(rep);
  }
  return out;
}

}  // namespace hmmdiag

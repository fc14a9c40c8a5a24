#include "hmmdiag/evaluators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace hmmdiag {

namespace {

constexpr double kMinNormal = std::numeric_limits<double>::min();

void check_inputs(const HmmModel& model, const ObservationSequence& obs) {
  obs.check_against(model.n_symbols);
}

void finish_plain(EvaluationResult& r) {
  r.diagnostics.underflow = r.probability < kMinNormal;
  r.log_probability = r.probability > 0.0 ? std::log(r.probability)
                                          : -std::numeric_limits<double>::infinity();
}

OpCount delta(const OpCounter& counter, const OpCount& before) {
  return counter.count() - before;
}

}  // namespace

std::string_view method_name(Method m) {
  switch (m) {
    case Method::direct: return "direct";
    case Method::forward: return "forward";
    case Method::chain: return "chain";
    case Method::diag_power: return "diag";
  }
  return "unknown";
}

std::optional<Method> parse_method(std::string_view name) {
  if (name == "direct") return Method::direct;
  if (name == "forward") return Method::forward;
  if (name == "chain") return Method::chain;
  if (name == "diag" || name == "diag_power") return Method::diag_power;
  return std::nullopt;
}

Matrix scaled_matrix(const HmmModel& model, Symbol k, OpCounter& counter) {
  const std::size_t n = model.n_states;
  Matrix out(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      out(i, j) = model.transition(i, j) * model.emission(j, k);
  counter.mul(n * n);
  return out;
}

ScaledMatrixSet build_scaled_set(const HmmModel& model) {
  ScaledMatrixSet set;
  OpCounter counter;
  set.matrices.reserve(model.n_symbols);
  set.factorizations.reserve(model.n_symbols);
  for (std::size_t k = 0; k < model.n_symbols; ++k) {
    set.matrices.push_back(scaled_matrix(model, static_cast<Symbol>(k), counter));
    try {
      set.factorizations.push_back(diagonalize(set.matrices.back()));
    } catch (const ConvergenceError& e) {
      throw ConvergenceError("symbol " + std::to_string(k) + ": " + e.what());
    }
  }
  set.construction_cost = counter.count();
  return set;
}

std::vector<double> initial_vector(const HmmModel& model, Symbol o1, OpCounter& counter) {
  std::vector<double> v(model.n_states);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = model.initial[i] * model.emission(i, o1);
  counter.mul(v.size());
  return v;
}

double direct_enumeration_steps(std::size_t n_states, std::size_t seq_len) {
  return std::pow(static_cast<double>(n_states), static_cast<double>(seq_len)) *
         static_cast<double>(seq_len);
}

EvaluationResult eval_direct(const HmmModel& model, const ObservationSequence& obs,
                             OpCounter& counter, std::uint64_t cap) {
  check_inputs(model, obs);
  const std::size_t n = model.n_states, t_len = obs.size();
  const double required = direct_enumeration_steps(n, t_len);
  if (required > static_cast<double>(cap)) {
    throw CapExceededError("direct enumeration needs " + std::to_string(required) +
                               " sequence-steps (N^T * T), cap is " + std::to_string(cap),
                           required);
  }

  const OpCount before = counter.count();
  std::vector<std::size_t> states(t_len, 0);
  const std::uint64_t per_sequence = 2 * t_len - 1;
  double total = 0.0;
  bool first = true;
  bool done = false;
  while (!done) {
    double p = model.initial[states[0]] * model.emission(states[0], obs[0]);
    for (std::size_t t = 1; t < t_len; ++t) {
      p *= model.transition(states[t - 1], states[t]);
      p *= model.emission(states[t], obs[t]);
    }
    counter.mul(per_sequence);
    if (first) {
      total = p;
      first = false;
    } else {
      total += p;
      counter.add();
    }

    // odometer over state sequences, last position fastest
    done = true;
    for (std::size_t pos = t_len; pos-- > 0;) {
      if (++states[pos] < n) {
        done = false;
        break;
      }
      states[pos] = 0;
    }
  }

  EvaluationResult r;
  r.method = Method::direct;
  r.probability = total;
  r.counts = delta(counter, before);
  finish_plain(r);
  return r;
}

EvaluationResult eval_forward(const HmmModel& model, const ObservationSequence& obs,
                              OpCounter& counter) {
  check_inputs(model, obs);
  const std::size_t n = model.n_states;
  const OpCount before = counter.count();
  EvaluationResult r;
  r.method = Method::forward;

  std::vector<double> alpha = initial_vector(model, obs[0], counter);
  std::vector<double> next(n);
  double log_scale = 0.0;

  // Normalizes alpha to unit sum; returns false once the mass is exactly zero.
  auto rescale = [&]() {
    double c = alpha[0];
    for (std::size_t i = 1; i < n; ++i) c += alpha[i];
    counter.add(n - 1);
    if (c == 0.0) return false;
    const double inv = 1.0 / c;
    for (double& a : alpha) a *= inv;
    counter.mul(n);
    log_scale += std::log(c);
    return true;
  };

  bool alive = rescale();
  for (std::size_t t = 1; alive && t < obs.size(); ++t) {
    for (std::size_t j = 0; j < n; ++j) {
      double acc = alpha[0] * model.transition(0, j);
      for (std::size_t i = 1; i < n; ++i) acc += alpha[i] * model.transition(i, j);
      next[j] = acc * model.emission(j, obs[t]);
    }
    counter.mul(n * n + n);
    counter.add(n * (n - 1));
    alpha.swap(next);
    alive = rescale();
  }

  if (!alive) {
    r.probability = 0.0;
    r.log_probability = -std::numeric_limits<double>::infinity();
  } else {
    r.log_probability = log_scale;
    r.probability = std::exp(log_scale);
    if (r.probability < kMinNormal) {
      r.diagnostics.underflow = true;
      r.probability = 0.0;
    }
  }
  r.counts = delta(counter, before);
  return r;
}

EvaluationResult eval_chain(const HmmModel& model, const ObservationSequence& obs,
                            OpCounter& counter) {
  check_inputs(model, obs);
  const std::size_t n = model.n_states;

  // step operators are precomputed and not part of the tally
  OpCounter setup;
  std::vector<std::optional<Matrix>> scaled(model.n_symbols);
  for (std::size_t t = 1; t < obs.size(); ++t) {
    if (!scaled[obs[t]]) scaled[obs[t]] = scaled_matrix(model, obs[t], setup);
  }

  const OpCount before = counter.count();
  std::vector<double> v = initial_vector(model, obs[0], counter);
  std::vector<double> next(n);
  for (std::size_t t = 1; t < obs.size(); ++t) {
    const Matrix& a = *scaled[obs[t]];
    for (std::size_t j = 0; j < n; ++j) {
      double acc = v[0] * a(0, j);
      for (std::size_t i = 1; i < n; ++i) acc += v[i] * a(i, j);
      next[j] = acc;
    }
    counter.mul(n * n);
    counter.add(n * (n - 1));
    v.swap(next);
  }
  double total = v[0];
  for (std::size_t i = 1; i < n; ++i) total += v[i];
  counter.add(n - 1);

  EvaluationResult r;
  r.method = Method::chain;
  r.probability = total;
  r.counts = delta(counter, before);
  finish_plain(r);
  return r;
}

EvaluationResult eval_diag_power(const HmmModel& model, const ObservationSequence& obs,
                                 OpCounter& counter, const ScaledMatrixSet& set) {
  check_inputs(model, obs);
  if (set.n_symbols() != model.n_symbols ||
      (!set.matrices.empty() && set.matrices.front().rows() != model.n_states)) {
    throw DimensionError("eval_diag_power: scaled matrix set does not match the model");
  }
  const std::size_t n = model.n_states;
  const OpCount before = counter.count();
  EvaluationResult r;
  r.method = Method::diag_power;

  const std::vector<double> v = initial_vector(model, obs[0], counter);
  const RunLengthSequence runs =
      run_length_encode(std::span<const Symbol>(obs.symbols()).subspan(1));

  double total = 0.0;
  if (runs.runs.empty()) {
    total = v[0];
    for (std::size_t i = 1; i < n; ++i) total += v[i];
    counter.add(n - 1);
  } else {
    std::optional<Matrix> product;
    for (const Run& run : runs.runs) {
      Matrix power;
      const auto& f = set.factorizations[run.symbol];
      bool fallback = !f.has_value();
      if (!fallback) {
        try {
          PowerResult p = matrix_power_diag(*f, run.count, counter);
          r.diagnostics.max_imaginary_residue =
              std::max(r.diagnostics.max_imaginary_residue, p.imaginary_residue);
          power = std::move(p.value);
        } catch (const NumericQualityError& e) {
          r.diagnostics.max_imaginary_residue =
              std::max(r.diagnostics.max_imaginary_residue, e.residue());
          fallback = true;
        }
      }
      if (fallback) {
        power = matrix_power_naive(set.matrices[run.symbol], run.count, counter);
        auto& used = r.diagnostics.fallbacks_used;
        if (std::find(used.begin(), used.end(), run.symbol) == used.end()) {
          used.push_back(run.symbol);
        }
      }
      product = product ? mat_mul(*product, power, counter) : std::move(power);
    }

    // row i of the product is weighted by v_i, then every entry is summed
    const Matrix& prod = *product;
    bool first = true;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        const double term = v[i] * prod(i, j);
        total = first ? term : total + term;
        first = false;
      }
    }
    counter.mul(n * n);
    counter.add(n * n - 1);
  }

  r.probability = total;
  r.counts = delta(counter, before);
  finish_plain(r);
  return r;
}

EvaluationResult evaluate(Method method, const HmmModel& model,
                          const ObservationSequence& obs, OpCounter& counter,
                          const ScaledMatrixSet* set, std::uint64_t cap) {
  switch (method) {
    case Method::direct: return eval_direct(model, obs, counter, cap);
    case Method::forward: return eval_forward(model, obs, counter);
    case Method::chain: return eval_chain(model, obs, counter);
    case Method::diag_power:
      if (set == nullptr) {
        ScaledMatrixSet local = build_scaled_set(model);
        return eval_diag_power(model, obs, counter, local);
      }
      return eval_diag_power(model, obs, counter, *set);
  }
  throw std::invalid_argument("evaluate: unknown method");
}

}  // namespace hmmdiag

#include "hmmdiag/model.hpp"

#include <cmath>
#include <random>
#include <charconv>

namespace hmmdiag {

namespace {

std::string fmt_num(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double unit_open(std::mt19937_64& rng) {
  constexpr double kScale = 1.0 / 9007199254740992.0;  // 2^-53
  return (static_cast<double>(rng() >> 11) + 0.5) * kScale;
}

void fill_stochastic_row(std::mt19937_64& rng, std::span<double> row) {
  double sum = 0.0;
  for (double& v : row) {
    v = unit_open(rng);
    sum += v;
  }
  for (double& v : row) v /= sum;
}

void check_entries(std::span<const double> values, const std::string& name,
                   std::size_t row, bool is_vector, ValidationReport& report) {
  for (std::size_t j = 0; j < values.size(); ++j) {
    const double v = values[j];
    const std::string where =
        is_vector ? name + "[" + std::to_string(j) + "]"
                  : name + "[" + std::to_string(row) + "][" + std::to_string(j) + "]";
    if (!std::isfinite(v)) {
      report.violations.push_back({where, "non-finite probability at " + where, v});
    } else if (v < 0.0) {
      report.violations.push_back({where, "negative probability at " + where, v});
    } else if (v > 1.0) {
      report.violations.push_back({where, "probability above 1 at " + where, v});
    }
  }
  double sum = 0.0;
  for (double v : values) sum += v;
  if (!(std::abs(sum - 1.0) <= kStochasticTolerance)) {
    const std::string where =
        is_vector ? name : name + " row " + std::to_string(row);
    const std::string what =
        is_vector ? name + " sums to " + fmt_num(sum)
                  : "row " + std::to_string(row) + " sums to " + fmt_num(sum);
    report.violations.push_back({where, what, sum});
  }
}

}  // namespace

void ObservationSequence::check_against(std::size_t n_symbols) const {
  if (symbols_.empty()) throw DimensionError("observation sequence is empty");
  for (std::size_t t = 0; t < symbols_.size(); ++t) {
    if (symbols_[t] >= n_symbols) {
      throw DimensionError("observation " + std::to_string(t) + " has symbol " +
                           std::to_string(symbols_[t]) + " outside [0, " +
                           std::to_string(n_symbols) + ")");
    }
  }
}

std::size_t RunLengthSequence::total_length() const {
  std::size_t total = 0;
  for (const Run& r : runs) total += r.count;
  return total;
}

ObservationSequence RunLengthSequence::decode() const {
  std::vector<Symbol> out;
  out.reserve(total_length());
  for (const Run& r : runs) out.insert(out.end(), r.count, r.symbol);
  return ObservationSequence(std::move(out));
}

RunLengthSequence run_length_encode(std::span<const Symbol> symbols) {
  RunLengthSequence out;
  for (Symbol s : symbols) {
    if (!out.runs.empty() && out.runs.back().symbol == s) {
      ++out.runs.back().count;
    } else {
      out.runs.push_back({s, 1});
    }
  }
  return out;
}

ValidationReport validate_model(const HmmModel& model) {
  const std::size_t n = model.n_states, m = model.n_symbols;
  if (n == 0 || m == 0) {
    throw DimensionError("n_states and n_symbols must be positive");
  }
  auto shape = [](const Matrix& x) {
    return std::to_string(x.rows()) + "x" + std::to_string(x.cols());
  };
  if (model.transition.rows() != n || model.transition.cols() != n) {
    throw DimensionError("transition is " + shape(model.transition) + ", expected " +
                         std::to_string(n) + "x" + std::to_string(n));
  }
  if (model.emission.rows() != n || model.emission.cols() != m) {
    throw DimensionError("emission is " + shape(model.emission) + ", expected " +
                         std::to_string(n) + "x" + std::to_string(m));
  }
  if (model.initial.size() != n) {
    throw DimensionError("initial has " + std::to_string(model.initial.size()) +
                         " entries, expected " + std::to_string(n));
  }

  ValidationReport report;
  for (std::size_t i = 0; i < n; ++i) check_entries(model.transition.row(i), "A", i, false, report);
  for (std::size_t i = 0; i < n; ++i) check_entries(model.emission.row(i), "B", i, false, report);
  check_entries(model.initial, "pi", 0, true, report);
  return report;
}

std::string describe(const ValidationReport& report) {
  if (report.ok()) return "OK";
  std::string out;
  for (const Violation& v : report.violations) {
    out += v.location + ": " + v.description + "\n";
  }
  return out;
}

ValidationError::ValidationError(ValidationReport report)
    : std::runtime_error("model violates stochastic constraints:\n" + describe(report)),
      report_(std::move(report)) {}

void require_valid(const HmmModel& model) {
  ValidationReport report = validate_model(model);
  if (!report.ok()) throw ValidationError(std::move(report));
}

HmmModel gen_random_model(std::size_t n_states, std::size_t n_symbols,
                          std::uint64_t seed) {
  if (n_states == 0 || n_symbols == 0) {
    throw DimensionError("gen_random_model: dimensions must be positive");
  }
  std::mt19937_64 rng(seed);
  HmmModel model{n_states, n_symbols, Matrix(n_states, n_states),
                 Matrix(n_states, n_symbols), std::vector<double>(n_states)};
  for (std::size_t i = 0; i < n_states; ++i) fill_stochastic_row(rng, model.transition.row(i));
  for (std::size_t i = 0; i < n_states; ++i) fill_stochastic_row(rng, model.emission.row(i));
  fill_stochastic_row(rng, model.initial);
  return model;
}

ObservationSequence gen_random_sequence(std::size_t n_symbols, std::size_t length,
                                        std::uint64_t seed) {
  if (n_symbols == 0) throw DimensionError("gen_random_sequence: no symbols");
  std::mt19937_64 rng(seed);
  std::vector<Symbol> out(length);
  for (Symbol& s : out) {
    const auto k = static_cast<std::size_t>(unit_open(rng) * static_cast<double>(n_symbols));
    s = static_cast<Symbol>(std::min(k, n_symbols - 1));
  }
  return ObservationSequence(std::move(out));
}

}  // namespace hmmdiag

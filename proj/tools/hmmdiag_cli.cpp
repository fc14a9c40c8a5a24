// hmmdiag: evaluate discrete-HMM observation likelihoods by enumeration,
// forward recursion, scaled-matrix chains and diagonalized matrix powers,
// and compare the instrumented operation counts with their closed forms.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "hmmdiag/cost_model.hpp"
#include "hmmdiag/evaluators.hpp"
#include "hmmdiag/model.hpp"
#include "hmmdiag/model_io.hpp"
#include "json.hpp"

namespace {

using namespace hmmdiag;

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitNumeric = 2;
constexpr int kExitInput = 3;

constexpr const char* kCsvHeader =
    "method,N,M,T,trial,probability,log_probability,mults_measured,adds_measured,"
    "mults_formula,adds_formula,wall_ns";

std::string fmt17(double v) {
  if (std::isinf(v)) return v < 0 ? "-inf" : "inf";
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct Options {
  std::string model_path;
  std::string obs_path;
  std::string obs_inline;
  std::string methods = "direct,forward,chain,diag";
  std::string format = "table";
  std::uint64_t seed = 0;
  std::size_t trials = 1;
  std::string sweep;
  std::uint64_t cap = kDefaultEnumerationCap;
  std::string out_path;
  std::size_t states = 3;
  std::size_t symbols = 2;
  std::size_t length = 0;
  bool run_sorted = false;
  std::string plot_dir;
};

std::vector<Method> parse_methods(const std::string& list) {
  std::vector<Method> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    auto m = parse_method(item);
    if (!m) throw ParseError("unknown method '" + item + "'", 0, "methods");
    if (std::find(out.begin(), out.end(), *m) == out.end()) out.push_back(*m);
  }
  if (out.empty()) throw ParseError("no methods selected", 0, "methods");
  return out;
}

std::pair<std::size_t, std::size_t> parse_sweep(const std::string& text) {
  const auto dots = text.find("..");
  if (dots == std::string::npos) throw ParseError("--sweep-T expects LO..HI", 0, "sweep-T");
  try {
    const std::size_t lo = std::stoul(text.substr(0, dots));
    const std::size_t hi = std::stoul(text.substr(dots + 2));
    if (lo == 0 || hi < lo) throw ParseError("--sweep-T needs 1 <= LO <= HI", 0, "sweep-T");
    return {lo, hi};
  } catch (const std::logic_error&) {
    throw ParseError("--sweep-T expects LO..HI", 0, "sweep-T");
  }
}

ObservationSequence load_observations(const Options& opt) {
  if (!opt.obs_inline.empty()) return parse_observations(opt.obs_inline);
  if (!opt.obs_path.empty()) return read_observation_file(opt.obs_path);
  throw ParseError("an observation sequence is required (--obs or --obs-inline)", 0, "obs");
}

// Output sink: the --out file when given, stdout otherwise.
class Sink {
 public:
  explicit Sink(const std::string& path) {
    if (!path.empty()) {
      file_.open(path, std::ios::binary | std::ios::trunc);
      if (!file_) throw IoError("cannot write '" + path + "'");
    }
  }
  std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }
  void close() {
    if (file_.is_open()) {
      file_.close();
      if (!file_) throw IoError("error writing output file");
    } else {
      std::cout.flush();
    }
  }

 private:
  std::ofstream file_;
};

struct Row {
  Method method;
  std::size_t n, m, t, trial;
  EvaluationResult result;
  std::optional<OpCount> formula;
  std::int64_t wall_ns;
};

std::optional<OpCount> formula_for(Method method, const HmmModel& model,
                                   const ObservationSequence& obs) {
  try {
    const auto reports = compare_costs(model.n_states, model.n_symbols, obs,
                                       {{method, OpCount{}}});
    return reports.front().formula;
  } catch (const CountOverflowError&) {
    return std::nullopt;
  }
}

Row run_one(Method method, const HmmModel& model, const ObservationSequence& obs,
            const ScaledMatrixSet& set, std::uint64_t cap, std::size_t trial) {
  OpCounter counter;
  const auto start = std::chrono::steady_clock::now();
  EvaluationResult r = evaluate(method, model, obs, counter, &set, cap);
  const auto stop = std::chrono::steady_clock::now();
  return {method,
          model.n_states,
          model.n_symbols,
          obs.size(),
          trial,
          std::move(r),
          formula_for(method, model, obs),
          std::chrono::duration_cast<std::chrono::nanoseconds>(stop - start).count()};
}

std::string csv_row(const Row& row) {
  std::ostringstream os;
  os << method_name(row.method) << ',' << row.n << ',' << row.m << ',' << row.t << ','
     << row.trial << ',' << fmt17(row.result.probability) << ','
     << fmt17(row.result.log_probability) << ',' << row.result.counts.multiplications << ','
     << row.result.counts.additions << ',';
  if (row.formula) os << row.formula->multiplications;
  os << ',';
  if (row.formula) os << row.formula->additions;
  os << ',' << row.wall_ns;
  return os.str();
}

std::string flags(const Row& row) {
  std::string out;
  const Diagnostics& d = row.result.diagnostics;
  if (d.underflow) out += "underflow ";
  if (!d.fallbacks_used.empty()) {
    out += "fallback=";
    for (std::size_t i = 0; i < d.fallbacks_used.size(); ++i) {
      if (i) out += ';';
      out += std::to_string(d.fallbacks_used[i]);
    }
    out += ' ';
  }
  if (row.method == Method::diag_power) out += "imag=" + fmt17(d.max_imaginary_residue);
  if (!out.empty() && out.back() == ' ') out.pop_back();
  return out;
}

nlohmann::json row_json(const Row& row) {
  nlohmann::json j;
  j["method"] = method_name(row.method);
  j["N"] = row.n;
  j["M"] = row.m;
  j["T"] = row.t;
  j["probability"] = row.result.probability;
  j["log_probability"] = std::isfinite(row.result.log_probability)
                             ? nlohmann::json(row.result.log_probability)
                             : nlohmann::json(fmt17(row.result.log_probability));
  j["mults_measured"] = row.result.counts.multiplications;
  j["adds_measured"] = row.result.counts.additions;
  j["real_mults_measured"] = row.result.counts.real_multiplications();
  j["real_adds_measured"] = row.result.counts.real_additions();
  j["mults_formula"] = row.formula ? nlohmann::json(row.formula->multiplications) : nullptr;
  j["adds_formula"] = row.formula ? nlohmann::json(row.formula->additions) : nullptr;
  if (row.method == Method::direct && row.formula) {
    j["formula_exact"] = *row.formula == row.result.counts;
  }
  const Diagnostics& d = row.result.diagnostics;
  j["diagnostics"] = {{"max_imaginary_residue", d.max_imaginary_residue},
                      {"fallbacks_used", d.fallbacks_used},
                      {"underflow", d.underflow}};
  j["wall_ns"] = row.wall_ns;
  return j;
}

void print_table(std::ostream& os, const std::vector<Row>& rows) {
  std::vector<std::vector<std::string>> cells = {
      {"method", "probability", "log_probability", "mults", "adds", "mults_formula",
       "adds_formula", "real_mults(x4)", "real_adds(x2)", "flags"}};
  for (const Row& r : rows) {
    cells.push_back({std::string(method_name(r.method)), fmt17(r.result.probability),
                     fmt17(r.result.log_probability),
                     std::to_string(r.result.counts.multiplications),
                     std::to_string(r.result.counts.additions),
                     r.formula ? std::to_string(r.formula->multiplications) : "",
                     r.formula ? std::to_string(r.formula->additions) : "",
                     std::to_string(r.result.counts.real_multiplications()),
                     std::to_string(r.result.counts.real_additions()), flags(r)});
  }
  std::vector<std::size_t> width(cells.front().size(), 0);
  for (const auto& line : cells)
    for (std::size_t c = 0; c < line.size(); ++c) width[c] = std::max(width[c], line[c].size());
  for (const auto& line : cells) {
    std::string text;
    for (std::size_t c = 0; c < line.size(); ++c) {
      text += line[c];
      if (c + 1 < line.size()) text += std::string(width[c] - line[c].size() + 2, ' ');
    }
    while (!text.empty() && text.back() == ' ') text.pop_back();
    os << text << '\n';
  }
}

int cmd_validate(const Options& opt) {
  try {
    read_model_file(opt.model_path);
  } catch (const ValidationError& e) {
    std::cout << describe(e.report());
    return kExitValidation;
  }
  std::cout << "OK\n";
  return kExitOk;
}

int cmd_gen(const Options& opt) {
  if (opt.states == 0 || opt.symbols == 0) {
    throw ParseError("--states and --symbols must be positive", 0, "states");
  }
  const HmmModel model = gen_random_model(opt.states, opt.symbols, opt.seed);
  if (opt.out_path.empty()) {
    std::cout << serialize_model(model);
  } else {
    write_model_file(opt.out_path, model);
  }
  return kExitOk;
}

int cmd_eval(const Options& opt) {
  const HmmModel model = read_model_file(opt.model_path);
  const ObservationSequence obs = load_observations(opt);
  obs.check_against(model.n_symbols);
  const std::vector<Method> methods = parse_methods(opt.methods);
  if (opt.format != "table" && opt.format != "csv" && opt.format != "json") {
    throw ParseError("unknown format '" + opt.format + "'", 0, "format");
  }

  const ScaledMatrixSet set = build_scaled_set(model);
  std::vector<Row> rows;
  for (Method m : methods) rows.push_back(run_one(m, model, obs, set, opt.cap, 0));

  Sink sink(opt.out_path);
  std::ostream& os = sink.stream();
  if (opt.format == "csv") {
    os << kCsvHeader << '\n';
    for (const Row& r : rows) os << csv_row(r) << '\n';
  } else if (opt.format == "json") {
    nlohmann::json doc = nlohmann::json::array();
    for (const Row& r : rows) doc.push_back(row_json(r));
    os << doc.dump(2) << '\n';
  } else {
    print_table(os, rows);
  }
  sink.close();
  return kExitOk;
}

std::int64_t median(std::vector<std::int64_t> v) {
  std::sort(v.begin(), v.end());
  const std::size_t mid = v.size() / 2;
  return v.size() % 2 ? v[mid] : (v[mid - 1] + v[mid]) / 2;
}

ObservationSequence bench_sequence(const Options& opt, std::size_t n_symbols, std::size_t t) {
  ObservationSequence obs = gen_random_sequence(n_symbols, t, opt.seed + t);
  if (!opt.run_sorted) return obs;
  std::vector<Symbol> sorted = obs.symbols();
  std::sort(sorted.begin(), sorted.end());
  return ObservationSequence(std::move(sorted));
}

void write_series(const Options& opt, const std::vector<Method>& methods,
                  const std::vector<Row>& rows) {
  for (Method m : methods) {
    std::ostringstream series;
    series << "# x=T y=mults_measured method=" << method_name(m) << '\n';
    for (const Row& r : rows) {
      if (r.method == m && r.trial == 0) {
        series << r.t << ' ' << r.result.counts.multiplications << '\n';
      }
    }
    if (opt.plot_dir.empty()) {
      std::cerr << series.str();
      continue;
    }
    const auto path =
        std::filesystem::path(opt.plot_dir) / (std::string(method_name(m)) + "_mults.dat");
    std::ofstream out(path, std::ios::trunc);
    out << series.str();
    if (!out) throw IoError("cannot write '" + path.string() + "'");
  }
}

int cmd_bench(const Options& opt) {
  if (opt.trials == 0) throw ParseError("--trials must be at least 1", 0, "trials");
  const HmmModel model = opt.model_path.empty()
                             ? gen_random_model(opt.states, opt.symbols, opt.seed)
                             : read_model_file(opt.model_path);
  const std::vector<Method> methods = parse_methods(opt.methods);

  std::vector<ObservationSequence> sequences;
  const bool sweeping = !opt.sweep.empty();
  if (sweeping) {
    const auto [lo, hi] = parse_sweep(opt.sweep);
    for (std::size_t t = lo; t <= hi; ++t) sequences.push_back(bench_sequence(opt, model.n_symbols, t));
  } else if (!opt.obs_inline.empty() || !opt.obs_path.empty()) {
    sequences.push_back(load_observations(opt));
  } else if (opt.length > 0) {
    sequences.push_back(bench_sequence(opt, model.n_symbols, opt.length));
  } else {
    throw ParseError("bench needs --sweep-T, --length, --obs or --obs-inline", 0, "obs");
  }
  for (const auto& obs : sequences) obs.check_against(model.n_symbols);

  const ScaledMatrixSet set = build_scaled_set(model);
  std::vector<Row> rows;
  for (Method m : methods)
    for (const auto& obs : sequences)
      for (std::size_t trial = 0; trial < opt.trials; ++trial)
        rows.push_back(run_one(m, model, obs, set, opt.cap, trial));

  Sink sink(opt.out_path);
  std::ostream& os = sink.stream();
  os << kCsvHeader << '\n';
  for (const Row& r : rows) os << csv_row(r) << '\n';
  sink.close();

  std::cerr << "# summary (medians over " << opt.trials << " trial(s))\n";
  std::cerr << "# method,T,mults_measured,adds_measured,median_wall_ns\n";
  for (Method m : methods) {
    for (const auto& obs : sequences) {
      std::vector<std::int64_t> walls;
      const Row* first = nullptr;
      for (const Row& r : rows) {
        if (r.method == m && r.t == obs.size()) {
          walls.push_back(r.wall_ns);
          if (!first) first = &r;
        }
      }
      if (!first) continue;
      std::cerr << "# " << method_name(m) << ',' << obs.size() << ','
                << first->result.counts.multiplications << ','
                << first->result.counts.additions << ',' << median(walls) << '\n';
    }
  }
  if (const auto cross = crossover_length(model.n_states, model.n_symbols)) {
    std::cerr << "# formula crossover: proposed < direct for balanced runs from T=" << *cross
              << '\n';
  } else {
    std::cerr << "# formula crossover: none up to T=4096\n";
  }
  if (sweeping) write_series(opt, methods, rows);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Discrete HMM likelihood by enumeration, forward recursion, "
               "scaled-matrix chains and diagonalized matrix powers"};
  app.require_subcommand(1);
  Options opt;

  auto add_model = [&](CLI::App* sub, bool required) {
    auto* o = sub->add_option("-m,--model", opt.model_path, "Model JSON file");
    if (required) o->required();
  };
  auto add_obs = [&](CLI::App* sub) {
    sub->add_option("-o,--obs", opt.obs_path, "Observation file");
    sub->add_option("--obs-inline", opt.obs_inline, "Inline observations, e.g. \"0 0 1\"");
  };
  auto add_run = [&](CLI::App* sub) {
    sub->add_option("--methods", opt.methods, "Comma list of direct,forward,chain,diag");
    sub->add_option("--cap", opt.cap, "Direct enumeration cap in sequence-steps (N^T * T)");
    sub->add_option("--out", opt.out_path, "Write output here instead of stdout");
  };

  auto* validate = app.add_subcommand("validate", "Check a model file");
  add_model(validate, true);

  auto* gen = app.add_subcommand("gen", "Generate a reproducible random model");
  gen->add_option("-N,--states", opt.states, "Number of states")->required();
  gen->add_option("-M,--symbols", opt.symbols, "Number of symbols")->required();
  gen->add_option("--seed", opt.seed, "Generator seed");
  gen->add_option("--out", opt.out_path, "Output path (stdout when omitted)");

  auto* eval = app.add_subcommand("eval", "Evaluate P(O | model)");
  add_model(eval, true);
  add_obs(eval);
  add_run(eval);
  eval->add_option("--format", opt.format, "table, csv or json");

  auto* bench = app.add_subcommand("bench", "Benchmark methods and emit CSV");
  add_model(bench, false);
  add_obs(bench);
  add_run(bench);
  bench->add_option("-N,--states", opt.states, "States of the generated model (no --model)");
  bench->add_option("-M,--symbols", opt.symbols, "Symbols of the generated model (no --model)");
  bench->add_option("--seed", opt.seed, "Seed for generated model and sequences");
  bench->add_option("--trials", opt.trials, "Repetitions per (method, T)");
  bench->add_option("--sweep-T", opt.sweep, "Sequence lengths LO..HI");
  bench->add_option("--length", opt.length, "Single generated sequence length");
  bench->add_flag("--run-sorted", opt.run_sorted, "Sort generated sequences into runs");
  bench->add_option("--plot-dir", opt.plot_dir, "Directory for <method>_mults.dat series");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    if (*validate) return cmd_validate(opt);
    if (*gen) return cmd_gen(opt);
    if (*eval) return cmd_eval(opt);
    if (*bench) return cmd_bench(opt);
  } catch (const ValidationError& e) {
    std::cerr << "validation error: " << e.what();
    return kExitValidation;
  } catch (const CapExceededError& e) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.0f", std::ceil(e.required()));
    std::cerr << "numeric error: " << e.what() << "\nrequired cap: " << buf
              << " (pass --cap " << buf << " to allow)\n";
    return kExitNumeric;
  } catch (const IoError& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return kExitInput;
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return kExitInput;
  } catch (const DimensionError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return kExitNumeric;
  }
  return kExitInput;
}

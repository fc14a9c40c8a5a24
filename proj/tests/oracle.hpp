#pragma once

// Test-only reference computations. These deliberately share no code with
// the evaluators they check.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <sys/wait.h>
#include <vector>

#include "hmmdiag/model.hpp"

namespace oracle {

namespace detail {
inline double recurse(const hmmdiag::HmmModel& m, const std::vector<hmmdiag::Symbol>& o,
                      std::size_t t, std::size_t prev, double prefix) {
  if (t == o.size()) return prefix;
  double sum = 0.0;
  for (std::size_t s = 0; s < m.n_states; ++s) {
    sum += recurse(m, o, t + 1, s,
                   prefix * m.transition(prev, s) * m.emission(s, o[t]));
  }
  return sum;
}
}  // namespace detail

/// Sum over every hidden path, depth-first.
inline double brute_force_likelihood(const hmmdiag::HmmModel& m,
                                     const std::vector<hmmdiag::Symbol>& o) {
  double sum = 0.0;
  for (std::size_t s = 0; s < m.n_states; ++s) {
    sum += detail::recurse(m, o, 1, s, m.initial[s] * m.emission(s, o[0]));
  }
  return sum;
}

inline double rel_err(double got, double want) {
  const double scale = std::max(std::abs(want), 1e-300);
  return std::abs(got - want) / scale;
}

/// Two-state model used throughout: A=[[0.7,0.3],[0.4,0.6]],
/// B=[[0.9,0.1],[0.2,0.8]], pi=[0.6,0.4].
inline hmmdiag::HmmModel two_state_model() {
  return {2, 2, hmmdiag::Matrix{{0.7, 0.3}, {0.4, 0.6}},
          hmmdiag::Matrix{{0.9, 0.1}, {0.2, 0.8}}, {0.6, 0.4}};
}

// Brute-force sums over the 8 hidden paths of two_state_model(), computed in
// exact rational arithmetic: 13623/100000 and 10893/100000.
inline constexpr double kTwoStateO001 = 0.13623;
inline constexpr double kTwoStateO010 = 0.10893;

/// Model whose symbol-0 operator is the defective [[0.5,0.25],[0,0.5]]:
/// A=[[0.5,0.5],[0,1]], B=[[1,0],[0.5,0.5]].
inline hmmdiag::HmmModel defective_model() {
  return {2, 2, hmmdiag::Matrix{{0.5, 0.5}, {0.0, 1.0}},
          hmmdiag::Matrix{{1.0, 0.0}, {0.5, 0.5}}, {0.5, 0.5}};
}

struct CommandResult {
  int exit_code = -1;
  std::string out;
};

/// Runs a shell command, capturing stdout.
inline CommandResult run(const std::string& cmd) {
  CommandResult r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
  const int status = pclose(pipe);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

}  // namespace oracle

#pragma once

#include <cstdint>

namespace hmmdiag {

/// A multiplication/addition tally. A complex operation counts as one
/// multiplication or addition; the complex_* fields record how many of the
/// totals were complex so callers can expand them into real operations.
struct OpCount {
  std::uint64_t multiplications = 0;
  std::uint64_t additions = 0;
  std::uint64_t complex_multiplications = 0;
  std::uint64_t complex_additions = 0;

  /// Totals with each complex multiplication worth 4 real ones and each
  /// complex addition worth 2.
  std::uint64_t real_multiplications() const {
    return multiplications + 3 * complex_multiplications;
  }
  std::uint64_t real_additions() const { return additions + complex_additions; }

  OpCount& operator+=(const OpCount& other) {
    multiplications += other.multiplications;
    additions += other.additions;
    complex_multiplications += other.complex_multiplications;
    complex_additions += other.complex_additions;
    return *this;
  }
  friend OpCount operator+(OpCount a, const OpCount& b) { return a += b; }
  friend OpCount operator-(OpCount a, const OpCount& b) {
    a.multiplications -= b.multiplications;
    a.additions -= b.additions;
    a.complex_multiplications -= b.complex_multiplications;
    a.complex_additions -= b.complex_additions;
    return a;
  }
  friend bool operator==(const OpCount&, const OpCount&) = default;
};

/// Per-invocation accumulator. Owned by the caller and never shared between
/// concurrent evaluations; merge finished counters with `+=`.
class OpCounter {
 public:
  void mul(std::uint64_t n = 1) { count_.multiplications += n; }
  void add(std::uint64_t n = 1) { count_.additions += n; }
  void complex_mul(std::uint64_t n = 1) {
    count_.multiplications += n;
    count_.complex_multiplications += n;
  }
  void complex_add(std::uint64_t n = 1) {
    count_.additions += n;
    count_.complex_additions += n;
  }

  std::uint64_t multiplications() const { return count_.multiplications; }
  std::uint64_t additions() const { return count_.additions; }
  const OpCount& count() const { return count_; }

  OpCounter& operator+=(const OpCounter& other) {
    count_ += other.count_;
    return *this;
  }

 private:
  OpCount count_;
};

}  // namespace hmmdiag

#pragma once

// Game of 24 state space under exact rational arithmetic, with an exhaustive
// oracle used as ground truth by the acceptance tests.

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace ltot::game24 {

struct Rational {
  long long num = 0;
  long long den = 1;  // always > 0, gcd(num, den) = 1

  static Rational of(long long n, long long d = 1);
  Rational operator+(const Rational& o) const;
  Rational operator-(const Rational& o) const;
  Rational operator*(const Rational& o) const;
  Rational operator/(const Rational& o) const;  // caller checks o != 0
  bool operator==(const Rational& o) const { return num == o.num && den == o.den; }
  bool operator<(const Rational& o) const;
  bool is_zero() const { return num == 0; }
  double to_double() const { return static_cast<double>(num) / static_cast<double>(den); }
  std::string str() const;
};

// 1..4 remaining numbers, kept sorted so permutation-equivalent states share a
// payload (the lateral dedup signature picks that up).
struct State {
  std::vector<Rational> numbers;

  void canonicalize();
  std::string payload() const;  // comma-separated canonical rationals
  static std::optional<State> parse(const std::string& payload);
  bool solved() const;  // single number equal to 24
};

// All children reachable by one operation on one pair. For each unordered pair
// (a, b): a+b, a*b, a-b, b-a, a/b, b/a, with the symmetric duplicates dropped
// when a == b and division by zero skipped.
std::vector<State> expand(const State& s);

// Exploration heuristic: closeness of the best single-pair combination to 24,
// mapped to [0,1]. Crude on purpose; promotion relies on the exact verifier.
double heuristic(const State& s);

struct Instance {
  std::array<int, 4> numbers{};
  std::string str() const;
};

struct OracleResult {
  bool solvable = false;
  std::string solution;  // one witness expression when solvable
};

// Exhaustive search over all pair choices, operators, and parenthesizations
// under exact rational arithmetic.
OracleResult oracle(const Instance& inst);

// One instance per line, four comma-separated integers. Blank lines and
// '#' comments are skipped. Throws std::invalid_argument on malformed lines.
std::vector<Instance> parse_instances(const std::string& text);

}  // namespace ltot::game24

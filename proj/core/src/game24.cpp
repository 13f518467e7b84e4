#include "ltot/game24.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace ltot::game24 {

Rational Rational::of(long long n, long long d) {
  if (d == 0) throw std::invalid_argument("Rational: zero denominator");
  if (d < 0) {
    n = -n;
    d = -d;
  }
  const long long g = std::gcd(n < 0 ? -n : n, d);
  return Rational{g ? n / g : n, g ? d / g : d};
}

Rational Rational::operator+(const Rational& o) const {
  return of(num * o.den + o.num * den, den * o.den);
}
Rational Rational::operator-(const Rational& o) const {
  return of(num * o.den - o.num * den, den * o.den);
}
Rational Rational::operator*(const Rational& o) const {
  return of(num * o.num, den * o.den);
}
Rational Rational::operator/(const Rational& o) const {
  if (o.num == 0) throw std::domain_error("Rational: division by zero");
  return of(num * o.den, den * o.num);
}
bool Rational::operator<(const Rational& o) const {
  return num * o.den < o.num * den;
}

std::string Rational::str() const {
  if (den == 1) return std::to_string(num);
  return std::to_string(num) + "/" + std::to_string(den);
}

void State::canonicalize() { std::sort(numbers.begin(), numbers.end()); }

std::string State::payload() const {
  std::string out;
  for (std::size_t i = 0; i < numbers.size(); ++i) {
    if (i) out += ',';
    out += numbers[i].str();
  }
  return out;
}

std::optional<State> State::parse(const std::string& payload) {
  State s;
  std::stringstream ss(payload);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    const auto slash = tok.find('/');
    try {
      if (slash == std::string::npos) {
        s.numbers.push_back(Rational::of(std::stoll(tok)));
      } else {
        s.numbers.push_back(Rational::of(std::stoll(tok.substr(0, slash)),
                                         std::stoll(tok.substr(slash + 1))));
      }
    } catch (const std::exception&) {
      return std::nullopt;
    }
  }
  if (s.numbers.empty() || s.numbers.size() > 4) return std::nullopt;
  return s;
}

bool State::solved() const {
  return numbers.size() == 1 && numbers[0] == Rational::of(24);
}

namespace {

// One-step combinations of the pair (a, b) under the symmetric-duplicate rule.
void pair_results(const Rational& a, const Rational& b, std::vector<Rational>& out) {
  out.push_back(a + b);
  out.push_back(a * b);
  out.push_back(a - b);
  if (!(a == b)) out.push_back(b - a);
  if (!b.is_zero()) out.push_back(a / b);
  if (!(a == b) && !a.is_zero()) out.push_back(b / a);
}

}  // namespace

std::vector<State> expand(const State& s) {
  std::vector<State> children;
  const std::size_t n = s.numbers.size();
  if (n < 2) return children;
  std::vector<Rational> results;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      results.clear();
      pair_results(s.numbers[i], s.numbers[j], results);
      for (const Rational& r : results) {
        State child;
        child.numbers.reserve(n - 1);
        for (std::size_t k = 0; k < n; ++k)
          if (k != i && k != j) child.numbers.push_back(s.numbers[k]);
        child.numbers.push_back(r);
        child.canonicalize();
        children.push_back(std::move(child));
      }
    }
  }
  return children;
}

double heuristic(const State& s) {
  const double target = 24.0;
  double best = 1e18;
  if (s.numbers.size() == 1) {
    best = std::fabs(s.numbers[0].to_double() - target);
  } else {
    std::vector<Rational> results;
    for (std::size_t i = 0; i < s.numbers.size(); ++i) {
      for (std::size_t j = i + 1; j < s.numbers.size(); ++j) {
        results.clear();
        pair_results(s.numbers[i], s.numbers[j], results);
        for (const Rational& r : results)
          best = std::min(best, std::fabs(r.to_double() - target));
      }
    }
  }
  return std::max(0.0, 1.0 - best / target);
}

std::string Instance::str() const {
  std::string out;
  for (std::size_t i = 0; i < numbers.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(numbers[i]);
  }
  return out;
}

namespace {

struct Term {
  Rational value;
  std::string expr;
};

bool solve(std::vector<Term> terms, std::string* witness) {
  if (terms.size() == 1) {
    if (terms[0].value == Rational::of(24)) {
      *witness = terms[0].expr;
      return true;
    }
    return false;
  }
  for (std::size_t i = 0; i < terms.size(); ++i) {
    for (std::size_t j = 0; j < terms.size(); ++j) {
      if (i == j) continue;
      const Term& a = terms[i];
      const Term& b = terms[j];
      std::vector<Term> combos;
      if (i < j) {  // commutative ops once per unordered pair
        combos.push_back({a.value + b.value, "(" + a.expr + "+" + b.expr + ")"});
        combos.push_back({a.value * b.value, "(" + a.expr + "*" + b.expr + ")"});
      }
      combos.push_back({a.value - b.value, "(" + a.expr + "-" + b.expr + ")"});
      if (!b.value.is_zero())
        combos.push_back({a.value / b.value, "(" + a.expr + "/" + b.expr + ")"});
      for (auto& combo : combos) {
        std::vector<Term> rest;
        rest.reserve(terms.size() - 1);
        for (std::size_t k = 0; k < terms.size(); ++k)
          if (k != i && k != j) rest.push_back(terms[k]);
        rest.push_back(std::move(combo));
        if (solve(std::move(rest), witness)) return true;
      }
    }
  }
  return false;
}

}  // namespace

OracleResult oracle(const Instance& inst) {
  std::vector<Term> terms;
  for (int n : inst.numbers)
    terms.push_back({Rational::of(n), std::to_string(n)});
  OracleResult out;
  std::string witness;
  out.solvable = solve(std::move(terms), &witness);
  if (out.solvable) out.solution = witness;
  return out;
}

std::vector<Instance> parse_instances(const std::string& text) {
  std::vector<Instance> out;
  std::stringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    // trim
    const auto b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos) continue;
    const auto e = line.find_last_not_of(" \t\r");
    line = line.substr(b, e - b + 1);

    Instance inst;
    std::stringstream ls(line);
    std::string tok;
    int i = 0;
    while (std::getline(ls, tok, ',')) {
      if (i >= 4) throw std::invalid_argument("instance line has > 4 numbers: " + line);
      inst.numbers[i++] = std::stoi(tok);
    }
    if (i != 4) throw std::invalid_argument("instance line has < 4 numbers: " + line);
    for (int n : inst.numbers)
      if (n < 1 || n > 13)
        throw std::invalid_argument("instance number outside [1,13]: " + line);
    out.push_back(inst);
  }
  return out;
}

}  // namespace ltot::game24

#include "ltot/promotion.hpp"

#include <array>
#include <cctype>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace ltot::promotion {

const char* gate_name(Gate g) {
  return g == Gate::kVerifier ? "VERIFIER" : "DUAL";
}

const char* reason_name(Reason r) {
  switch (r) {
    case Reason::kPass: return "PASS";
    case Reason::kFailPlausibility: return "FAIL_PLAUSIBILITY";
    case Reason::kFailConsistency: return "FAIL_CONSISTENCY";
    case Reason::kFailConfirm: return "FAIL_CONFIRM";
    case Reason::kFailVerifier: return "FAIL_VERIFIER";
  }
  return "?";
}

PromotionDecision verifier_gate(bool envelope_held, bool confirm_passed,
                                const std::function<bool()>& verifier) {
  PromotionDecision d;
  d.gate = Gate::kVerifier;
  d.confirm_passed = confirm_passed;
  if (!envelope_held || !confirm_passed) {
    d.reason = Reason::kFailConfirm;
    return d;
  }
  bool ok = false;
  try {
    ok = verifier();
  } catch (const std::exception&) {
    d.reason = Reason::kFailVerifier;
    return d;
  }
  if (!ok) {
    d.reason = Reason::kFailVerifier;
    return d;
  }
  d.accepted = true;
  d.reason = Reason::kPass;
  return d;
}

PromotionDecision dual_gate(double v_score, double c_path,
                            const DualGateParams& params, bool confirm_passed,
                            bool rederivation_required, bool rederivation_passed) {
  PromotionDecision d;
  d.gate = Gate::kDual;
  d.v_score = v_score;
  d.c_path = c_path;
  d.confirm_passed = confirm_passed;
  if (v_score < params.tau_v) {
    d.reason = Reason::kFailPlausibility;
    return d;
  }
  if (c_path < params.tau_c) {
    d.reason = Reason::kFailConsistency;
    return d;
  }
  if (!confirm_passed || (rederivation_required && !rederivation_passed)) {
    d.reason = Reason::kFailConfirm;
    return d;
  }
  d.accepted = true;
  d.reason = Reason::kPass;
  return d;
}

namespace {

constexpr std::array<const char*, 21> kNumberWords = {
    "zero",    "one",     "two",      "three",  "four",  "five",  "six",
    "seven",   "eight",   "nine",     "ten",    "eleven", "twelve",
    "thirteen", "fourteen", "fifteen", "sixteen", "seventeen", "eighteen",
    "nineteen", "twenty"};

constexpr std::array<const char*, 12> kMonths = {
    "january", "february", "march",     "april",   "may",      "june",
    "july",    "august",   "september", "october", "november", "december"};

int month_index(const std::string& tok) {
  for (std::size_t i = 0; i < kMonths.size(); ++i)
    if (tok == kMonths[i]) return static_cast<int>(i) + 1;
  return 0;
}

bool all_digits(const std::string& tok) {
  if (tok.empty()) return false;
  for (char c : tok)
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  return true;
}

std::string two_digits(int v) {
  return (v < 10 ? "0" : "") + std::to_string(v);
}

bool is_alnum_byte(unsigned char c) { return std::isalnum(c) != 0; }

// ASCII punctuation plus the common Unicode punctuation marks that show up in
// extracted answers. Multibyte marks are matched as UTF-8 sequences.
bool utf8_punct(const std::string& s, std::size_t i, std::size_t* len) {
  static const std::array<const char*, 13> kMarks = {
      "–", "—", "‘", "’", "“", "”", "…",
      "«", "»", "¡", "¿", "·", "•"};
  for (const char* m : kMarks) {
    const std::size_t n = std::char_traits<char>::length(m);
    if (s.compare(i, n, m) == 0) {
      *len = n;
      return true;
    }
  }
  return false;
}

std::vector<std::string> split_words(const std::string& s) {
  std::vector<std::string> words;
  std::stringstream ss(s);
  std::string w;
  while (ss >> w) words.push_back(w);
  return words;
}

std::string join_words(const std::vector<std::string>& words) {
  std::string out;
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (i) out += ' ';
    out += words[i];
  }
  return out;
}

// "january 5 2021" / "5 january 2021" -> "2021-01-05". Numeric-only forms are
// ambiguous and left unchanged.
void normalize_dates(std::vector<std::string>& words) {
  if (words.size() < 3) return;
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < words.size()) {
    bool matched = false;
    if (i + 2 < words.size()) {
      const std::string& a = words[i];
      const std::string& b = words[i + 1];
      const std::string& c = words[i + 2];
      int month = 0, day = 0, year = 0;
      if ((month = month_index(a)) && all_digits(b) && all_digits(c)) {
        day = std::stoi(b);
        year = std::stoi(c);
      } else if (all_digits(a) && (month = month_index(b)) && all_digits(c)) {
        day = std::stoi(a);
        year = std::stoi(c);
      }
      if (month && day >= 1 && day <= 31 && year >= 1000 && year <= 9999) {
        out.push_back(std::to_string(year) + "-" + two_digits(month) + "-" +
                      two_digits(day));
        i += 3;
        matched = true;
      }
    }
    if (!matched) {
      out.push_back(words[i]);
      ++i;
    }
  }
  words = std::move(out);
}

}  // namespace

std::string normalize_answer(std::string_view raw) {
  // Lowercase ASCII, then strip punctuation. '-' and '/' survive only between
  // two alphanumerics so "forty-one" and "41/36" stay intact while "word." and
  // " / " lose their marks.
  std::string lowered(raw);
  for (char& c : lowered)
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));

  std::string stripped;
  stripped.reserve(lowered.size());
  for (std::size_t i = 0; i < lowered.size();) {
    const unsigned char c = static_cast<unsigned char>(lowered[i]);
    std::size_t mark_len = 0;
    if (utf8_punct(lowered, i, &mark_len)) {
      i += mark_len;
      continue;
    }
    if ((c == '-' || c == '/') && i > 0 && i + 1 < lowered.size() &&
        is_alnum_byte(static_cast<unsigned char>(lowered[i - 1])) &&
        is_alnum_byte(static_cast<unsigned char>(lowered[i + 1]))) {
      stripped += static_cast<char>(c);
      ++i;
      continue;
    }
    if (std::ispunct(c)) {
      ++i;
      continue;
    }
    if (std::isspace(c)) {
      stripped += ' ';
      ++i;
      continue;
    }
    stripped += static_cast<char>(c);
    ++i;
  }

  std::vector<std::string> words = split_words(stripped);
  for (std::string& w : words) {
    for (std::size_t n = 0; n < kNumberWords.size(); ++n) {
      if (w == kNumberWords[n]) {
        w = std::to_string(n);
        break;
      }
    }
  }
  normalize_dates(words);
  return join_words(words);
}

std::string ValidatorRecord::to_json() const {
  nlohmann::ordered_json j;
  j["pass"] = pass;
  j["plausibility"] = plausibility;
  j["consistency"] = consistency;
  j["justification"] = justification;
  return j.dump();
}

ValidatorRecord ValidatorRecord::from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("ValidatorRecord: ") + e.what());
  }
  for (const char* field : {"pass", "plausibility", "consistency", "justification"})
    if (!j.contains(field))
      throw std::invalid_argument(std::string("ValidatorRecord: missing field ") + field);
  ValidatorRecord r;
  r.pass = j["pass"].get<bool>();
  r.plausibility = j["plausibility"].get<double>();
  r.consistency = j["consistency"].get<double>();
  r.justification = j["justification"].get<std::string>();
  if (!(r.plausibility >= 0.0 && r.plausibility <= 1.0) ||
      !(r.consistency >= 0.0 && r.consistency <= 1.0))
    throw std::invalid_argument("ValidatorRecord: score outside [0,1]");
  return r;
}

}  // namespace ltot::promotion

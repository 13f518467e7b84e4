#pragma once

// Promotion gates: the verifier-aligned gate and the QA dual gate with answer
// normalization, plus the validator record format.

#include <functional>
#include <string>
#include <string_view>

namespace ltot::promotion {

enum class Gate { kVerifier, kDual };
enum class Reason {
  kPass,
  kFailPlausibility,
  kFailConsistency,
  kFailConfirm,
  kFailVerifier,
};

const char* gate_name(Gate g);
const char* reason_name(Reason r);

struct PromotionDecision {
  bool accepted = false;
  Gate gate = Gate::kVerifier;
  double v_score = 0.0;
  double c_path = 0.0;
  bool confirm_passed = false;
  Reason reason = Reason::kPass;
};

// Verifier-aligned gate. Gate ordering is fixed: the envelope condition and
// confirm must already have passed before the verifier runs; a verifier that
// throws is treated as FAIL_VERIFIER. The caller charges the verifier call to
// the promotion_check category.
PromotionDecision verifier_gate(bool envelope_held, bool confirm_passed,
                                const std::function<bool()>& verifier);

struct DualGateParams {
  double tau_v = 0.85;
  double tau_c = 0.75;
};

// QA dual gate: v_score >= tau_v AND c_path >= tau_c AND confirm passed AND
// (re-derivation passed, when required). tau_c is expected to already carry
// any lm-only tightening from consistency::tighten_for_lm_only.
PromotionDecision dual_gate(double v_score, double c_path,
                            const DualGateParams& params, bool confirm_passed,
                            bool rederivation_required, bool rederivation_passed);

// Lowercase; strip punctuation except '-' and '/' between alphanumerics;
// collapse whitespace; spell out integers zero..twenty as digits; month-name
// dates to ISO year-month-day when unambiguous. Total and idempotent.
std::string normalize_answer(std::string_view raw);

struct ValidatorRecord {
  bool pass = false;
  double plausibility = 0.0;
  double consistency = 0.0;
  std::string justification;

  std::string to_json() const;
  // Throws std::invalid_argument on missing fields or out-of-range values.
  static ValidatorRecord from_json(const std::string& text);
};

}  // namespace ltot::promotion

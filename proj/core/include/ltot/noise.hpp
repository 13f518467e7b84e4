#pragma once

// Evaluator-noise families used by the synthetic environments. Sampling is a
// pure function of (model, stream, counter).

#include <cstdint>
#include <string>

#include "ltot/rng.hpp"

namespace ltot {

enum class NoiseFamily { kGaussian, kLaplace, kStudentT2, kContaminatedGaussian };

NoiseFamily noise_family_from_string(const std::string& s);
const char* noise_family_name(NoiseFamily f);

struct NoiseModel {
  NoiseFamily family = NoiseFamily::kGaussian;
  double scale = 1.0;
  double contamination = 0.05;     // contaminated-Gaussian mixing weight
  double inflation = 10.0;         // scale multiplier of the contaminating component
};

// One draw, centered at zero. Reproducible given (stream, counter).
double noise_sample(const NoiseModel& model, rng::Stream stream, std::uint64_t counter);

}  // namespace ltot

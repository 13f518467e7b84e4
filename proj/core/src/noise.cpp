#include "ltot/noise.hpp"

#include <cmath>
#include <stdexcept>

namespace ltot {

NoiseFamily noise_family_from_string(const std::string& s) {
  if (s == "gaussian") return NoiseFamily::kGaussian;
  if (s == "laplace") return NoiseFamily::kLaplace;
  if (s == "student_t2") return NoiseFamily::kStudentT2;
  if (s == "contaminated_gaussian") return NoiseFamily::kContaminatedGaussian;
  throw std::invalid_argument("unknown noise family: " + s);
}

const char* noise_family_name(NoiseFamily f) {
  switch (f) {
    case NoiseFamily::kGaussian: return "gaussian";
    case NoiseFamily::kLaplace: return "laplace";
    case NoiseFamily::kStudentT2: return "student_t2";
    case NoiseFamily::kContaminatedGaussian: return "contaminated_gaussian";
  }
  return "?";
}

double noise_sample(const NoiseModel& model, rng::Stream stream,
                    std::uint64_t counter) {
  if (!(model.scale > 0.0)) throw std::invalid_argument("noise_sample: scale <= 0");
  switch (model.family) {
    case NoiseFamily::kGaussian:
      return model.scale * rng::gaussian(stream, counter);
    case NoiseFamily::kLaplace: {
      const double u = rng::uniform(stream, counter) - 0.5;
      const double sign = u < 0.0 ? -1.0 : 1.0;
      return -model.scale * sign * std::log(1.0 - 2.0 * std::fabs(u));
    }
    case NoiseFamily::kStudentT2: {
      // Closed-form t(2) inverse CDF: t = (2p-1) / sqrt(2 p (1-p)).
      const double p = rng::uniform(stream, counter);
      return model.scale * (2.0 * p - 1.0) / std::sqrt(2.0 * p * (1.0 - p));
    }
    case NoiseFamily::kContaminatedGaussian: {
      const double mix = rng::uniform(stream, counter, 2);
      const double scale =
          mix < model.contamination ? model.scale * model.inflation : model.scale;
      return scale * rng::gaussian(stream, counter);
    }
  }
  throw std::logic_error("noise_sample: unknown family");
}

}  // namespace ltot

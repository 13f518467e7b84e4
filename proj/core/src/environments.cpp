#include "ltot/environments.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ltot::envs {

namespace {

double clamp01(double x) { return std::clamp(x, 0.0, 1.0); }

// Clamped-normal consistency draw with the configured mean; spread 0.1 by
// default, giving both clean and noisy gate regimes.
double consistency_draw(double mean, double spread, rng::Stream stream,
                        std::uint64_t counter) {
  return clamp01(mean + spread * rng::gaussian(stream.sub(0xc0de), counter));
}

}  // namespace

// ---------------------------------------------------------------------------
// HorizonBiasEnv

namespace {

struct HbState {
  char kind = 'M';  // M mainline, P planted, J junk
  int delta = 0;
  std::string lineage;
};

std::optional<HbState> hb_parse(const Payload& p) {
  if (p.size() < 3 || p[1] != ':') return std::nullopt;
  HbState s;
  s.kind = p[0];
  const auto second = p.find(':', 2);
  if (second == std::string::npos) return std::nullopt;
  try {
    s.delta = std::stoi(p.substr(2, second - 2));
  } catch (const std::exception&) {
    return std::nullopt;
  }
  s.lineage = p.substr(second + 1);
  return s;
}

Payload hb_payload(char kind, int delta, const std::string& lineage) {
  return std::string(1, kind) + ":" + std::to_string(delta) + ":" + lineage;
}

}  // namespace

ChildSample HorizonBiasEnv::root() const {
  ChildSample r;
  r.payload = hb_payload('M', 0, "r");
  r.v = spec_.mu_mainline;
  r.c_local = spec_.c_consistent;
  return r;
}

std::optional<ChildSample> HorizonBiasEnv::expand_one(const ExpandQuery& q) {
  const auto parent = hb_parse(*q.parent_payload);
  if (!parent) throw std::invalid_argument("HorizonBiasEnv: bad payload");

  char kind = parent->kind;
  int delta = parent->delta;
  if (kind == 'M' && parent->lineage == "r") {
    // Root children: slot 0 stays mainline, slot 1 plants the delayed branch,
    // the rest are inconsistent junk.
    if (q.child_index == 1) {
      kind = 'P';
      delta = spec_.planted_delta;
    } else if (q.child_index > 1) {
      kind = 'J';
    }
  } else if (kind == 'P') {
    delta = std::max(0, delta - 1);
  }

  double mu = spec_.mu_mainline;
  double c_mean = spec_.c_consistent;
  if (kind == 'P') {
    mu = spec_.mu_planted;
  } else if (kind == 'J') {
    mu = spec_.mu_junk;
    c_mean = spec_.c_inconsistent;
  }

  ChildSample out;
  out.payload =
      hb_payload(kind, delta, parent->lineage + "." + std::to_string(q.child_index));
  const double eps = noise_sample(spec_.noise, q.stream, q.counter);
  out.v = mu - spec_.lambda_bias * static_cast<double>(delta) + eps;
  out.c_local = consistency_draw(c_mean, spec_.c_spread, q.stream, q.counter);
  out.verified_solution = (kind == 'P' && delta == 0);
  return out;
}

bool HorizonBiasEnv::verify(const Payload& payload) const {
  const auto s = hb_parse(payload);
  return s && s->kind == 'P' && s->delta == 0;
}

// ---------------------------------------------------------------------------
// SyntheticRaceEnv

BranchProfile delayed_profile(double base, int h_star, double gamma, int order_m) {
  BranchProfile p;
  p.base = base;
  p.takeoff_horizon = h_star;
  if (order_m <= 1) {
    p.post_slope = gamma;
  } else {
    p.post_quad = gamma / 2.0;  // second discrete difference equals gamma
  }
  return p;
}

SyntheticRaceEnv::SyntheticRaceEnv(SyntheticSpec spec) : spec_(std::move(spec)) {
  if (spec_.profiles.empty())
    throw std::invalid_argument("SyntheticRaceEnv: no profiles");
}

double SyntheticRaceEnv::clean_value(int slot, int branch_depth) const {
  const BranchProfile& p = spec_.profiles.at(static_cast<std::size_t>(slot));
  const double d = static_cast<double>(branch_depth);
  if (p.takeoff_horizon < 0 || branch_depth <= p.takeoff_horizon)
    return p.base + p.drift * d;
  const double dd = d - static_cast<double>(p.takeoff_horizon);
  return p.base + p.drift * static_cast<double>(p.takeoff_horizon) +
         p.post_slope * dd + p.post_quad * dd * dd;
}

namespace {

std::optional<int> synthetic_slot(const Payload& p) {
  if (p.empty() || p[0] != 'L') return std::nullopt;
  const auto colon = p.find(':');
  try {
    return std::stoi(p.substr(1, colon == std::string::npos ? std::string::npos
                                                            : colon - 1));
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

int payload_depth(const Payload& p) {
  return static_cast<int>(std::count(p.begin(), p.end(), ':'));
}

}  // namespace

double SyntheticRaceEnv::leaf_value(int slot, int branch_depth,
                                    const ExpandQuery& q) const {
  const BranchProfile& p = spec_.profiles.at(static_cast<std::size_t>(slot));
  NoiseModel model = spec_.noise;
  if (spec_.drift_amplitude != 0.0 && q.rung >= 0)
    model.scale *= 1.0 + spec_.drift_amplitude * static_cast<double>(q.rung % 2);

  const double idio = noise_sample(model, q.stream, q.counter);
  double eps = idio;
  if (spec_.rho > 0.0) {
    const rng::Stream latent_stream = rng::Stream::of(
        spec_.seed, rng::kDomainCluster, static_cast<std::uint64_t>(p.cluster),
        static_cast<std::uint64_t>(branch_depth));
    const double latent = noise_sample(model, latent_stream, 0);
    eps = std::sqrt(spec_.rho) * latent + std::sqrt(1.0 - spec_.rho) * idio;
  }
  return clean_value(slot, branch_depth) + eps;
}

ChildSample SyntheticRaceEnv::root() const {
  ChildSample r;
  r.payload = "root";
  r.v = 0.5;
  r.c_local = 0.85;
  return r;
}

std::optional<ChildSample> SyntheticRaceEnv::expand_one(const ExpandQuery& q) {
  const auto slot = synthetic_slot(*q.parent_payload);
  if (!slot) throw std::invalid_argument("SyntheticRaceEnv: bad payload");
  const BranchProfile& p = spec_.profiles.at(static_cast<std::size_t>(*slot));

  const int child_depth = q.branch_depth + 1;
  ChildSample out;
  out.payload = *q.parent_payload + ":" + std::to_string(q.child_index);
  out.v = leaf_value(*slot, child_depth, q);
  out.c_local = consistency_draw(p.c_mean, spec_.c_spread, q.stream, q.counter);
  out.verified_solution = p.solution_depth >= 0 && child_depth >= p.solution_depth;
  return out;
}

bool SyntheticRaceEnv::verify(const Payload& payload) const {
  const auto slot = synthetic_slot(payload);
  if (!slot) return false;
  const BranchProfile& p = spec_.profiles.at(static_cast<std::size_t>(*slot));
  return p.solution_depth >= 0 && payload_depth(payload) >= p.solution_depth;
}

Payload SyntheticRaceEnv::answer_of(const Payload& payload) const {
  const auto slot = synthetic_slot(payload);
  if (!slot) return payload;
  const BranchProfile& p = spec_.profiles.at(static_cast<std::size_t>(*slot));
  Payload answer =
      "L" + std::to_string(*slot) + "@" + std::to_string(payload_depth(payload));
  if (p.c_mean < 0.6) {
    // Inconsistent branches do not re-derive stably: the answer depends on the
    // exact sampling lineage.
    answer += "#" + std::to_string(std::hash<std::string>{}(payload) % 9973);
  }
  return answer;
}

double SyntheticRaceEnv::mean_cluster_size() const {
  std::vector<int> clusters;
  for (const auto& p : spec_.profiles) clusters.push_back(p.cluster);
  std::sort(clusters.begin(), clusters.end());
  const auto distinct =
      std::unique(clusters.begin(), clusters.end()) - clusters.begin();
  return static_cast<double>(spec_.profiles.size()) /
         static_cast<double>(distinct);
}

std::vector<NodeId> SyntheticRaceEnv::make_pool(Tree& tree, NodeId root_id) {
  std::vector<NodeId> pool;
  pool.reserve(spec_.profiles.size());
  for (std::size_t i = 0; i < spec_.profiles.size(); ++i) {
    const rng::Stream s =
        rng::Stream::of(spec_.seed, rng::kDomainConsistency, i);
    const double c =
        consistency_draw(spec_.profiles[i].c_mean, spec_.c_spread, s, 0);
    pool.push_back(tree.add_child(root_id, "L" + std::to_string(i),
                                  clean_value(static_cast<int>(i), 0),
                                  std::max(c, 0.7), Origin::kLateral));
  }
  return pool;
}

std::vector<BranchProfile> null_pool(int n, double base) {
  std::vector<BranchProfile> out(static_cast<std::size_t>(n));
  for (auto& p : out) p.base = base;
  return out;
}

std::vector<BranchProfile> declining_null_pool(int n, double base, double drift) {
  std::vector<BranchProfile> out(static_cast<std::size_t>(n));
  for (auto& p : out) {
    p.base = base;
    p.drift = drift;
  }
  return out;
}

std::vector<BranchProfile> clustered_null_pool(int n, int n_clusters, double base) {
  std::vector<BranchProfile> out(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    out[static_cast<std::size_t>(i)].base = base;
    out[static_cast<std::size_t>(i)].cluster = i % std::max(1, n_clusters);
  }
  return out;
}

// ---------------------------------------------------------------------------
// PlantedPathEnv

ChildSample PlantedPathEnv::root() const {
  ChildSample r;
  r.payload = "p";
  r.v = spec_.base;
  r.c_local = spec_.c_local;
  return r;
}

std::optional<ChildSample> PlantedPathEnv::expand_one(const ExpandQuery& q) {
  ChildSample out;
  out.payload = *q.parent_payload + "." + std::to_string(q.child_index);
  const int child_depth = q.depth + 1;
  const double eps = noise_sample(spec_.noise, q.stream, q.counter);
  out.v = spec_.base + spec_.gain_per_depth * static_cast<double>(child_depth) -
          spec_.slot_penalty * static_cast<double>(q.child_index) + eps;
  out.c_local = spec_.c_local;
  out.verified_solution = verify(out.payload);
  return out;
}

bool PlantedPathEnv::verify(const Payload& payload) const {
  if (spec_.solution_depth < 0) return false;
  // Planted lineage: "p" followed by solution_depth ".0" steps.
  std::string expect = "p";
  for (int i = 0; i < spec_.solution_depth; ++i) expect += ".0";
  return payload == expect;
}

// ---------------------------------------------------------------------------
// Game24Env

ChildSample Game24Env::root() const {
  game24::State s;
  for (int n : spec_.instance.numbers) s.numbers.push_back(game24::Rational::of(n));
  s.canonicalize();
  ChildSample r;
  r.payload = s.payload();
  r.v = game24::heuristic(s);
  r.c_local = 1.0;
  r.verified_solution = s.solved();
  return r;
}

std::optional<ChildSample> Game24Env::expand_one(const ExpandQuery& q) {
  const auto state = game24::State::parse(*q.parent_payload);
  if (!state) throw std::invalid_argument("Game24Env: bad payload");
  if (state->numbers.size() < 2) return std::nullopt;  // terminal

  std::vector<game24::State> children = game24::expand(*state);
  std::vector<std::pair<double, std::string>> ranked;
  ranked.reserve(children.size());
  for (const auto& c : children) ranked.emplace_back(game24::heuristic(c), c.payload());
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  if (q.child_index >= static_cast<int>(ranked.size())) return std::nullopt;

  const auto& pick = ranked[static_cast<std::size_t>(q.child_index)];
  ChildSample out;
  out.payload = pick.second;
  out.v = pick.first;
  out.c_local = 1.0;  // every legal arithmetic move is syntactically sound
  const auto child_state = game24::State::parse(out.payload);
  out.verified_solution = child_state && child_state->solved();
  return out;
}

bool Game24Env::verify(const Payload& payload) const {
  const auto s = game24::State::parse(payload);
  return s && s->solved();
}

// ---------------------------------------------------------------------------
// FixtureEnv

const char* archetype_name(Archetype a) {
  switch (a) {
    case Archetype::kLateInflection: return "late_inflection";
    case Archetype::kStaircaseSpike: return "staircase_spike";
    case Archetype::kZigZagNoise: return "zigzag_noise";
    case Archetype::kEarlyBloomLateFade: return "early_bloom_late_fade";
  }
  return "?";
}

double FixtureEnv::clean_value(int slot, int branch_depth, int child_index) const {
  if (slot != 0) return spec_.base;
  const double d = static_cast<double>(branch_depth);
  const double t0 = static_cast<double>(spec_.t0);
  switch (spec_.archetype) {
    case Archetype::kLateInflection:
      return spec_.base + (d > t0 ? 0.03 * (d - t0) * (d - t0) : 0.0);
    case Archetype::kStaircaseSpike:
      // A lucky first draw at the onset depth; later draws at the same depth
      // (re-measurements) and deeper probes return to the base level.
      return spec_.base + (branch_depth == spec_.t0 && child_index == 0 ? 0.5 : 0.0);
    case Archetype::kZigZagNoise:
      return spec_.base + 1.5 * spec_.noise_scale * (branch_depth % 2 == 0 ? 1.0 : -1.0);
    case Archetype::kEarlyBloomLateFade:
      return spec_.base + 0.08 * std::min(d, t0) - 0.06 * std::max(0.0, d - t0);
  }
  return spec_.base;
}

ChildSample FixtureEnv::root() const {
  ChildSample r;
  r.payload = "root";
  r.v = spec_.base;
  r.c_local = 0.85;
  return r;
}

std::optional<ChildSample> FixtureEnv::expand_one(const ExpandQuery& q) {
  const Payload& p = *q.parent_payload;
  if (p.empty() || p[0] != 'F')
    throw std::invalid_argument("FixtureEnv: bad payload");
  const auto colon = p.find(':');
  const int slot = std::stoi(
      p.substr(1, colon == std::string::npos ? std::string::npos : colon - 1));

  ChildSample out;
  out.payload = p + ":" + std::to_string(q.child_index);
  NoiseModel noise{NoiseFamily::kGaussian, spec_.noise_scale};
  out.v = clean_value(slot, q.branch_depth + 1, q.child_index) +
          noise_sample(noise, q.stream, q.counter);
  out.c_local = 0.85;
  return out;
}

std::vector<NodeId> FixtureEnv::make_pool(Tree& tree, NodeId root_id, int n_null) {
  std::vector<NodeId> pool;
  for (int i = 0; i < n_null + 1; ++i) {
    pool.push_back(tree.add_child(root_id, "F" + std::to_string(i),
                                  clean_value(i, 0, 0), 0.85, Origin::kLateral));
  }
  return pool;
}

}  // namespace ltot::envs

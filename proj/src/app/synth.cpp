#include "crutchlab/app/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <random>

#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_real_distribution.hpp>

#include "crutchlab/grf/io.hpp"

namespace crutchlab::app {

namespace {

constexpr double pi = std::numbers::pi;

using Rng = std::mt19937_64;

double normal(Rng& rng, double sd = 1.0) { return sd * boost::random::normal_distribution<double>(0.0, 1.0)(rng); }
double uniform(Rng& rng, double lo, double hi) { return boost::random::uniform_real_distribution<double>(lo, hi)(rng); }

// Vertical force: raised-cosine rise to `peak` whose steepest slope is
// `rate` (N/s), then a half-cosine unloading.
grf::ForceSeries strike(const SynthSpec& s, double bw, double rate, int plate, Rng& rng) {
  const double peak = 0.45 * bw * (1.0 + 0.05 * std::abs(normal(rng)));
  const double rise = pi * peak / (2.0 * rate);
  const double stance = std::max(0.7, rise + 0.25) + 0.02 * normal(rng);
  const double pad = 0.2;
  const auto n = static_cast<Eigen::Index>(std::llround((stance + 2 * pad) * s.force_rate)) + 1;
  grf::ForceSeries f;
  f.sample_rate = s.force_rate;
  f.plate_id = plate;
  f.samples = Eigen::Matrix3Xd::Zero(3, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / s.force_rate - pad;
    double v = 0.0, ap = 0.0, ml = 0.0;
    if (t >= 0.0 && t <= stance) {
      v = t < rise ? 0.5 * peak * (1.0 - std::cos(pi * t / rise))
                   : 0.5 * peak * (1.0 + std::cos(pi * (t - rise) / (stance - rise)));
      ap = -0.06 * bw * std::sin(2.0 * pi * t / stance);
      ml = 0.02 * bw * std::sin(pi * t / stance);
    }
    f.samples(grf::Vertical, i) = v + normal(rng, s.force_noise);
    f.samples(grf::AP, i) = ap + normal(rng, s.force_noise);
    f.samples(grf::ML, i) = ml + normal(rng, s.force_noise);
  }
  return f;
}

grf::MarkerTrack walk(const SynthSpec& s, double speed, Rng& rng) {
  grf::MarkerTrack m;
  m.sample_rate = s.marker_rate;
  const auto n = static_cast<Eigen::Index>(4.0 * s.marker_rate);
  m.positions.resize(3, n);
  const double heading = uniform(rng, -0.3, 0.3);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / s.marker_rate;
    const double along = speed * t, sway = 0.02 * std::sin(2.0 * pi * 0.9 * t);
    m.positions.col(i) = Eigen::Vector3d(along * std::cos(heading) - sway * std::sin(heading),
                                         along * std::sin(heading) + sway * std::cos(heading),
                                         1.0 + 0.01 * std::sin(2.0 * pi * 1.8 * t));
  }
  return m;
}

double clamp_round(double v, double lo, double hi) { return std::clamp(std::round(v), lo, hi); }

nlohmann::json effects_json(const DeviceEffects& e) {
  return {{"rigid", e.rigid}, {"spring", e.spring}, {"tensegrity", e.tensegrity}};
}

}  // namespace

double DeviceEffects::of(lmm::Device d) const {
  switch (d) {
    case lmm::Device::Rigid: return rigid;
    case lmm::Device::Spring: return rigid + spring;
    case lmm::Device::Tensegrity: return rigid + tensegrity;
  }
  return rigid;
}

nlohmann::json SynthSpec::to_json() const {
  return {{"seed", seed},
          {"participants", participants},
          {"trials_per_block", trials},
          {"plates", plates},
          {"force_rate_hz", force_rate},
          {"marker_rate_hz", marker_rate},
          {"force_noise_N", force_noise},
          {"plr_vertical_BW_per_s", {{"coefficients", effects_json(plr_vertical)},
                                     {"var_participant", plr_var_participant},
                                     {"var_residual", plr_var_residual},
                                     {"floor", plr_floor}}},
          {"speed_straight_m_per_s", {{"coefficients", effects_json(speed_straight)},
                                      {"var_participant", speed_var_participant},
                                      {"var_residual", speed_var_residual}}},
          {"speed_turning_m_per_s", {{"coefficients", effects_json(speed_turning)},
                                     {"var_participant", speed_var_participant},
                                     {"var_residual", speed_var_residual}}},
          {"borg", {{"coefficients", effects_json(borg)},
                    {"turning", borg_turning},
                    {"var_participant", score_var_participant},
                    {"var_residual", score_var_residual}}},
          {"coding", "treatment, rigid baseline; spring/tensegrity are offsets from rigid"}};
}

void write_synth_bundle(const SynthSpec& s, io::OutputStage& stage) {
  if (s.participants < 1 || s.trials < 1 || s.plates < 1) throw InvalidInput("synth needs participants, trials and plates >= 1");
  if (!(s.plr_vertical.of(lmm::Device::Rigid) > 0.0)) throw InvalidInput("rigid loading rate must be positive");
  Rng rng(s.seed);
  const double sd_plr0 = std::sqrt(s.plr_var_participant), sd_plr = std::sqrt(s.plr_var_residual);
  const double sd_v0 = std::sqrt(s.speed_var_participant), sd_v = std::sqrt(s.speed_var_residual);
  const double sd_q0 = std::sqrt(s.score_var_participant), sd_q = std::sqrt(s.score_var_residual);

  for (int p = 1; p <= s.participants; ++p) {
    char pid[16];
    std::snprintf(pid, sizeof pid, "P%02d", p);
    const double bw = uniform(rng, 550.0, 950.0);
    const double u_plr = normal(rng, sd_plr0), u_speed = normal(rng, sd_v0), u_score = normal(rng, sd_q0);
    std::array<lmm::Device, 3> order{lmm::Device::Rigid, lmm::Device::Spring, lmm::Device::Tensegrity};
    int block = 0;
    for (bool turning : {false, true}) {
      std::shuffle(order.begin(), order.end(), rng);
      for (lmm::Device d : order) {
        ++block;
        for (int t = 1; t <= s.trials; ++t) {
          grf::TrialRecord meta;
          meta.key = {pid, d, block, t};
          meta.turning = turning;
          meta.body_weight = bw;
          if (t == 1) {
            const double b = s.borg.of(d) + (turning ? s.borg_turning : 0.0) + u_score + normal(rng, sd_q);
            meta.questionnaire.borg = clamp_round(b, 0, 10);
            meta.questionnaire.comfort = clamp_round(0.5 * (4.0 - b) + normal(rng, 0.7), -3, 3);
            meta.questionnaire.stability = clamp_round(1.0 + normal(rng, 1.0), -3, 3);
            meta.questionnaire.pain = clamp_round(1.0 + 0.3 * b + normal(rng, 0.8), 0, 10);
            meta.questionnaire.sus = std::clamp(std::round(75.0 - 2.0 * b + normal(rng, 8.0)), 0.0, 100.0);
          }
          char dir_name[64];
          std::snprintf(dir_name, sizeof dir_name, "%s_%s_b%d_t%d", pid, std::string(lmm::to_string(d)).c_str(), block, t);
          const std::string dir = dir_name;
          stage.write(dir + "/meta.json", grf::to_json(meta).dump(2) + "\n");
          for (int plate = 1; plate <= s.plates; ++plate) {
            const double rate = std::max(s.plr_floor, s.plr_vertical.of(d) + u_plr + normal(rng, sd_plr));
            grf::write_force_csv(strike(s, bw, rate * bw, plate, rng),
                                 stage.file(dir + "/force_" + std::to_string(plate) + ".csv"));
          }
          const DeviceEffects& sp = turning ? s.speed_turning : s.speed_straight;
          const double v = std::max(0.2, sp.of(d) + u_speed + normal(rng, sd_v));
          grf::write_marker_csv(walk(s, v, rng), stage.file(dir + "/marker.csv"));
        }
      }
    }
  }
  stage.write("truth.json", s.to_json().dump(2) + "\n");
}

}  // namespace crutchlab::app

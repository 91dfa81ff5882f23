#include "crutchlab/grf/trials.hpp"

#include <algorithm>
#include <cmath>

#include "crutchlab/grf/filter.hpp"
#include "crutchlab/grf/speed.hpp"

namespace crutchlab::grf {

void Questionnaire::validate() const {
  auto check = [](const std::optional<double>& v, double lo, double hi, const char* name) {
    if (v && (!std::isfinite(*v) || *v < lo || *v > hi))
      throw InvalidInput(std::string(name) + " score outside [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  };
  check(borg, 0, 10, "borg");
  check(comfort, -3, 3, "comfort");
  check(stability, -3, 3, "stability");
  check(pain, 0, 10, "pain");
  check(sus, 0, 100, "sus");
}

void TrialRecord::validate() const {
  if (key.participant.empty()) throw InvalidInput("trial record has no participant");
  if (!(body_weight > 0.0) || !std::isfinite(body_weight))
    throw InvalidInput(key.label() + ": body weight must be > 0");
  questionnaire.validate();
}

namespace {

lmm::LongRow row(const TrialRecord& m, const char* response, double value) {
  return {m.key.participant, m.key.device, m.key.block, m.key.trial, m.turning, response, value};
}

}  // namespace

Summary summarize_trials(const TrialInputs& in, const PipelineOptions& opt) {
  for (const auto& [key, plates] : in.forces)
    if (!in.metadata.count(key)) throw InvalidInput("force data without metadata for trial " + key.label());
  for (const auto& [key, track] : in.markers)
    if (!in.metadata.count(key)) throw InvalidInput("marker data without metadata for trial " + key.label());
  for (const auto& [key, meta] : in.metadata)
    if (!(meta.key == key)) throw InvalidInput("metadata key mismatch for trial " + key.label());

  Summary out;
  for (const auto& [key, meta] : in.metadata) {
    meta.validate();
    int stance_index = 0;
    const auto fit = in.forces.find(key);
    if (fit != in.forces.end()) {
      std::vector<ForceSeries> plates = fit->second;
      std::stable_sort(plates.begin(), plates.end(),
                       [](const ForceSeries& a, const ForceSeries& b) { return a.plate_id < b.plate_id; });
      for (const auto& raw : plates) {
        const ForceSeries series = opt.filter ? lowpass_filter(raw, opt.filter_order, opt.cutoff_hz) : raw;
        const StrikeDetection det = detect_strikes(series, opt.detection);
        for (const auto& s : det.short_runs) out.rejections.push_back({key, series.plate_id, s, "min_duration"});
        for (const auto& e : det.events) {
          const StanceCycle cycle = make_stance(series, e, meta.body_weight, key);
          const StanceVerdict verdict = validate_stance(cycle, opt.criteria);
          if (!verdict.accepted()) {
            out.rejections.push_back({key, series.plate_id, e, verdict.reasons()});
            continue;
          }
          StanceRecord rec{key, series.plate_id, stance_index++, e, cycle.duration,
                           peak_loading_rate(cycle, opt.loading), stance_impulse(cycle), normalize_stance(cycle)};
          auto& rows = out.data.rows;
          rows.push_back(row(meta, response::kPlrVertical, rec.loading_rate.peak[Vertical]));
          rows.push_back(row(meta, response::kPlrAp, rec.loading_rate.peak[AP]));
          rows.push_back(row(meta, response::kPlrMl, rec.loading_rate.peak[ML]));
          rows.push_back(row(meta, response::kImpulseVertical, rec.impulses.vertical));
          rows.push_back(row(meta, response::kImpulseBraking, rec.impulses.ap_braking));
          rows.push_back(row(meta, response::kImpulsePropulsive, rec.impulses.ap_propulsive));
          rows.push_back(row(meta, response::kImpulseMl, rec.impulses.ml));
          rows.push_back(row(meta, response::kStanceDuration, rec.duration));
          out.stances.push_back(std::move(rec));
        }
      }
    }
    const auto mit = in.markers.find(key);
    if (mit != in.markers.end())
      out.data.rows.push_back(
          row(meta, meta.turning ? response::kSpeedTurning : response::kSpeedStraight, walking_speed(mit->second)));
    const Questionnaire& q = meta.questionnaire;
    if (q.borg) out.data.rows.push_back(row(meta, "borg", *q.borg));
    if (q.comfort) out.data.rows.push_back(row(meta, "comfort", *q.comfort));
    if (q.stability) out.data.rows.push_back(row(meta, "stability", *q.stability));
    if (q.pain) out.data.rows.push_back(row(meta, "pain", *q.pain));
    if (q.sus) out.data.rows.push_back(row(meta, "sus", *q.sus));
  }
  out.data.canonicalize();
  return out;
}

}  // namespace crutchlab::grf

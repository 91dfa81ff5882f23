#include "crutchlab/grf/events.hpp"

#include <cmath>

namespace crutchlab::grf {

std::string TrialKey::label() const {
  return participant + "/" + std::string(lmm::to_string(device)) + "/block" + std::to_string(block) + "/trial" +
         std::to_string(trial);
}

void ForceSeries::validate() const {
  if (!(sample_rate > 0.0) || !std::isfinite(sample_rate)) throw InvalidInput("sample_rate must be > 0");
  if (!samples.allFinite()) throw InvalidInput("force samples must be finite");
}

StanceCycle make_stance(const ForceSeries& series, const StrikeEvent& e, double body_weight, const TrialKey& key) {
  if (!(body_weight > 0.0)) throw InvalidInput("body weight must be > 0");
  if (e.onset < 0 || e.offset < e.onset || e.offset >= series.size()) throw InvalidInput("stance event outside series");
  StanceCycle c;
  c.force = series.samples.middleCols(e.onset, e.offset - e.onset + 1);
  c.sample_rate = series.sample_rate;
  c.duration = static_cast<double>(e.offset - e.onset) / series.sample_rate;
  c.body_weight = body_weight;
  c.key = key;
  c.plate_id = series.plate_id;
  c.event = e;
  return c;
}

StrikeDetection detect_strikes(const ForceSeries& series, const DetectionOptions& options) {
  series.validate();
  if (!(options.min_duration >= 0.0)) throw InvalidInput("min_duration must be >= 0");
  StrikeDetection out;
  const Eigen::Index n = series.size();
  if (n == 0) return out;
  const auto min_samples = std::max<Eigen::Index>(1, std::llround(options.min_duration * series.sample_rate));
  const auto v = series.samples.row(Vertical);

  std::vector<StrikeEvent> runs;
  for (Eigen::Index i = 0; i < n;) {
    if (v(i) < options.threshold) {
      ++i;
      continue;
    }
    Eigen::Index j = i;
    while (j + 1 < n && v(j + 1) >= options.threshold) ++j;
    // Bridge a short dip into the previous run.
    if (!runs.empty() && i - runs.back().offset - 1 < min_samples)
      runs.back().offset = j;
    else
      runs.push_back({i, j});
    i = j + 1;
  }
  for (const auto& r : runs) {
    if (r.offset - r.onset + 1 >= min_samples)
      out.events.push_back(r);
    else
      out.short_runs.push_back(r);
  }
  return out;
}

std::vector<StrikeEvent> detect_crutch_strikes(const ForceSeries& series, double threshold, double min_duration) {
  return detect_strikes(series, {threshold, min_duration}).events;
}

}  // namespace crutchlab::grf

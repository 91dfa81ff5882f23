#pragma once

#include <filesystem>

#include "json.hpp"

#include "crutchlab/grf/trials.hpp"

namespace crutchlab::grf {

/// Force CSV `t_s,f_ap_N,f_ml_N,f_v_N`; the rate comes from the time column,
/// which must be uniformly spaced.
ForceSeries read_force_csv(const std::filesystem::path& path, int plate_id);
void write_force_csv(const ForceSeries& series, const std::filesystem::path& path);

/// Marker CSV `t_s,x_m,y_m,z_m`.
MarkerTrack read_marker_csv(const std::filesystem::path& path);
void write_marker_csv(const MarkerTrack& track, const std::filesystem::path& path);

nlohmann::json to_json(const TrialRecord& record);
TrialRecord trial_record_from_json(const nlohmann::json& j);

/// A study directory holds one sub-directory per trial with `meta.json`,
/// `force_<plate>.csv` files and an optional `marker.csv`.
TrialInputs load_trials(const std::filesystem::path& directory);

}  // namespace crutchlab::grf

#include "crutchlab/grf/io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <regex>

#include "crutchlab/io/csv.hpp"

namespace crutchlab::grf {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::vector<std::string> kForceHeader{"t_s", "f_ap_N", "f_ml_N", "f_v_N"};
const std::vector<std::string> kMarkerHeader{"t_s", "x_m", "y_m", "z_m"};

// Reads a 4-column table with a time column; returns the rate and a 3 x n block.
std::pair<double, Eigen::Matrix3Xd> read_timed(const fs::path& path, const std::vector<std::string>& header) {
  const io::CsvTable t = io::read_csv(path);
  io::expect_header(t, header, path.string());
  const auto n = static_cast<Eigen::Index>(t.rows.size());
  Eigen::VectorXd time(n);
  Eigen::Matrix3Xd data(3, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& r = t.rows[static_cast<std::size_t>(i)];
    const std::string ctx = path.string() + " row " + std::to_string(i + 1);
    time(i) = io::parse_double(r[0], ctx);
    for (int k = 0; k < 3; ++k) data(k, i) = io::parse_double(r[static_cast<std::size_t>(k) + 1], ctx);
  }
  if (!data.allFinite() || !time.allFinite()) throw InvalidInput(path.string() + ": non-finite values");
  double rate = 0.0;
  if (n >= 2) {
    const double dt = (time(n - 1) - time(0)) / static_cast<double>(n - 1);
    if (!(dt > 0.0)) throw InvalidInput(path.string() + ": time column must increase");
    for (Eigen::Index i = 1; i < n; ++i)
      if (std::abs(time(i) - time(i - 1) - dt) > 1e-6 * dt + 1e-9)
        throw InvalidInput(path.string() + ": time column is not uniformly sampled");
    rate = 1.0 / dt;
    // Snap to the nearest integer rate when the file was written at one.
    if (std::abs(rate - std::round(rate)) < 1e-6 * rate) rate = std::round(rate);
  } else {
    throw InvalidInput(path.string() + ": needs at least 2 samples");
  }
  return {rate, data};
}

void write_timed(const fs::path& path, const std::vector<std::string>& header, double rate,
                 const Eigen::Matrix3Xd& data) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
  out << '\n';
  for (Eigen::Index i = 0; i < data.cols(); ++i)
    out << io::format_double(static_cast<double>(i) / rate) << ',' << io::format_double(data(0, i)) << ','
        << io::format_double(data(1, i)) << ',' << io::format_double(data(2, i)) << '\n';
  if (!out) throw Error("failed writing " + path.string());
}

}  // namespace

ForceSeries read_force_csv(const fs::path& path, int plate_id) {
  auto [rate, data] = read_timed(path, kForceHeader);
  return {rate, std::move(data), plate_id};
}

void write_force_csv(const ForceSeries& s, const fs::path& path) {
  s.validate();
  write_timed(path, kForceHeader, s.sample_rate, s.samples);
}

MarkerTrack read_marker_csv(const fs::path& path) {
  auto [rate, data] = read_timed(path, kMarkerHeader);
  return {rate, std::move(data)};
}

void write_marker_csv(const MarkerTrack& t, const fs::path& path) {
  write_timed(path, kMarkerHeader, t.sample_rate, t.positions);
}

json to_json(const TrialRecord& r) {
  json q = json::object();
  const Questionnaire& s = r.questionnaire;
  if (s.borg) q["borg"] = *s.borg;
  if (s.comfort) q["comfort"] = *s.comfort;
  if (s.stability) q["stability"] = *s.stability;
  if (s.pain) q["pain"] = *s.pain;
  if (s.sus) q["sus"] = *s.sus;
  return {{"participant", r.key.participant},
          {"device", lmm::to_string(r.key.device)},
          {"block", r.key.block},
          {"trial", r.key.trial},
          {"turning", r.turning},
          {"body_weight_N", r.body_weight},
          {"questionnaire", q}};
}

TrialRecord trial_record_from_json(const json& j) {
  try {
    TrialRecord r;
    r.key.participant = j.at("participant").get<std::string>();
    r.key.device = lmm::device_from_string(j.at("device").get<std::string>());
    r.key.block = j.at("block").get<int>();
    r.key.trial = j.at("trial").get<int>();
    r.turning = j.at("turning").get<bool>();
    r.body_weight = j.at("body_weight_N").get<double>();
    if (j.contains("questionnaire")) {
      const auto& q = j.at("questionnaire");
      auto opt = [&q](const char* name) -> std::optional<double> {
        if (!q.contains(name) || q.at(name).is_null()) return std::nullopt;
        return q.at(name).get<double>();
      };
      r.questionnaire = {opt("borg"), opt("comfort"), opt("stability"), opt("pain"), opt("sus")};
    }
    r.validate();
    return r;
  } catch (const json::exception& e) {
    throw InvalidInput(std::string("malformed trial metadata: ") + e.what());
  }
}

TrialInputs load_trials(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw InvalidInput("not a directory: " + dir.string());
  std::vector<fs::path> trial_dirs;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_directory() && fs::exists(e.path() / "meta.json")) trial_dirs.push_back(e.path());
  std::sort(trial_dirs.begin(), trial_dirs.end());

  static const std::regex force_name(R"(force_(\d+)\.csv)");
  TrialInputs in;
  for (const auto& td : trial_dirs) {
    std::ifstream meta_in(td / "meta.json");
    json j;
    try {
      j = json::parse(meta_in);
    } catch (const json::exception& e) {
      throw InvalidInput((td / "meta.json").string() + ": " + e.what());
    }
    TrialRecord rec = trial_record_from_json(j);
    const TrialKey key = rec.key;
    if (in.metadata.count(key)) throw InvalidInput("duplicate metadata for trial " + key.label());
    in.metadata.emplace(key, std::move(rec));

    std::vector<std::pair<int, fs::path>> plates;
    for (const auto& e : fs::directory_iterator(td)) {
      std::smatch m;
      const std::string name = e.path().filename().string();
      if (std::regex_match(name, m, force_name)) plates.emplace_back(std::stoi(m[1].str()), e.path());
    }
    std::sort(plates.begin(), plates.end());
    for (const auto& [id, p] : plates) in.forces[key].push_back(read_force_csv(p, id));
    if (fs::exists(td / "marker.csv")) in.markers.emplace(key, read_marker_csv(td / "marker.csv"));
  }
  return in;
}

}  // namespace crutchlab::grf

#include "crutchlab/app/commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <regex>
#include <sstream>

#include <spdlog/spdlog.h>

#include "crutchlab/grf/io.hpp"
#include "crutchlab/io/csv.hpp"
#include "crutchlab/io/svg.hpp"
#include "crutchlab/tensegrity/serialize.hpp"

namespace crutchlab::app {

namespace fs = std::filesystem;
using nlohmann::json;
using io::format_double;

namespace {

io::RunManifest start(const std::string& command, json config) {
  io::RunManifest m;
  m.version = kVersion;
  m.command = command;
  m.config = std::move(config);
  m.started_utc = io::utc_now();
  return m;
}

json read_json(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw InvalidInput("cannot read " + p.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw InvalidInput(p.string() + ": " + e.what());
  }
}

std::string csv_line(const std::vector<std::string>& cells) {
  std::string s;
  for (std::size_t i = 0; i < cells.size(); ++i) s += (i ? "," : "") + cells[i];
  return s + "\n";
}

// ---- simulate -------------------------------------------------------------

void write_profiles(const SimulateConfig& c, const tensegrity::Configuration& pre, io::OutputStage& stage) {
  using namespace tensegrity;
  const std::vector<std::pair<std::string, DeviceModel>> devices{
      {"rigid", c.rigid}, {"spring", c.spring}, {"tensegrity", TensegrityModel{pre}}};
  std::string csv = csv_line({"device", "load_N", "displacement_m", "secant_N_per_m", "tangent_N_per_m"});
  io::Chart chart{"Axial stiffness profiles", "Displacement (mm)", "Load (N)", {}, 720, 460, false};
  for (const auto& [name, model] : devices) {
    spdlog::info("profile: {} to {} N in {} steps", name, c.max_load, c.steps);
    const Profile prof = comparison_device_profile(model, c.max_load, c.steps);
    io::Series s{name, {}, {}, {}, {}, "", true, true};
    for (const auto& pt : prof) {
      csv += csv_line({name, format_double(pt.load), format_double(pt.displacement), format_double(pt.secant),
                       format_double(pt.tangent)});
      s.x.push_back(pt.displacement * 1000.0);
      s.y.push_back(pt.load);
    }
    chart.series.push_back(std::move(s));
  }
  stage.write("profile.csv", csv);
  stage.write("profile.svg", io::render_svg(chart));
}

void write_terrain(const SimulateConfig& c, const tensegrity::Configuration& pre, const tensegrity::Terrain& terrain,
                   io::OutputStage& stage) {
  using namespace tensegrity;
  const Topology& topo = pre.topology;
  const LoadCase load = LoadCase::uniform_vertical(topo, NodeRole::TopAttachment, -c.top_load);
  spdlog::info("terrain: {} N on the top nodes", c.top_load);
  const TerrainResult r = terrain_conformance(pre, load, terrain, {});
  const Configuration& cfg = r.config;

  std::string nodes = csv_line({"node_id", "role", "x_m", "y_m", "z_m", "terrain_offset_m"});
  for (std::size_t i = 0; i < topo.node_count(); ++i) {
    const Node& n = topo.nodes()[i];
    const auto it = terrain.offsets.find(n.id);
    const auto col = static_cast<Eigen::Index>(i);
    nodes += csv_line({std::to_string(n.id), std::string(to_string(n.role)), format_double(cfg.coords(0, col)),
                       format_double(cfg.coords(1, col)), format_double(cfg.coords(2, col)),
                       format_double(it == terrain.offsets.end() ? 0.0 : it->second)});
  }
  stage.write("terrain_nodes.csv", nodes);

  // Top rows: force on the shaft attachment. Ground rows: support reaction.
  std::string reac = csv_line({"node_id", "role", "fx_N", "fy_N", "fz_N"});
  const auto top = topo.nodes_with_role(NodeRole::TopAttachment);
  for (std::size_t k = 0; k < top.size(); ++k) {
    const Vec3& f = r.top_reactions[k];
    reac += csv_line({std::to_string(topo.nodes()[top[k]].id), "top_attachment", format_double(f.x()),
                      format_double(f.y()), format_double(f.z())});
  }
  for (auto i : topo.nodes_with_role(NodeRole::GroundContact)) {
    const auto col = static_cast<Eigen::Index>(i);
    reac += csv_line({std::to_string(topo.nodes()[i].id), "ground_contact", format_double(cfg.reactions(0, col)),
                      format_double(cfg.reactions(1, col)), format_double(cfg.reactions(2, col))});
  }
  stage.write("terrain_reactions.csv", reac);

  std::string members = csv_line({"member_id", "kind", "node_a", "node_b", "length_m", "force_N", "failure_load_N"});
  const Eigen::VectorXd len = member_lengths(topo, cfg.coords);
  io::Chart side{"Side view under load", "x (mm)", "z (mm)", {}, 560, 640, true};
  for (std::size_t j = 0; j < topo.member_count(); ++j) {
    const Member& m = topo.members()[j];
    const auto jj = static_cast<Eigen::Index>(j);
    members += csv_line({std::to_string(m.id), std::string(to_string(m.kind)), std::to_string(m.node_a),
                         std::to_string(m.node_b), format_double(len(jj)), format_double(cfg.member_forces(jj)),
                         format_double(m.failure_load)});
    const auto a = static_cast<Eigen::Index>(topo.node_index(m.node_a));
    const auto b = static_cast<Eigen::Index>(topo.node_index(m.node_b));
    io::Series s{"member " + std::to_string(m.id),
                 {cfg.coords(0, a) * 1000.0, cfg.coords(0, b) * 1000.0},
                 {cfg.coords(2, a) * 1000.0, cfg.coords(2, b) * 1000.0},
                 {}, {}, m.kind == MemberKind::Strut ? "#333333" : "#d62728", false, false};
    side.series.push_back(std::move(s));
  }
  stage.write("terrain_members.csv", members);
  stage.write("terrain.svg", io::render_svg(side));

  const FailureReport fr = check_member_failure(cfg, c.module_limit);
  json failed = json::array();
  for (const auto& f : fr.members)
    failed.push_back({{"member_id", f.member_id}, {"force_N", f.force}, {"limit_N", f.limit}, {"margin_N", f.margin}});
  json offsets = json::object();
  for (const auto& [id, dz] : terrain.offsets) offsets[std::to_string(id)] = dz;
  const json summary = {
      {"top_load_N", c.top_load},
      {"terrain_offsets_m", offsets},
      {"plate_drop_m", r.drop},
      {"top_resultant_N", {r.resultant.x(), r.resultant.y(), r.resultant.z()}},
      {"horizontal_resultant_N", std::hypot(r.resultant.x(), r.resultant.y())},
      {"residual_N", cfg.residual},
      {"min_cable_force_N", [&] {
         double m = std::numeric_limits<double>::infinity();
         for (std::size_t j = 0; j < topo.member_count(); ++j)
           if (topo.members()[j].kind == MemberKind::Cable) m = std::min(m, cfg.member_forces(static_cast<Eigen::Index>(j)));
         return m;
       }()},
      {"failure", {{"members", failed}, {"top_load_N", fr.top_load}, {"module_limit_N", fr.module_limit},
                   {"module_warning", fr.module_warning}}}};
  stage.write("terrain_summary.json", summary.dump(2) + "\n");
  stage.write("terrain_configuration.json", to_json(cfg).dump(2) + "\n");
}

json simulate_json(const SimulateConfig& c) {
  return {{"topology", c.topology ? c.topology->string() : std::string("builtin")},
          {"strut_extension_m", c.strut_extension},
          {"cable_axial_rigidity_N", c.cable_axial_rigidity ? json(*c.cable_axial_rigidity) : json(nullptr)},
          {"profile", c.profile},
          {"terrain_case", c.terrain_case},
          {"max_load_N", c.max_load},
          {"steps", c.steps},
          {"terrain", c.terrain},
          {"top_load_N", c.top_load},
          {"module_failure_load_N", c.module_limit},
          {"spring", {{"stiffness_N_per_m", c.spring.stiffness}, {"travel_m", c.spring.travel},
                      {"bottom_stiffness_N_per_m", c.spring.bottom_stiffness}}},
          {"rigid_stiffness_N_per_m", c.rigid.stiffness}};
}

// ---- analyze --------------------------------------------------------------

json analyze_json(const AnalyzeConfig& c) {
  const auto& p = c.pipeline;
  return {{"input", c.input.string()},
          {"filter", p.filter},
          {"filter_order", p.filter_order},
          {"cutoff_hz", p.cutoff_hz},
          {"threshold_N", p.detection.threshold},
          {"min_duration_s", p.detection.min_duration},
          {"min_stance_s", p.criteria.min_duration},
          {"min_peak_fraction", p.criteria.min_peak_fraction},
          {"rising_fraction", p.criteria.rising_fraction},
          {"plr_window_s", p.loading.window},
          {"plr_bin_s", p.loading.bin}};
}

void write_stance_charts(const grf::Summary& s, io::OutputStage& stage) {
  std::string csv = csv_line({"device", "axis", "percent", "mean_bw", "sd_bw", "n"});
  const std::pair<grf::Axis, const char*> axes[] = {
      {grf::Vertical, "vertical"}, {grf::AP, "anteroposterior"}, {grf::ML, "mediolateral"}};
  for (const auto& [axis, name] : axes) {
    io::Chart chart{std::string("Normalized ") + name + " force", "Stance (%)", "Force (BW)", {}, 720, 460, false};
    for (lmm::Device d : lmm::kDevices) {
      std::vector<const grf::NormalizedStance*> rows;
      for (const auto& st : s.stances)
        if (st.key.device == d) rows.push_back(&st.normalized);
      if (rows.empty()) continue;
      io::Series ser{lmm::device_label(d), {}, {}, {}, {}, "", false, true};
      for (int k = 0; k < grf::kNormalizedPoints; ++k) {
        double mean = 0.0, m2 = 0.0;
        for (const auto* r : rows) mean += r->bw(axis, k);
        mean /= static_cast<double>(rows.size());
        for (const auto* r : rows) m2 += std::pow(r->bw(axis, k) - mean, 2);
        const double sd = rows.size() > 1 ? std::sqrt(m2 / static_cast<double>(rows.size() - 1)) : 0.0;
        csv += csv_line({std::string(lmm::to_string(d)), name, std::to_string(k), format_double(mean), format_double(sd),
                         std::to_string(rows.size())});
        ser.x.push_back(k);
        ser.y.push_back(mean);
        ser.lower.push_back(mean - sd);
        ser.upper.push_back(mean + sd);
      }
      chart.series.push_back(std::move(ser));
    }
    stage.write(std::string("stance_") + name + ".svg", io::render_svg(chart));
  }
  stage.write("normalized_stance.csv", csv);
}

// ---- fit --------------------------------------------------------------------

json fit_json(const FitConfig& c) {
  return {{"input", c.input.string()}, {"responses", c.responses}, {"ladder", c.ladder},
          {"reml", c.reml},            {"alpha", c.alpha},         {"baseline", c.baseline}};
}

json contrasts_json(const lmm::FitResult& f) {
  json out = json::object();
  if (!f.spec.has(lmm::Term::Device)) return out;
  json pairs = json::array();
  for (const auto& c : lmm::pairwise_contrasts(f))
    pairs.push_back({{"contrast", c.label}, {"estimate", c.estimate}, {"se", c.se}, {"z", c.z}, {"p", c.p},
                     {"p_holm", c.p_adjusted}});
  const auto eta = lmm::partial_eta_squared(f, lmm::Term::Device);
  out["pairwise_device"] = pairs;
  out["partial_eta_squared_device"] = {{"value", eta.value}, {"wald", eta.wald}, {"df_num", eta.df_num},
                                       {"df_den", eta.df_den}, {"formula", eta.formula}};
  return out;
}

std::string safe_name(const std::string& s) {
  std::string out;
  for (char ch : s) out += (std::isalnum(static_cast<unsigned char>(ch)) || ch == '_' || ch == '-') ? ch : '_';
  return out;
}

}  // namespace

tensegrity::Terrain parse_terrain(const std::string& spec, const tensegrity::Topology& topology) {
  using namespace tensegrity;
  Terrain t;
  if (spec == "flat") return t;
  static const std::regex raised(R"(raised(\d+)x([0-9]*\.?[0-9]+)mm)");
  std::smatch m;
  if (std::regex_match(spec, m, raised)) {
    const auto k = static_cast<std::size_t>(std::stoul(m[1].str()));
    const double dz = std::stod(m[2].str()) / 1000.0;
    std::vector<int> ids;
    for (auto i : topology.nodes_with_role(NodeRole::GroundContact)) ids.push_back(topology.nodes()[i].id);
    std::sort(ids.begin(), ids.end());
    if (k >= ids.size()) throw InvalidInput("terrain '" + spec + "' raises every ground node");
    for (std::size_t i = 0; i < k; ++i) t.offsets[ids[i]] = dz;
  } else if (fs::is_regular_file(spec)) {
    const json j = read_json(spec);
    if (!j.contains("offsets_m") || !j["offsets_m"].is_object()) throw InvalidInput(spec + ": expected {\"offsets_m\": {...}}");
    for (const auto& [id, dz] : j["offsets_m"].items()) {
      try {
        t.offsets[std::stoi(id)] = dz.get<double>();
      } catch (const std::exception&) {
        throw InvalidInput(spec + ": bad terrain entry '" + id + "'");
      }
    }
  } else {
    throw InvalidInput("unknown terrain '" + spec + "' (flat, raisedKxMmm or a JSON file)");
  }
  t.validate(topology);
  return t;
}

io::RunManifest cmd_simulate(const SimulateConfig& c) {
  using namespace tensegrity;
  io::RunManifest manifest = start("simulate", simulate_json(c));
  if (c.steps < 10) throw InvalidInput("--steps must be >= 10");
  if (!(c.max_load > 0.0)) throw InvalidInput("--max-load must be > 0");

  std::optional<Topology> topo;
  if (c.topology) {
    if (!fs::is_regular_file(*c.topology)) throw InvalidInput("topology file not found: " + c.topology->string());
    topo = topology_from_json(read_json(*c.topology));
    manifest.inputs = io::digest_inputs(*c.topology);
  } else {
    topo = calibrated_topology();
  }
  if (c.cable_axial_rigidity) topo = topo->with_cable_axial_rigidity(*c.cable_axial_rigidity);

  const bool do_profile = c.profile || !c.terrain_case;
  const bool do_terrain = c.terrain_case || !c.profile;
  std::optional<Terrain> terrain;
  if (do_terrain) {
    terrain = parse_terrain(c.terrain, *topo);
    if (fs::is_regular_file(c.terrain))
      for (auto& d : io::digest_inputs(c.terrain)) manifest.inputs.push_back(d);
  }

  io::OutputStage stage(c.out);
  spdlog::info("prestress: strut extension {} m", c.strut_extension);
  const Configuration pre = apply_prestress(*topo, c.strut_extension);
  stage.write("prestressed.json", to_json(pre).dump(2) + "\n");
  if (do_profile) write_profiles(c, pre, stage);
  if (do_terrain) write_terrain(c, pre, *terrain, stage);
  return stage.commit(std::move(manifest));
}

io::RunManifest cmd_analyze(const AnalyzeConfig& c) {
  io::RunManifest manifest = start("analyze", analyze_json(c));
  if (!fs::is_directory(c.input)) throw InvalidInput("input directory not found: " + c.input.string());
  manifest.inputs = io::digest_inputs(c.input);
  const grf::TrialInputs in = grf::load_trials(c.input);
  spdlog::info("analyze: {} trials", in.metadata.size());
  const grf::Summary s = grf::summarize_trials(in, c.pipeline);

  io::OutputStage stage(c.out);
  std::ostringstream longcsv;
  lmm::write_long_csv(s.data, longcsv);
  stage.write("long.csv", longcsv.str());

  std::string st = csv_line({"participant", "device", "block", "trial", "plate", "stance", "onset", "offset", "duration_s",
                             "plr_vertical", "plr_ap", "plr_ml", "plr_truncated", "impulse_vertical",
                             "impulse_ap_braking", "impulse_ap_propulsive", "impulse_ml"});
  for (const auto& r : s.stances)
    st += csv_line({r.key.participant, std::string(lmm::to_string(r.key.device)), std::to_string(r.key.block),
                    std::to_string(r.key.trial), std::to_string(r.plate_id), std::to_string(r.stance_index),
                    std::to_string(r.event.onset), std::to_string(r.event.offset), format_double(r.duration),
                    format_double(r.loading_rate.peak[grf::Vertical]), format_double(r.loading_rate.peak[grf::AP]),
                    format_double(r.loading_rate.peak[grf::ML]), r.loading_rate.truncated ? "1" : "0",
                    format_double(r.impulses.vertical), format_double(r.impulses.ap_braking),
                    format_double(r.impulses.ap_propulsive), format_double(r.impulses.ml)});
  stage.write("stances.csv", st);

  std::string rej = csv_line({"participant", "device", "block", "trial", "plate", "onset", "offset", "reasons"});
  for (const auto& r : s.rejections)
    rej += csv_line({r.key.participant, std::string(lmm::to_string(r.key.device)), std::to_string(r.key.block),
                     std::to_string(r.key.trial), std::to_string(r.plate_id), std::to_string(r.event.onset),
                     std::to_string(r.event.offset), r.reasons});
  stage.write("rejections.csv", rej);
  write_stance_charts(s, stage);
  spdlog::info("analyze: {} stances kept, {} rejected", s.stances.size(), s.rejections.size());
  return stage.commit(std::move(manifest));
}

io::RunManifest cmd_fit(const FitConfig& c) {
  io::RunManifest manifest = start("fit", fit_json(c));
  if (!fs::is_regular_file(c.input)) throw InvalidInput("long-format CSV not found: " + c.input.string());
  manifest.inputs = io::digest_inputs(c.input);
  const lmm::LongDataset data = lmm::read_long_csv(c.input);
  const std::vector<std::string> responses = c.responses.empty() ? data.responses() : c.responses;
  const lmm::Device baseline = lmm::device_from_string(c.baseline);
  const lmm::Method method = c.reml ? lmm::Method::REML : lmm::Method::ML;
  if (c.reml && c.ladder != "none")
    throw InvalidInput("--reml cannot be used with a model ladder: likelihood ratio tests between REML fits with "
                       "different fixed effects are invalid (use --ladder none)");

  io::OutputStage stage(c.out);
  std::string all_tables;
  for (const auto& response : responses) {
    if (data.select(response).rows.empty()) throw InvalidInput("response '" + response + "' not in " + c.input.string());
    lmm::LadderKind kind = lmm::ladder_for_response(response);
    if (c.ladder == "kinetic") kind = lmm::LadderKind::Kinetic;
    else if (c.ladder == "speed") kind = lmm::LadderKind::Speed;
    else if (c.ladder == "questionnaire") kind = lmm::LadderKind::Questionnaire;
    else if (c.ladder != "auto" && c.ladder != "none") throw InvalidInput("unknown ladder '" + c.ladder + "'");
    const std::string base = safe_name(response);
    spdlog::info("fit: {}", response);

    if (c.ladder == "none") {
      const lmm::ModelSpec spec{response, lmm::ladder_terms(kind), method, baseline};
      const lmm::FitResult f = lmm::fit_random_intercept(spec, data);
      json j = lmm::to_json(f);
      j["contrasts"] = contrasts_json(f);
      stage.write(base + "_fit.json", j.dump(2) + "\n");
      continue;
    }
    const lmm::LadderResult l = lmm::model_ladder(data, response, lmm::ladder_terms(kind), {c.alpha, method, baseline});
    const std::string md = lmm::ladder_markdown(l);
    std::ostringstream csv;
    lmm::write_ladder_csv(l, csv);
    json j = lmm::to_json(l);
    j["selected_contrasts"] = contrasts_json(l.fits[static_cast<std::size_t>(l.selected)]);
    stage.write(base + "_table.md", md);
    stage.write(base + "_table.csv", csv.str());
    stage.write(base + "_fit.json", j.dump(2) + "\n");
    all_tables += md + "\n";
  }
  stage.write("tables.md", all_tables);
  return stage.commit(std::move(manifest));
}

io::RunManifest cmd_synth(const SynthConfig& c) {
  io::RunManifest manifest = start("synth", c.spec.to_json());
  io::OutputStage stage(c.out);
  write_synth_bundle(c.spec, stage);
  return stage.commit(std::move(manifest));
}

io::RunManifest cmd_calibrate(const CalibrateConfig& c) {
  using namespace tensegrity;
  io::RunManifest manifest = start("calibrate", {{"initial_stiffness_N_per_m", c.targets.initial_stiffness},
                                                 {"loaded_stiffness_N_per_m", c.targets.loaded_stiffness},
                                                 {"loaded_at_N", c.targets.loaded_at}});
  const CalibrationResult r = calibrate(build_two_cell_column(), c.targets);
  io::OutputStage stage(c.out);
  const json j = {{"strut_extension_m", r.strut_extension},
                  {"cable_axial_rigidity_N", r.cable_axial_rigidity},
                  {"initial_stiffness_N_per_m", r.initial_stiffness},
                  {"loaded_stiffness_N_per_m", r.loaded_stiffness},
                  {"evaluations", r.evaluations},
                  {"cost", r.cost}};
  stage.write("calibration.json", j.dump(2) + "\n");
  return stage.commit(std::move(manifest));
}

}  // namespace crutchlab::app

// Acceptance runner: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

#include "crutchlab/app/cli.hpp"
#include "crutchlab/grf/events.hpp"
#include "crutchlab/grf/kinetics.hpp"
#include "crutchlab/grf/stance.hpp"
#include "crutchlab/lmm/inference.hpp"
#include "crutchlab/lmm/ladder.hpp"
#include "crutchlab/lmm/simulate.hpp"
#include "crutchlab/tensegrity/calibration.hpp"
#include "crutchlab/tensegrity/statics.hpp"
#include "json.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using namespace crutchlab;
using Eigen::Index;
using Eigen::VectorXd;
constexpr double pi = std::numbers::pi;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

double min_cable(const tensegrity::Configuration& c) {
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < c.topology.member_count(); ++j)
    if (c.topology.members()[j].kind == tensegrity::MemberKind::Cable)
      m = std::min(m, c.member_forces(static_cast<Index>(j)));
  return m;
}

lmm::SimulationTruth truth(std::vector<lmm::Term> terms, std::vector<double> beta, double v0, double v) {
  lmm::SimulationTruth t;
  t.spec.response = "y";
  t.spec.terms = std::move(terms);
  t.beta = Eigen::Map<VectorXd>(beta.data(), static_cast<Index>(beta.size()));
  t.var_participant = v0;
  t.var_residual = v;
  return t;
}

// ---------------------------------------------------------------------------

void information_criteria(Outcome& o) {
  const auto ic = lmm::information_criteria(-1751.1475, 3, 742);
  o.detail << "AIC=" << ic.aic << " BIC=" << ic.bic;
  o.require(std::abs(ic.aic - 3508.295) < 1e-3, "AIC 3508.295");
  o.require(std::abs(ic.bic - 3522.123) < 1e-3, "BIC 3522.123");
}

void likelihood_ratio(Outcome& o) {
  const auto lrt = lmm::likelihood_ratio(-1751.1475, -1611.1931, 2);
  o.detail << "chi2=" << lrt.chi2 << " df=" << lrt.df << " p=" << lrt.p;
  o.require(std::abs(lrt.chi2 - 279.909) < 1e-3, "chi2 279.909");
  o.require(lrt.df == 2, "df 2");
  o.require(lrt.p < 1e-16, "p < 1e-16");
}

void spring_model(Outcome& o) {
  const tensegrity::SpringModel spring{};
  const double knee_load = spring.stiffness * spring.travel;
  const auto p = tensegrity::comparison_device_profile(spring, 1000.0, 40);
  double worst = 0.0;
  for (const auto& pt : p) {
    const double expect = pt.load <= knee_load ? pt.load / spring.stiffness
                                               : spring.travel + (pt.load - knee_load) / spring.bottom_stiffness;
    worst = std::max(worst, std::abs(pt.displacement - expect));
    if (pt.load > 0.0 && pt.load < knee_load) o.require(pt.tangent == 10800.0, "tangent 10800 below the knee");
  }
  o.detail << "knee=" << knee_load << " N at " << tensegrity::spring_displacement(spring, knee_load)
           << " m, max piecewise error=" << worst;
  o.require(spring.stiffness == 10800.0, "slope 10800 N/m");
  o.require(std::abs(knee_load - 378.0) < 1e-9, "knee load 378 N");
  o.require(std::abs(tensegrity::spring_displacement(spring, 378.0) - 0.035) < 1e-9, "knee at 0.035 m");
  o.require(worst < 1e-9, "piecewise values within 1e-9");
}

void calibration(Outcome& o) {
  const tensegrity::CalibrationResult cal = tensegrity::calibrate(tensegrity::build_two_cell_column());
  const tensegrity::Configuration c =
      tensegrity::apply_prestress(tensegrity::build_two_cell_column().with_cable_axial_rigidity(cal.cable_axial_rigidity),
                                  cal.strut_extension);
  const auto p = tensegrity::axial_load_profile(c, 1100.0, 22);
  const double k0 = p.front().tangent, k1000 = p[20].tangent;
  bool monotone = true;
  for (std::size_t i = 1; i < p.size(); ++i) monotone = monotone && p[i].displacement >= p[i - 1].displacement;
  o.detail << "ext=" << cal.strut_extension << " m EA=" << cal.cable_axial_rigidity << " N k0=" << k0
           << " k1000=" << k1000 << " ratio=" << k1000 / k0;
  o.require(std::abs(k0 - 16300.0) <= 0.3 * 16300.0, "k0 within 30% of 16.3 kN/m");
  o.require(std::abs(p[20].load - 1000.0) < 1e-9, "profile point at 1000 N");
  o.require(k1000 >= 5.0 * k0, "k1000 >= 5 k0");
  o.require(monotone, "monotone displacement 0-1100 N");
}

void terrain(Outcome& o) {
  const tensegrity::Configuration c = tensegrity::calibrated_configuration();
  const auto lc = tensegrity::LoadCase::uniform_vertical(c.topology, tensegrity::NodeRole::TopAttachment, -500.0);
  tensegrity::Terrain tr;
  tr.offsets[0] = 0.005;
  tr.offsets[1] = 0.005;
  const auto r = tensegrity::terrain_conformance(c, lc, tr);
  const double horizontal = std::hypot(r.resultant.x(), r.resultant.y());
  const auto flat = tensegrity::terrain_conformance(c, lc, {});
  const double flat_h = std::hypot(flat.resultant.x(), flat.resultant.y());
  o.detail << "residual=" << r.config.residual << " N min cable=" << min_cable(r.config)
           << " N horizontal=" << horizontal << " N flat horizontal=" << flat_h << " N";
  o.require(r.config.residual < 1e-6, "residual < 1e-6 N");
  o.require(min_cable(r.config) >= -1e-9, "cables >= -1e-9 N");
  o.require(horizontal > 1e-3, "nonzero horizontal reaction");
  o.require(flat_h < 1e-6, "flat horizontal < 1e-6 N");
}

void solver_oracles(Outcome& o) {
  using namespace tensegrity;
  std::mt19937_64 rng(20240611);
  std::uniform_real_distribution<double> ext(0.0005, 0.02);
  std::uniform_real_distribution<double> ea(2e3, 2e5);
  std::normal_distribution<double> jitter(0.0, 1e-6);
  const Topology base = build_two_cell_column();
  double worst_fd = 0.0;
  for (int k = 0; k < 20; ++k) {
    const Configuration c = apply_prestress(base.with_cable_axial_rigidity(ea(rng)), ext(rng));
    Coordinates x = c.coords;
    for (Index i = 0; i < x.size(); ++i) x.data()[i] += jitter(rng);
    const Eigen::MatrixXd kk = tangent_stiffness(c.topology, x);
    const Eigen::MatrixXd kfd = oracle::fd_tangent(c.topology, x, 1e-7);
    worst_fd = std::max(worst_fd, (kk - kfd).cwiseAbs().maxCoeff() / kk.cwiseAbs().maxCoeff());
  }

  const double bar_ea = 2.0e5, length = 0.3, force = 120.0;
  std::vector<Node> nodes{{0, Vec3::Zero(), NodeRole::GroundContact}, {1, Vec3(length, 0, 0), NodeRole::TopAttachment}};
  Member m;
  m.id = 0;
  m.kind = MemberKind::Cable;
  m.node_a = 0;
  m.node_b = 1;
  m.axial_rigidity = bar_ea;
  m.rest_length = length;
  const Topology bar(nodes, {m});
  LoadCase lc;
  lc.forces[1] = Vec3(force, 0, 0);
  const Configuration s = solve_static(apply_prestress(bar, 0.0), lc, {});
  const double bar_err = std::abs((s.coords(0, 1) - length) - force * length / bar_ea) / (force * length / bar_ea);

  const Coordinates x = base.reference_coordinates();
  const VectorXd q = find_self_stress(base, x).force_densities;
  const double null_res = (equilibrium_matrix(base, x) * q).lpNorm<Eigen::Infinity>() /
                          (q.cwiseAbs().maxCoeff() * member_lengths(base, x).maxCoeff());

  o.detail << "max FD rel error=" << worst_fd << " bar rel error=" << bar_err << " null-space residual=" << null_res;
  o.require(worst_fd < 1e-4, "FD tangent within 1e-4");
  o.require(bar_err < 1e-9, "single bar within 1e-9");
  o.require(null_res < 1e-8, "self-stress residual < 1e-8");
}

grf::StanceCycle vertical_cycle(const VectorXd& v, double rate, double bw) {
  grf::StanceCycle c;
  c.sample_rate = rate;
  c.force = Eigen::Matrix3Xd::Zero(3, v.size());
  c.force.row(grf::Vertical) = v.transpose();
  c.duration = static_cast<double>(v.size() - 1) / rate;
  c.body_weight = bw;
  return c;
}

void grf_oracles(Outcome& o) {
  using namespace grf;
  const double a = 700.0, t = 0.6, rate = 1000.0, bw = 700.0;
  const auto n = static_cast<Index>(std::llround(t * rate)) + 1;
  VectorXd hs(n);
  for (Index i = 0; i < n; ++i) hs(i) = a * std::sin(pi * static_cast<double>(i) / static_cast<double>(n - 1));
  const double impulse = stance_impulse(vertical_cycle(hs, rate, bw)).vertical;
  const double impulse_err = std::abs(impulse - 2.0 * a * t / pi / bw);

  VectorXd ramp = VectorXd::Constant(600, 350.0);
  for (Index i = 0; i <= 100; ++i) ramp(i) = 3.5 * static_cast<double>(i);
  const double rate_peak = peak_loading_rate(vertical_cycle(ramp, rate, bw)).peak[Vertical];

  ForceSeries series;
  series.sample_rate = rate;
  series.samples = Eigen::Matrix3Xd::Zero(3, 1000);
  series.samples.row(Vertical).segment(100, 50).setConstant(30.0);
  series.samples.row(Vertical).segment(400, 200).setConstant(300.0);
  const auto ev = detect_crutch_strikes(series);
  const bool exact = ev.size() == 2 && ev[0].onset == 100 && ev[0].offset == 149 && ev[1].onset == 400 &&
                     ev[1].offset == 599;

  StanceCycle c = vertical_cycle(hs, rate, 640.0);
  for (Index i = 0; i < c.size(); ++i) {
    c.force(AP, i) = 40.0 * std::sin(2 * pi * static_cast<double>(i) / 600.0 + 0.3);
    c.force(ML, i) = -9.0 * std::cos(pi * static_cast<double>(i) / 600.0);
  }
  double scale_err = 0.0;
  for (double s : {0.37, 2.5, 11.0}) {
    StanceCycle d = c;
    d.force *= s;
    d.body_weight *= s;
    scale_err = std::max(scale_err, (normalize_stance(c).bw - normalize_stance(d).bw).cwiseAbs().maxCoeff());
  }

  o.detail << "impulse error=" << impulse_err << " ramp rate=" << rate_peak << " BW/s strikes="
           << (exact ? "exact" : "wrong") << " scale error=" << scale_err;
  o.require(impulse_err < 1e-6, "half-sine impulse within 1e-6");
  o.require(rate_peak == 5.0, "ramp peak loading rate exactly 5 BW/s");
  o.require(exact, "strike indices exact");
  o.require(scale_err < 1e-12, "normalization invariant within 1e-12");
}

void lmm_oracles(Outcome& o) {
  using namespace lmm;
  double worst_nm = 0.0;
  bool never_beaten = true;
  for (int k = 0; k < 20; ++k) {
    const bool with_device = k % 2 == 1;
    const std::vector<Term> terms = with_device ? std::vector<Term>{Term::Device} : std::vector<Term>{};
    const std::vector<double> beta = with_device ? std::vector<double>{3.0, -0.6, 0.4} : std::vector<double>{3.0};
    const double v0 = k % 5 == 0 ? 0.0 : 0.2 * (k % 5);
    const LongDataset data = simulate_dataset(truth(terms, beta, v0, 1.0), {6 + k % 4, 1, 3, false}, 500 + k);
    const ModelSpec spec{"y", terms, Method::ML, Device::Rigid};
    const Design d = design_matrix(spec, data);
    const FitResult fit = fit_random_intercept(spec, d);
    const Index p = d.n_fixed();
    auto neg = [&](const VectorXd& z) { return -oracle::dense_loglik(d, z.head(p), std::exp(z(p)), std::exp(z(p + 1))); };
    VectorXd z0(p + 2);
    z0.head(p) = d.x.colPivHouseholderQr().solve(d.y);
    z0(p) = std::log(0.5);
    z0(p + 1) = std::log(0.5);
    const double ll_oracle = -neg(oracle::nelder_mead(neg, z0, 0.5, 6));
    worst_nm = std::max(worst_nm, std::abs(fit.loglik - ll_oracle));
    never_beaten = never_beaten && ll_oracle <= fit.loglik + 1e-9;
  }

  const LongDataset ols_data =
      simulate_dataset(truth({Term::Device, Term::Trial}, {5, -1, 0.5, 0.2}, 0.0, 2.0), {12, 2, 4, false}, 7);
  const ModelSpec ols_spec{"y", {Term::Device, Term::Trial}, Method::ML, Device::Rigid};
  const Design od = design_matrix(ols_spec, ols_data);
  const VectorXd b_ols = od.x.colPivHouseholderQr().solve(od.y);
  const double rss = (od.y - od.x * b_ols).squaredNorm();
  const double nn = static_cast<double>(od.n_obs());
  const FitResult at0 = fit_at_theta(ols_spec, od, 0.0);
  const double ols_err = std::max((at0.beta - b_ols).cwiseAbs().maxCoeff(),
                                  std::abs(at0.loglik + 0.5 * nn * (std::log(2 * pi * rss / nn) + 1.0)) / nn);

  // Balanced one-way layout: ANOVA mean squares give the estimators directly.
  double worst_cf = 0.0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const int groups = 9, per = 6;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    LongDataset data;
    std::vector<double> means(groups, 0.0);
    double grand = 0.0;
    for (int g = 0; g < groups; ++g) {
      const double u = 1.3 * nd(rng);
      for (int j = 0; j < per; ++j) {
        const double y = 2.0 + u + nd(rng);
        data.rows.push_back({"G" + std::to_string(g), Device::Rigid, 1, j + 1, false, "y", y});
        means[static_cast<std::size_t>(g)] += y / per;
        grand += y / (groups * per);
      }
    }
    double ssb = 0.0, ssw = 0.0;
    for (int g = 0; g < groups; ++g) ssb += per * std::pow(means[static_cast<std::size_t>(g)] - grand, 2);
    for (std::size_t i = 0; i < data.rows.size(); ++i) ssw += std::pow(data.rows[i].value - means[i / per], 2);
    const double msw = ssw / (groups * (per - 1)), msb = ssb / (groups - 1);
    const FitResult ml = fit_random_intercept({"y", {}, Method::ML, Device::Rigid}, data);
    const FitResult reml = fit_random_intercept({"y", {}, Method::REML, Device::Rigid}, data);
    worst_cf = std::max({worst_cf, std::abs(ml.sigma2_residual - msw),
                         std::abs(ml.sigma2_participant - std::max(0.0, (ssb / groups - msw) / per)),
                         std::abs(reml.sigma2_residual - msw),
                         std::abs(reml.sigma2_participant - std::max(0.0, (msb - msw) / per))});
  }

  o.detail << "max |ll - brute force|=" << worst_nm << " OLS error=" << ols_err << " closed-form error=" << worst_cf;
  o.require(worst_nm < 1e-4, "brute-force ML within 1e-4");
  o.require(never_beaten, "brute force never beats the fit");
  o.require(ols_err < 1e-10, "theta = 0 reproduces OLS");
  o.require(worst_cf < 1e-8, "closed forms within 1e-8");
}

void ladder_characteristics(Outcome& o) {
  using namespace lmm;
  // SE of a device contrast is sqrt(2 / (8 * 18)) = 0.118 with unit residual
  // variance; 0.47 is about 4 SE.
  const SimulationTruth alt = truth({Term::Device}, {5.0, -0.47, -0.47}, 1.0, 1.0);
  const SimulationTruth null = truth({Term::Device}, {5.0, 0.0, 0.0}, 1.0, 1.0);
  int hit_alt = 0, hit_null = 0;
  for (int i = 0; i < 100; ++i) {
    const auto seed = 1000 + static_cast<std::uint64_t>(i);
    hit_alt += model_ladder(simulate_dataset(alt, {}, seed), "y", ladder_terms(LadderKind::Kinetic)).selected == 1;
    hit_null += model_ladder(simulate_dataset(null, {}, seed), "y", ladder_terms(LadderKind::Kinetic)).selected == 0;
  }
  o.detail << "true model " << hit_alt << "/100, Model 0 under null " << hit_null << "/100";
  o.require(hit_alt >= 90, "true-model selection >= 90%");
  o.require(std::abs(hit_null - 95) <= 7, "null selection 95 +/- 7");
}

int quiet_run(const std::vector<std::string>& args) {
  std::ostringstream sink;
  auto* old_out = std::cout.rdbuf(sink.rdbuf());
  auto* old_err = std::cerr.rdbuf(sink.rdbuf());
  const int code = app::run(args);
  std::cout.rdbuf(old_out);
  std::cerr.rdbuf(old_err);
  return code;
}

void end_to_end(Outcome& o) {
  const fs::path root = fs::temp_directory_path() / "crutchlab_acceptance";
  fs::remove_all(root);
  const fs::path syn = root / "synth", ana = root / "analyze", fit = root / "fit";
  o.require(quiet_run({"synth", "--out", syn.string(), "--seed", "11"}) == 0, "synth exit 0");
  o.require(quiet_run({"analyze", "--input", syn.string(), "--out", ana.string()}) == 0, "analyze exit 0");
  o.require(quiet_run({"fit", "--input", (ana / "long.csv").string(), "--out", fit.string(), "--response",
                       "plr_vertical"}) == 0,
            "fit exit 0");
  if (!o.pass) return;
  std::ifstream in(fit / "plr_vertical_fit.json");
  const nlohmann::json j = nlohmann::json::parse(in);
  const int sel = j["selected"].get<int>();
  o.detail << "selected Model " << sel;
  int recovered = 0;
  for (const auto& c : j["models"][sel]["coefficients"]) {
    const std::string label = c["label"];
    if (label != "Spring" && label != "Tensegrity") continue;
    const double est = c["estimate"], p = c["p"];
    o.detail << " " << label << "=" << est << " (p=" << p << ")";
    recovered += est < 0.0 && p < 0.05;
  }
  o.require(recovered == 2, "both device effects negative with p < 0.05");
  fs::remove_all(root);
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<void(Outcome&)>>> criteria{
      {"information-criterion identity", information_criteria},
      {"likelihood-ratio arithmetic", likelihood_ratio},
      {"spring device model", spring_model},
      {"tensegrity calibration", calibration},
      {"terrain conformance", terrain},
      {"structural solver oracles", solver_oracles},
      {"GRF analytic oracles", grf_oracles},
      {"LMM oracle equivalence", lmm_oracles},
      {"ladder operating characteristics", ladder_characteristics},
      {"end-to-end sign recovery", end_to_end},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    const auto start = std::chrono::steady_clock::now();
    try {
      criteria[i].second(o);
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << " [exception: " << e.what() << "]";
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    failed += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << " " << i + 1 << " " << criteria[i].first << ": " << o.detail.str()
              << " (" << std::fixed << std::setprecision(1) << secs << " s)" << std::defaultfloat
              << std::setprecision(6) << std::endl;
  }
  std::cout << (criteria.size() - static_cast<std::size_t>(failed)) << "/" << criteria.size() << " criteria passed"
            << std::endl;
  return failed == 0 ? 0 : 1;
}

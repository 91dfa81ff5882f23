#include "crutchlab/tensegrity/calibration.hpp"

#include <unsupported/Eigen/NonLinearOptimization>

#include <cmath>

namespace crutchlab::tensegrity {

std::pair<double, double> anchor_stiffnesses(const Topology& base, double strut_extension, double cable_axial_rigidity,
                                             double loaded_at, const SolverOptions& options) {
  const Configuration c = apply_prestress(base.with_cable_axial_rigidity(cable_axial_rigidity), strut_extension, options);
  PlateModel model(c, {}, options);
  const double k0 = model.at_drop(0.0).tangent;
  // Approach the loaded anchor in a few load steps so each Newton solve on
  // the plate drop starts close.
  double k1 = k0;
  for (int i = 1; i <= 4; ++i) k1 = model.at_load(loaded_at * i / 4.0).tangent;
  return {k0, k1};
}

namespace {

struct AnchorFunctor {
  using Scalar = double;
  using InputType = Eigen::VectorXd;
  using ValueType = Eigen::VectorXd;
  using JacobianType = Eigen::MatrixXd;
  enum { InputsAtCompileTime = 2, ValuesAtCompileTime = 2 };

  const Topology& base;
  CalibrationTargets targets;
  SolverOptions options;
  int* evaluations;

  int inputs() const { return 2; }
  int values() const { return 2; }

  int operator()(const Eigen::VectorXd& p, Eigen::VectorXd& r) const {
    ++*evaluations;
    try {
      const auto [k0, k1] = anchor_stiffnesses(base, std::exp(p(0)), std::exp(p(1)), targets.loaded_at, options);
      if (!(k0 > 0.0) || !(k1 > 0.0)) return -1;
      r(0) = std::log(k0 / targets.initial_stiffness);
      r(1) = std::log(k1 / targets.loaded_stiffness);
    } catch (const Error&) {
      return -1;  // tells the minimizer to stop; handled by the caller
    }
    return 0;
  }

  int df(const Eigen::VectorXd& p, Eigen::MatrixXd& jac) const {
    constexpr double h = 1e-4;
    Eigen::VectorXd rp(2), rm(2);
    for (int j = 0; j < 2; ++j) {
      Eigen::VectorXd q = p;
      q(j) = p(j) + h;
      if ((*this)(q, rp) != 0) return -1;
      q(j) = p(j) - h;
      if ((*this)(q, rm) != 0) return -1;
      jac.col(j) = (rp - rm) / (2.0 * h);
    }
    return 0;
  }
};

}  // namespace

CalibrationResult calibrate(const Topology& base, const CalibrationTargets& targets, const CalibrationStart& start,
                            const SolverOptions& options) {
  if (!(targets.initial_stiffness > 0.0) || !(targets.loaded_stiffness > 0.0) || !(targets.loaded_at > 0.0))
    throw InvalidInput("calibration targets must be > 0");
  if (!(start.strut_extension > 0.0) || !(start.cable_axial_rigidity > 0.0))
    throw InvalidInput("calibration start must be > 0");

  int evaluations = 0;
  AnchorFunctor f{base, targets, options, &evaluations};
  Eigen::VectorXd p(2);
  p << std::log(start.strut_extension), std::log(start.cable_axial_rigidity);
  Eigen::LevenbergMarquardt<AnchorFunctor> lm(f);
  lm.parameters.xtol = 1e-12;
  lm.parameters.ftol = 1e-14;
  lm.parameters.maxfev = 400;
  const auto status = lm.minimize(p);
  if (status == Eigen::LevenbergMarquardtSpace::ImproperInputParameters)
    throw InvalidInput("calibration setup rejected by the minimizer");

  Eigen::VectorXd r(2);
  if (f(p, r) != 0) throw NonConvergence(evaluations, std::numeric_limits<double>::infinity(), "calibration");
  CalibrationResult out;
  out.strut_extension = std::exp(p(0));
  out.cable_axial_rigidity = std::exp(p(1));
  out.initial_stiffness = targets.initial_stiffness * std::exp(r(0));
  out.loaded_stiffness = targets.loaded_stiffness * std::exp(r(1));
  out.cost = r.squaredNorm();
  out.evaluations = evaluations;
  return out;
}

Topology calibrated_topology() {
  return build_two_cell_column().with_cable_axial_rigidity(CalibratedDefaults::cable_axial_rigidity);
}

Configuration calibrated_configuration(const SolverOptions& options) {
  return apply_prestress(calibrated_topology(), CalibratedDefaults::strut_extension, options);
}

}  // namespace crutchlab::tensegrity

#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "crutchlab/lmm/dataset.hpp"

namespace crutchlab::lmm {

enum class Term { Device, Block, Trial, Turning, DeviceTrial, DeviceBlock, DeviceTurning };

std::string_view to_string(Term t);
Term term_from_string(std::string_view s);

enum class Method { ML, REML };

std::string_view to_string(Method m);

/// Random-intercept model with participant grouping.
struct ModelSpec {
  std::string response;
  std::vector<Term> terms;
  Method method = Method::ML;
  Device baseline = Device::Rigid;

  /// Interactions need both main effects; no term twice.
  void validate() const;
  bool has(Term t) const;
};

/// Fixed-effect design for one response.
struct Design {
  Eigen::MatrixXd x;
  Eigen::VectorXd y;
  std::vector<std::string> labels;
  /// Group index per row, into group_names (sorted).
  std::vector<int> group;
  std::vector<std::string> group_names;

  Eigen::Index n_obs() const { return x.rows(); }
  Eigen::Index n_fixed() const { return x.cols(); }
  int n_groups() const { return static_cast<int>(group_names.size()); }
};

/// Capitalized device name as used in coefficient labels ("Spring").
std::string device_label(Device d);
std::string baseline_label(Device baseline);

/// Rows of `data` whose response matches spec.response. Treatment coding
/// with spec.baseline as reference; Block and Trial enter as raw integers.
Design design_matrix(const ModelSpec& spec, const LongDataset& data);

/// Column positions of the coefficients belonging to `term`.
std::vector<Eigen::Index> term_columns(const ModelSpec& spec, Term term);

}  // namespace crutchlab::lmm

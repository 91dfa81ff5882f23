#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "crutchlab/lmm/inference.hpp"

namespace crutchlab::lmm {

enum class LadderKind { Kinetic, Speed, Questionnaire };

/// Maximal term sequences, added one term per model.
std::vector<Term> ladder_terms(LadderKind kind);
/// speed_* responses use the speed ladder, questionnaire scores the
/// questionnaire ladder, everything else the kinetic ladder.
LadderKind ladder_for_response(std::string_view response);

struct LadderOptions {
  double alpha = 0.05;
  Method method = Method::ML;
  Device baseline = Device::Rigid;
};

struct LadderResult {
  std::string response;
  std::vector<Term> sequence;
  std::vector<FitResult> fits;  // Model 0 .. Model K
  std::vector<LrtResult> steps;  // steps[k - 1] compares Model k - 1 with Model k
  int selected = 0;
  double alpha = 0.05;
};

/// Forward selection: keep adding terms while the step LRT has p < alpha.
/// Throws InvalidInput for REML (the LRT chain would compare REML fits with
/// different fixed effects).
LadderResult model_ladder(const LongDataset& data, const std::string& response, const std::vector<Term>& sequence,
                          const LadderOptions& options = {});

/// "***" for p < 0.001, "**" < 0.01, "*" < 0.05.
std::string stars(double p);

std::string ladder_markdown(const LadderResult& ladder);
void write_ladder_csv(const LadderResult& ladder, std::ostream& out);
nlohmann::json to_json(const LadderResult& ladder);

}  // namespace crutchlab::lmm

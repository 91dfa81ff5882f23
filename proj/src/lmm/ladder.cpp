#include "crutchlab/lmm/ladder.hpp"

#include <algorithm>
#include <cstdio>
#include <future>
#include <ostream>
#include <sstream>

namespace crutchlab::lmm {

std::vector<Term> ladder_terms(LadderKind kind) {
  switch (kind) {
    case LadderKind::Kinetic: return {Term::Device, Term::Block, Term::Trial, Term::DeviceTrial};
    case LadderKind::Speed: return {Term::Device, Term::Block, Term::DeviceBlock, Term::Trial, Term::DeviceTrial};
    case LadderKind::Questionnaire: return {Term::Device, Term::Turning, Term::DeviceTurning};
  }
  return {};
}

LadderKind ladder_for_response(std::string_view response) {
  if (response.rfind("speed", 0) == 0) return LadderKind::Speed;
  for (const char* q : {"borg", "comfort", "stability", "pain", "sus"})
    if (response == q) return LadderKind::Questionnaire;
  return LadderKind::Kinetic;
}

LadderResult model_ladder(const LongDataset& data, const std::string& response, const std::vector<Term>& sequence,
                          const LadderOptions& options) {
  if (options.method == Method::REML)
    throw InvalidInput("model ladder needs ML fits: LRT between REML fits with different fixed effects is invalid");
  if (!(options.alpha > 0.0 && options.alpha < 1.0)) throw InvalidInput("ladder alpha must lie in (0, 1)");

  LadderResult out;
  out.response = response;
  out.sequence = sequence;
  out.alpha = options.alpha;

  std::vector<ModelSpec> specs;
  for (std::size_t k = 0; k <= sequence.size(); ++k)
    specs.push_back({response, {sequence.begin(), sequence.begin() + static_cast<long>(k)}, options.method, options.baseline});
  for (const auto& s : specs) s.validate();

  std::vector<std::future<FitResult>> jobs;
  for (const auto& s : specs)
    jobs.push_back(std::async(std::launch::async, [&data, s] { return fit_random_intercept(s, data); }));
  for (std::size_t k = 0; k < jobs.size(); ++k) {
    try {
      out.fits.push_back(jobs[k].get());
    } catch (const FitError& e) {
      throw FitError("Model " + std::to_string(k) + " for '" + response + "': " + e.what());
    } catch (const InvalidInput& e) {
      throw InvalidInput("Model " + std::to_string(k) + " for '" + response + "': " + e.what());
    }
  }

  bool stopped = false;
  for (std::size_t k = 1; k < out.fits.size(); ++k) {
    out.steps.push_back(likelihood_ratio_test(out.fits[k - 1], out.fits[k]));
    if (!stopped && out.steps.back().p < options.alpha)
      out.selected = static_cast<int>(k);
    else
      stopped = true;
  }
  return out;
}

std::string stars(double p) {
  if (p < 0.001) return "***";
  if (p < 0.01) return "**";
  if (p < 0.05) return "*";
  return "";
}

namespace {

std::string fixed4(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

std::string pvalue(double p) {
  if (p < 1e-4) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.2e", p);
    return buf;
  }
  return fixed4(p);
}

using Grid = std::vector<std::vector<std::string>>;

Grid table_grid(const LadderResult& l) {
  Grid g;
  std::vector<std::string> header{""};
  for (std::size_t k = 0; k < l.fits.size(); ++k) header.push_back("Model " + std::to_string(k));
  g.push_back(header);

  std::vector<std::string> labels;
  for (const auto& f : l.fits)
    for (const auto& lab : f.labels)
      if (std::find(labels.begin(), labels.end(), lab) == labels.end()) labels.push_back(lab);
  for (const auto& lab : labels) {
    std::vector<std::string> row{lab};
    for (const auto& f : l.fits) {
      const auto it = std::find(f.labels.begin(), f.labels.end(), lab);
      if (it == f.labels.end()) {
        row.emplace_back();
        continue;
      }
      const auto i = static_cast<Eigen::Index>(it - f.labels.begin());
      row.push_back(fixed4(f.beta(i)) + stars(f.p_value(i)) + " (" + fixed4(f.se(i)) + ")");
    }
    g.push_back(row);
  }

  auto stat_row = [&](const std::string& name, auto&& cell) {
    std::vector<std::string> row{name};
    for (std::size_t k = 0; k < l.fits.size(); ++k) row.push_back(cell(k));
    g.push_back(row);
  };
  stat_row("AIC", [&](std::size_t k) { return fixed4(l.fits[k].aic); });
  stat_row("BIC", [&](std::size_t k) { return fixed4(l.fits[k].bic); });
  stat_row("Log Likelihood", [&](std::size_t k) { return fixed4(l.fits[k].loglik); });
  stat_row("Num. obs.", [&](std::size_t k) { return std::to_string(l.fits[k].n_obs); });
  stat_row("Num. groups: participant", [&](std::size_t k) { return std::to_string(l.fits[k].n_groups); });
  const std::string base = l.fits.empty() ? "" : l.fits[0].labels[0];
  stat_row("Var: participant " + base, [&](std::size_t k) { return fixed4(l.fits[k].sigma2_participant); });
  stat_row("Var: Residual", [&](std::size_t k) { return fixed4(l.fits[k].sigma2_residual); });
  stat_row("LRT chi2", [&](std::size_t k) { return k == 0 ? std::string() : fixed4(l.steps[k - 1].chi2); });
  stat_row("LRT df", [&](std::size_t k) { return k == 0 ? std::string() : std::to_string(l.steps[k - 1].df); });
  stat_row("LRT p", [&](std::size_t k) { return k == 0 ? std::string() : pvalue(l.steps[k - 1].p); });
  stat_row("Selected", [&](std::size_t k) { return static_cast<int>(k) == l.selected ? std::string("yes") : std::string(); });
  return g;
}

}  // namespace

std::string ladder_markdown(const LadderResult& l) {
  const Grid g = table_grid(l);
  std::ostringstream out;
  out << "### " << l.response << "\n\n";
  for (std::size_t r = 0; r < g.size(); ++r) {
    out << '|';
    for (const auto& c : g[r]) out << ' ' << c << " |";
    out << '\n';
    if (r == 0) {
      out << '|';
      for (std::size_t c = 0; c < g[r].size(); ++c) out << (c == 0 ? " --- |" : " ---: |");
      out << '\n';
    }
  }
  out << "\n***p < 0.001; **p < 0.01; *p < 0.05 (normal approximation). Selection: forward LRT at alpha "
      << l.alpha << ", Model " << l.selected << " selected.\n";
  return out.str();
}

void write_ladder_csv(const LadderResult& l, std::ostream& out) {
  for (const auto& row : table_grid(l)) {
    for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << (c == 0 && row[c].empty() ? "row" : row[c]);
    out << '\n';
  }
}

nlohmann::json to_json(const LadderResult& l) {
  nlohmann::json fits = nlohmann::json::array();
  for (const auto& f : l.fits) fits.push_back(to_json(f));
  nlohmann::json steps = nlohmann::json::array();
  for (std::size_t k = 0; k < l.steps.size(); ++k)
    steps.push_back({{"from", k}, {"to", k + 1}, {"chi2", l.steps[k].chi2}, {"df", l.steps[k].df}, {"p", l.steps[k].p}});
  nlohmann::json seq = nlohmann::json::array();
  for (Term t : l.sequence) seq.push_back(std::string(to_string(t)));
  return {{"response", l.response}, {"sequence", seq},  {"alpha", l.alpha},
          {"selected", l.selected}, {"models", fits}, {"steps", steps}};
}

}  // namespace crutchlab::lmm

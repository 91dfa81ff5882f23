#include "crutchlab/lmm/design.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace crutchlab::lmm {

namespace {

struct TermName {
  Term term;
  const char* name;
};

constexpr TermName kTermNames[] = {
    {Term::Device, "Device"},           {Term::Block, "Block"},
    {Term::Trial, "Trial"},             {Term::Turning, "Turning"},
    {Term::DeviceTrial, "Device*Trial"}, {Term::DeviceBlock, "Device*Block"},
    {Term::DeviceTurning, "Device*Turning"},
};

bool is_interaction(Term t) {
  return t == Term::DeviceTrial || t == Term::DeviceBlock || t == Term::DeviceTurning;
}

Term covariate_of(Term t) {
  switch (t) {
    case Term::DeviceTrial: return Term::Trial;
    case Term::DeviceBlock: return Term::Block;
    case Term::DeviceTurning: return Term::Turning;
    default: return t;
  }
}

double covariate(Term t, const LongRow& r) {
  switch (t) {
    case Term::Block: return r.block;
    case Term::Trial: return r.trial;
    case Term::Turning: return r.turning ? 1.0 : 0.0;
    default: return 0.0;
  }
}

std::vector<Device> non_baseline(Device baseline) {
  std::vector<Device> out;
  for (Device d : kDevices)
    if (d != baseline) out.push_back(d);
  return out;
}

}  // namespace

std::string_view to_string(Term t) {
  for (const auto& n : kTermNames)
    if (n.term == t) return n.name;
  return "?";
}

Term term_from_string(std::string_view s) {
  for (const auto& n : kTermNames) {
    if (s == n.name) return n.term;
  }
  if (s == "Device:Trial") return Term::DeviceTrial;
  if (s == "Device:Block") return Term::DeviceBlock;
  if (s == "Device:Turning") return Term::DeviceTurning;
  throw InvalidInput("unknown model term '" + std::string(s) + "'");
}

std::string_view to_string(Method m) { return m == Method::ML ? "ML" : "REML"; }

bool ModelSpec::has(Term t) const { return std::find(terms.begin(), terms.end(), t) != terms.end(); }

void ModelSpec::validate() const {
  for (std::size_t i = 0; i < terms.size(); ++i) {
    if (std::find(terms.begin(), terms.begin() + static_cast<long>(i), terms[i]) != terms.begin() + static_cast<long>(i))
      throw InvalidInput("term " + std::string(to_string(terms[i])) + " listed twice");
    if (is_interaction(terms[i]) && (!has(Term::Device) || !has(covariate_of(terms[i]))))
      throw InvalidInput("interaction " + std::string(to_string(terms[i])) + " needs both main effects");
  }
}

std::string device_label(Device d) {
  std::string s(to_string(d));
  s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
  return s;
}

std::string baseline_label(Device baseline) { return device_label(baseline) + " (Baseline)"; }

std::vector<Eigen::Index> term_columns(const ModelSpec& spec, Term term) {
  Eigen::Index col = 1;
  for (Term t : spec.terms) {
    const Eigen::Index width = (t == Term::Device || is_interaction(t)) ? 2 : 1;
    if (t == term) {
      std::vector<Eigen::Index> out;
      for (Eigen::Index k = 0; k < width; ++k) out.push_back(col + k);
      return out;
    }
    col += width;
  }
  throw InvalidInput("term " + std::string(to_string(term)) + " is not in the model");
}

Design design_matrix(const ModelSpec& spec, const LongDataset& data) {
  spec.validate();
  std::vector<const LongRow*> rows;
  for (const auto& r : data.rows)
    if (r.response == spec.response) rows.push_back(&r);
  if (rows.empty()) throw InvalidInput("no rows for response '" + spec.response + "'");

  Design d;
  d.labels.push_back(baseline_label(spec.baseline));
  const auto others = non_baseline(spec.baseline);
  for (Term t : spec.terms) {
    if (t == Term::Device) {
      for (Device dv : others) d.labels.push_back(device_label(dv));
    } else if (is_interaction(t)) {
      for (Device dv : others) d.labels.push_back(device_label(dv) + "*" + std::string(to_string(covariate_of(t))));
    } else {
      d.labels.push_back(std::string(to_string(t)));
    }
  }

  const auto n = static_cast<Eigen::Index>(rows.size());
  d.x.resize(n, static_cast<Eigen::Index>(d.labels.size()));
  d.y.resize(n);
  std::map<std::string, int> groups;
  for (const auto* r : rows) groups.emplace(r->participant, 0);
  for (auto& [name, idx] : groups) {
    idx = static_cast<int>(d.group_names.size());
    d.group_names.push_back(name);
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    const LongRow& r = *rows[static_cast<std::size_t>(i)];
    if (!std::isfinite(r.value))
      throw InvalidInput("non-finite value for '" + spec.response + "', participant " + r.participant);
    d.y(i) = r.value;
    d.group.push_back(groups.at(r.participant));
    Eigen::Index c = 0;
    d.x(i, c++) = 1.0;
    for (Term t : spec.terms) {
      if (t == Term::Device || is_interaction(t)) {
        const double v = t == Term::Device ? 1.0 : covariate(covariate_of(t), r);
        for (Device dv : others) d.x(i, c++) = r.device == dv ? v : 0.0;
      } else {
        d.x(i, c++) = covariate(t, r);
      }
    }
  }

  if (spec.has(Term::Device)) {
    for (Device dv : kDevices) {
      const bool seen = std::any_of(rows.begin(), rows.end(), [&](const LongRow* r) { return r->device == dv; });
      if (!seen)
        throw InvalidInput("device level '" + std::string(to_string(dv)) + "' has no observations for '" +
                           spec.response + "'");
    }
  }
  return d;
}

}  // namespace crutchlab::lmm

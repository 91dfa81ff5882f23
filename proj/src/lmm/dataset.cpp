#include "crutchlab/lmm/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>
#include <set>
#include <tuple>

#include "crutchlab/io/csv.hpp"

namespace crutchlab::lmm {

std::string_view to_string(Device d) {
  switch (d) {
    case Device::Rigid: return "rigid";
    case Device::Spring: return "spring";
    case Device::Tensegrity: return "tensegrity";
  }
  return "rigid";
}

Device device_from_string(std::string_view s) {
  if (s == "rigid") return Device::Rigid;
  if (s == "spring") return Device::Spring;
  if (s == "tensegrity") return Device::Tensegrity;
  throw InvalidInput("unknown device '" + std::string(s) + "'");
}

LongDataset LongDataset::select(std::string_view response) const {
  LongDataset out;
  for (const auto& r : rows)
    if (r.response == response) out.rows.push_back(r);
  return out;
}

std::vector<std::string> LongDataset::responses() const {
  std::vector<std::string> out;
  for (const auto& r : rows)
    if (std::find(out.begin(), out.end(), r.response) == out.end()) out.push_back(r.response);
  return out;
}

void LongDataset::canonicalize() {
  std::stable_sort(rows.begin(), rows.end(), [](const LongRow& a, const LongRow& b) {
    return std::tie(a.participant, a.device, a.block, a.trial) < std::tie(b.participant, b.device, b.block, b.trial);
  });
}

std::size_t LongDataset::group_count() const {
  std::set<std::string> g;
  for (const auto& r : rows) g.insert(r.participant);
  return g.size();
}

void write_long_csv(const LongDataset& data, std::ostream& out) {
  for (std::size_t i = 0; i < kLongHeader.size(); ++i) out << (i ? "," : "") << kLongHeader[i];
  out << '\n';
  for (const auto& r : data.rows)
    out << r.participant << ',' << to_string(r.device) << ',' << r.block << ',' << r.trial << ','
        << (r.turning ? 1 : 0) << ',' << r.response << ',' << io::format_double(r.value) << '\n';
}

LongDataset read_long_csv(std::istream& in, const std::string& source) {
  const io::CsvTable t = io::read_csv(in, source);
  io::expect_header(t, kLongHeader, source);
  LongDataset d;
  d.rows.reserve(t.rows.size());
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& f = t.rows[i];
    const std::string ctx = source + " row " + std::to_string(i + 1);
    LongRow r;
    r.participant = f[0];
    if (r.participant.empty()) throw InvalidInput(ctx + ": empty participant");
    r.device = device_from_string(f[1]);
    r.block = io::parse_int(f[2], ctx);
    r.trial = io::parse_int(f[3], ctx);
    if (f[4] != "0" && f[4] != "1") throw InvalidInput(ctx + ": turning must be 0 or 1");
    r.turning = f[4] == "1";
    r.response = f[5];
    r.value = io::parse_double(f[6], ctx);
    if (!std::isfinite(r.value)) throw InvalidInput(ctx + ": missing or non-finite value");
    d.rows.push_back(std::move(r));
  }
  return d;
}

LongDataset read_long_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open " + path.string());
  return read_long_csv(in, path.string());
}

}  // namespace crutchlab::lmm

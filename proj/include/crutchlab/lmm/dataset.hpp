#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "crutchlab/error.hpp"

namespace crutchlab::lmm {

enum class Device { Rigid, Spring, Tensegrity };

inline constexpr Device kDevices[] = {Device::Rigid, Device::Spring, Device::Tensegrity};

std::string_view to_string(Device d);
Device device_from_string(std::string_view s);

/// One observation in long format.
struct LongRow {
  std::string participant;
  Device device = Device::Rigid;
  int block = 0;
  int trial = 0;
  bool turning = false;
  std::string response;
  double value = 0.0;
};

struct LongDataset {
  std::vector<LongRow> rows;

  /// Rows of one response, in dataset order.
  LongDataset select(std::string_view response) const;
  /// Response names in order of first appearance.
  std::vector<std::string> responses() const;
  /// Stable sort by (participant, device, block, trial); rows that tie keep
  /// their relative order (stance index, response).
  void canonicalize();
  std::size_t group_count() const;
};

inline const std::vector<std::string> kLongHeader{"participant", "device", "block", "trial",
                                                  "turning",     "response", "value"};

void write_long_csv(const LongDataset& data, std::ostream& out);
LongDataset read_long_csv(std::istream& in, const std::string& source = "<stream>");
LongDataset read_long_csv(const std::filesystem::path& path);

}  // namespace crutchlab::lmm

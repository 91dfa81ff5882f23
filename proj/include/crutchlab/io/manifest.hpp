#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "crutchlab/error.hpp"

namespace crutchlab::io {

std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const std::filesystem::path& path);

struct FileDigest {
  std::string path;  // as given for inputs, relative to the output dir for outputs
  std::string sha256;
  std::uintmax_t bytes = 0;
};

struct RunManifest {
  std::string tool = "crutchlab";
  std::string version;
  std::string command;
  nlohmann::json config = nlohmann::json::object();
  std::vector<FileDigest> inputs;
  std::vector<FileDigest> outputs;
  std::string started_utc;
  std::string finished_utc;

  /// SHA-256 over everything except the timestamps.
  std::string identity() const;
  nlohmann::json to_json() const;
};

/// Digest of an input file, or of every regular file below a directory
/// (sorted, paths relative to it).
std::vector<FileDigest> digest_inputs(const std::filesystem::path& path);

std::string utc_now();

/// Outputs are written into a private staging directory and moved into the
/// destination only by commit(); a stage that is destroyed uncommitted
/// removes everything it wrote.
class OutputStage {
 public:
  explicit OutputStage(std::filesystem::path destination);
  ~OutputStage();
  OutputStage(const OutputStage&) = delete;
  OutputStage& operator=(const OutputStage&) = delete;

  /// Staging path for an output file name (sub-directories allowed).
  std::filesystem::path file(const std::string& name);
  void write(const std::string& name, std::string_view contents);

  /// Hash outputs, write manifest.json and move everything into place.
  RunManifest commit(RunManifest manifest);

  const std::filesystem::path& destination() const { return destination_; }

 private:
  std::filesystem::path destination_;
  std::filesystem::path staging_;
  std::vector<std::string> names_;
  bool committed_ = false;
};

}  // namespace crutchlab::io

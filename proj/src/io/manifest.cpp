#include "crutchlab/io/manifest.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <random>
#include <set>

namespace crutchlab::io {

namespace fs = std::filesystem;

namespace {

class Sha256 {
 public:
  Sha256() : ctx_(EVP_MD_CTX_new()) {
    if (!ctx_ || EVP_DigestInit_ex(ctx_, EVP_sha256(), nullptr) != 1) throw Error("SHA-256 initialisation failed");
  }
  ~Sha256() { EVP_MD_CTX_free(ctx_); }
  Sha256(const Sha256&) = delete;
  Sha256& operator=(const Sha256&) = delete;

  void update(const void* data, std::size_t n) {
    if (EVP_DigestUpdate(ctx_, data, n) != 1) throw Error("SHA-256 update failed");
  }
  std::string hex() {
    std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
    unsigned int len = 0;
    if (EVP_DigestFinal_ex(ctx_, md.data(), &len) != 1) throw Error("SHA-256 finalisation failed");
    static constexpr char digits[] = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
      out += digits[md[i] >> 4];
      out += digits[md[i] & 15];
    }
    return out;
  }

 private:
  EVP_MD_CTX* ctx_;
};

nlohmann::json digests(const std::vector<FileDigest>& files) {
  nlohmann::json a = nlohmann::json::array();
  for (const auto& f : files) a.push_back({{"path", f.path}, {"sha256", f.sha256}, {"bytes", f.bytes}});
  return a;
}

}  // namespace

std::string sha256_hex(std::string_view bytes) {
  Sha256 h;
  h.update(bytes.data(), bytes.size());
  return h.hex();
}

std::string sha256_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot read " + path.string());
  Sha256 h;
  std::array<char, 1 << 16> buf{};
  while (in) {
    in.read(buf.data(), buf.size());
    h.update(buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  return h.hex();
}

std::string RunManifest::identity() const {
  nlohmann::json j = to_json();
  j.erase("started_utc");
  j.erase("finished_utc");
  j.erase("identity_sha256");
  return sha256_hex(j.dump());
}

nlohmann::json RunManifest::to_json() const {
  nlohmann::json j = {{"tool", tool},         {"version", version},           {"command", command},
                      {"config", config},     {"inputs", digests(inputs)},    {"outputs", digests(outputs)},
                      {"started_utc", started_utc}, {"finished_utc", finished_utc}};
  return j;
}

std::vector<FileDigest> digest_inputs(const fs::path& path) {
  std::vector<FileDigest> out;
  if (fs::is_directory(path)) {
    std::vector<fs::path> files;
    for (const auto& e : fs::recursive_directory_iterator(path))
      if (e.is_regular_file()) files.push_back(e.path());
    std::sort(files.begin(), files.end());
    for (const auto& f : files)
      out.push_back({fs::relative(f, path).generic_string(), sha256_file(f), fs::file_size(f)});
  } else {
    out.push_back({path.filename().generic_string(), sha256_file(path), fs::file_size(path)});
  }
  return out;
}

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

OutputStage::OutputStage(fs::path destination) : destination_(std::move(destination)) {
  std::random_device rd;
  char tag[32];
  std::snprintf(tag, sizeof tag, "crutchlab-%08x%08x", rd(), rd());
  staging_ = fs::temp_directory_path() / tag;
  fs::create_directories(staging_);
}

OutputStage::~OutputStage() {
  std::error_code ec;
  fs::remove_all(staging_, ec);
}

fs::path OutputStage::file(const std::string& name) {
  if (committed_) throw Error("output stage already committed");
  const fs::path rel(name);
  if (rel.is_absolute() || rel.lexically_normal().string().rfind("..", 0) == 0)
    throw InvalidInput("output name must be relative: " + name);
  if (std::find(names_.begin(), names_.end(), name) == names_.end()) names_.push_back(name);
  const fs::path p = staging_ / rel;
  fs::create_directories(p.parent_path());
  return p;
}

void OutputStage::write(const std::string& name, std::string_view contents) {
  std::ofstream out(file(name), std::ios::binary);
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw Error("failed to write " + name);
}

RunManifest OutputStage::commit(RunManifest manifest) {
  if (committed_) throw Error("output stage already committed");
  std::vector<std::string> names = names_;
  std::sort(names.begin(), names.end());
  manifest.outputs.clear();
  for (const auto& n : names) {
    const fs::path p = staging_ / n;
    manifest.outputs.push_back({fs::path(n).generic_string(), sha256_file(p), fs::file_size(p)});
  }
  manifest.finished_utc = utc_now();
  nlohmann::json j = manifest.to_json();
  j["identity_sha256"] = manifest.identity();
  {
    std::ofstream out(staging_ / "manifest.json");
    out << j.dump(2) << '\n';
    if (!out) throw Error("failed to write manifest.json");
  }
  names.push_back("manifest.json");

  fs::create_directories(destination_);
  for (const auto& n : names) {
    const fs::path from = staging_ / n, to = destination_ / n;
    fs::create_directories(to.parent_path());
    std::error_code ec;
    fs::rename(from, to, ec);
    if (ec) {  // staging on another filesystem
      fs::copy_file(from, to, fs::copy_options::overwrite_existing);
    }
  }
  committed_ = true;
  return manifest;
}

}  // namespace crutchlab::io

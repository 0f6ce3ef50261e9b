#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace jjring::app {

inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex16(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

/// Comma-separated rows; numbers printed with %.15g so reruns are byte-identical.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> columns) : columns_(std::move(columns)) {
    for (std::size_t i = 0; i < columns_.size(); ++i) out_ << (i ? "," : "") << columns_[i];
    out_ << '\n';
  }

  std::size_t width() const noexcept { return columns_.size(); }

  void row(std::span<const double> values) {
    if (values.size() != columns_.size()) throw std::logic_error("CsvTable: row width mismatch");
    char buf[40];
    for (std::size_t i = 0; i < values.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.15g", values[i]);
      out_ << (i ? "," : "") << buf;
    }
    out_ << '\n';
  }
  void row(std::initializer_list<double> values) { row(std::span<const double>(values.begin(), values.size())); }

  std::string str() const { return out_.str(); }

 private:
  std::vector<std::string> columns_;
  std::ostringstream out_;
};

/// Writes through a sibling temporary and renames, so readers never see a partial file.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  const auto tmp = std::filesystem::path(path).concat(".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
    if (!out.flush()) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

/// Raised when an artifact directory holds metadata for a different configuration.
class HashMismatch : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// <root>/<experiment>/<hash>/{data.csv, meta.json}.
class ArtifactDir {
 public:
  ArtifactDir(const std::filesystem::path& root, const std::string& experiment, const std::string& canonical_config)
      : hash_(hex16(fnv1a(canonical_config))), canonical_(canonical_config), dir_(root / experiment / hash_) {
    std::filesystem::create_directories(dir_);
    const auto meta = dir_ / "meta.json";
    if (std::filesystem::exists(meta)) {
      std::ifstream in(meta);
      nlohmann::json previous;
      try {
        in >> previous;
      } catch (const nlohmann::json::exception& e) {
        throw HashMismatch("unreadable metadata in " + meta.string() + ": " + e.what());
      }
      if (previous.value("config_hash", "") != hash_ || previous.value("canonical_config", "") != canonical_) {
        throw HashMismatch("existing " + meta.string() + " was produced by a different configuration");
      }
    }
  }

  const std::string& hash() const noexcept { return hash_; }
  const std::filesystem::path& path() const noexcept { return dir_; }

  void write_data(const CsvTable& table, const std::string& name = "data.csv") const {
    write_file_atomic(dir_ / name, table.str());
  }
  void write_meta(nlohmann::json meta) const {
    meta["config_hash"] = hash_;
    meta["canonical_config"] = canonical_;
    write_file_atomic(dir_ / "meta.json", meta.dump(2) + "\n");
  }

 private:
  std::string hash_;
  std::string canonical_;
  std::filesystem::path dir_;
};

}  // namespace jjring::app

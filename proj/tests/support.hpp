#pragma once

// Shared helpers for the test suites: repo paths baked in by CMake, a scratch
// directory that cleans up after itself, a portable RNG (uniform_int_distribution
// is implementation-defined, so tests roll their own), and small file utilities.

#include <unistd.h>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "cogbench/provider.hpp"

#ifndef COGBENCH_SOURCE_DIR
#error "COGBENCH_SOURCE_DIR must be defined by the build"
#endif

namespace testsupport {

inline std::string src_dir() { return COGBENCH_SOURCE_DIR; }
inline std::string data_dir() { return src_dir() + "/data"; }
inline std::string mini_dir() { return data_dir() + "/mini"; }
inline std::string templates_dir() { return src_dir() + "/templates"; }
inline std::string goldens_dir() { return data_dir() + "/goldens"; }
inline std::string transcripts_dir() { return data_dir() + "/transcripts"; }

struct TempDir {
  std::filesystem::path path;

  TempDir() {
    const auto base = std::filesystem::temp_directory_path();
    for (int i = 0; i < 10000; ++i) {
      auto candidate = base / ("cogbench_test_" + std::to_string(::getpid()) + "_" +
                               std::to_string(counter()++));
      std::error_code ec;
      if (std::filesystem::create_directory(candidate, ec)) {
        path = candidate;
        return;
      }
    }
    throw std::runtime_error("could not create temp dir");
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::string str() const { return path.string(); }
  std::string file(const std::string& name) const { return (path / name).string(); }

 private:
  static int& counter() {
    static int n = 0;
    return n;
  }
};

inline std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void spit(const std::string& path, const std::string& body) {
  std::filesystem::create_directories(std::filesystem::path(path).parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << body;
}

// mt19937_64 output is fully specified by the standard; the modulo keeps the
// draw portable across library implementations (slight bias is irrelevant here).
struct Rng {
  std::mt19937_64 gen;

  explicit Rng(std::uint64_t seed) : gen(seed) {}
  int uniform(int lo, int hi) {
    return lo + static_cast<int>(gen() % static_cast<std::uint64_t>(hi - lo + 1));
  }
  double unit() { return static_cast<double>(gen() >> 11) * 0x1p-53; }
  std::string word() {
    static const char* pool[] = {"tide", "net",   "pier",  "reel",  "bait", "knot",
                                 "mat",  "pose",  "breath", "calm",  "dawn", "rain",
                                 "rope", "chart", "stove",  "lamp",  "sand", "kelp"};
    return pool[uniform(0, 17)];
  }
  std::string sentence(int words) {
    std::string s;
    for (int i = 0; i < words; ++i) {
      if (i) s += ' ';
      s += word();
    }
    return s;
  }
};

// Locates the first mismatching byte so golden comparisons fail with a short
// window instead of two full file dumps.
inline std::string diff_context(const std::string& got, const std::string& want) {
  if (got == want) return "equal";
  std::size_t i = 0;
  const std::size_t n = std::min(got.size(), want.size());
  while (i < n && got[i] == want[i]) ++i;
  auto window = [&](const std::string& s) {
    const std::size_t from = i > 30 ? i - 30 : 0;
    std::string w = s.substr(from, 80);
    for (char& c : w) {
      if (c == '\n') c = ' ';
    }
    return w;
  };
  return "sizes " + std::to_string(got.size()) + " vs " + std::to_string(want.size()) +
         ", first difference at byte " + std::to_string(i) + "\n  got: ..." +
         window(got) + "\n want: ..." + window(want);
}

inline cogbench::Transcript make_transcript(
    const std::vector<std::pair<std::string, std::string>>& entries) {
  cogbench::Transcript t;
  for (const auto& [expect, response] : entries) {
    cogbench::TranscriptEntry e;
    e.response = response;
    if (!expect.empty()) {
      e.has_expect = true;
      e.expect = expect;
    }
    t.entries.push_back(std::move(e));
  }
  return t;
}

}  // namespace testsupport

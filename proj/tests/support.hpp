#pragma once

#include <atomic>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "quotemix/gateway.hpp"
#include "quotemix/roster.hpp"

namespace qmtest {

inline std::filesystem::path source_dir() { return QUOTEMIX_SOURCE_DIR; }
inline std::filesystem::path fixture(const std::string& rel) { return source_dir() / "fixtures" / rel; }

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("quotemix-test-" + std::to_string(rd()) + "-" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

// Answers from a callback and counts calls.
class FnBackend final : public quotemix::ChatBackend {
 public:
  using Fn = std::function<quotemix::BackendReply(const quotemix::ChatRequest&, int call)>;
  explicit FnBackend(Fn fn) : fn_(std::move(fn)) {}
  quotemix::BackendReply send(const quotemix::ChatRequest& req) override {
    const int call = ++calls_;
    {
      std::lock_guard lock(mu_);
      prompts_.push_back(req.user_text);
    }
    return fn_(req, call);
  }
  int calls() const { return calls_; }
  std::vector<std::string> prompts() const {
    std::lock_guard lock(mu_);
    return prompts_;
  }

 private:
  Fn fn_;
  std::atomic<int> calls_{0};
  mutable std::mutex mu_;
  std::vector<std::string> prompts_;
};

inline quotemix::Roster default_roster() { return quotemix::load_roster(source_dir() / "config" / "roster.json"); }

// Four brands from four domains, all five personas.
inline quotemix::Roster small_roster() {
  auto full = default_roster();
  std::vector<quotemix::Brand> brands;
  for (const char* name : {"Dawn", "GE", "DKNY", "Orgain"}) brands.push_back(*full.find_brand(name));
  return quotemix::Roster(brands, full.personas());
}

}  // namespace qmtest

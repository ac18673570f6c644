#pragma once

#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "affordgen/scenegen.hpp"

namespace fixture {

namespace fs = std::filesystem;
using affordgen::geom::Aabb;
using affordgen::geom::Vec2;
using affordgen::geom::Vec3;
using namespace affordgen::scenegen;

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = fs::temp_directory_path() / ("affordgen-" + tag + "-" + std::to_string(rd()));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& name) const { return path_ / name; }

private:
  fs::path path_;
};

inline AssetEntry asset(AssetCategory category, const std::string& name, double w, double d, double h) {
  return {category, name, w, d, h, Mount::Floor};
}

/// A 2 m counter against the wall (y in [-0.6, 0], height 0.9) with one
/// rigid target of id 2 on its front edge at x = 1. Counter id 1.
inline Configuration counter_with_mug(double target_x = 1.0) {
  Configuration c;
  c.furniture.push_back({1, asset(AssetCategory::Furniture, "counter:200", 2.0, 0.6, 0.9), {{0, -0.6, 0}, {2.0, 0, 0.9}}});
  const Vec3 pos(target_x, -0.5, 0.9);
  c.targets.push_back({2, asset(AssetCategory::RigidTarget, "mug", 0.1, 0.1, 0.12), TargetKind::Rigid, pos, Vec2(0, 1),
                       {{pos.x() - 0.05, pos.y() - 0.05, 0.9}, {pos.x() + 0.05, pos.y() + 0.05, 1.02}}});
  return c;
}

/// Axis-aligned obstacle box with the given floor center and size.
inline Obstacle obstacle(std::uint32_t id, const Vec2& center, double w, double d, double h = 0.5) {
  return {id,
          asset(AssetCategory::Obstacle, "crate", w, d, h),
          center,
          0.0,
          2,
          {{center.x() - w / 2, center.y() - d / 2, 0.0}, {center.x() + w / 2, center.y() + d / 2, h}}};
}

/// Relative path -> file bytes for every regular file below `root`.
inline std::map<std::string, std::string> tree_bytes(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& entry : fs::recursive_directory_iterator(root)) {
    if (!entry.is_regular_file()) continue;
    std::ifstream in(entry.path(), std::ios::binary);
    out[fs::relative(entry.path(), root).generic_string()] =
        std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  }
  return out;
}

/// FNV-1a over sorted (path, bytes) pairs.
inline std::uint64_t tree_hash(const fs::path& root) {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&](const std::string& s) {
    for (unsigned char ch : s) {
      h ^= ch;
      h *= 1099511628211ULL;
    }
    h ^= 0xFF;
    h *= 1099511628211ULL;
  };
  for (const auto& [path, bytes] : tree_bytes(root)) {
    mix(path);
    mix(bytes);
  }
  return h;
}

}  // namespace fixture

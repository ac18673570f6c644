#include "affordgen/scenegen.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "affordgen/errors.hpp"
#include "affordgen/rng.hpp"

namespace affordgen::scenegen {

namespace {

constexpr double kHandleWidth = 0.3;
constexpr double kHandleDepth = 0.04;
constexpr double kHandleHeight = 0.06;
constexpr double kCounterMargin = 0.05;

bool is_furniture(const AssetEntry& e) {
  return e.category == AssetCategory::Furniture || e.category == AssetCategory::ArticulatedTarget;
}

double handle_height(const AssetEntry& asset) { return std::min(0.6 * asset.height, 0.9); }

}  // namespace

const char* to_string(AssetCategory category) {
  switch (category) {
    case AssetCategory::RigidTarget: return "rigid-target";
    case AssetCategory::ArticulatedTarget: return "articulated-target";
    case AssetCategory::Obstacle: return "obstacle";
    case AssetCategory::Furniture: return "furniture";
  }
  return "?";
}

const char* to_string(Mount mount) { return mount == Mount::Countertop ? "countertop" : "floor"; }

AssetCategory parse_category(const std::string& text) {
  for (auto c : {AssetCategory::RigidTarget, AssetCategory::ArticulatedTarget, AssetCategory::Obstacle,
                 AssetCategory::Furniture}) {
    if (text == to_string(c)) {
      return c;
    }
  }
  throw UsageError("unknown asset category '" + text + "'");
}

Mount parse_mount(const std::string& text) {
  if (text == "countertop") return Mount::Countertop;
  if (text == "floor") return Mount::Floor;
  throw UsageError("unknown mount '" + text + "'");
}

std::string AssetEntry::kind() const { return name.substr(0, name.find(':')); }

void AssetCatalog::validate() const {
  for (const auto& e : entries) {
    if (!(e.width > 0.0) || !(e.depth > 0.0) || !(e.height > 0.0)) {
      throw UsageError("asset '" + e.name + "' has non-positive dimensions");
    }
  }
  for (auto c : {AssetCategory::RigidTarget, AssetCategory::ArticulatedTarget, AssetCategory::Obstacle,
                 AssetCategory::Furniture}) {
    if (of(c).empty()) {
      throw UsageError(std::string("catalog has no ") + to_string(c) + " entries");
    }
  }
}

std::vector<AssetEntry> AssetCatalog::of(AssetCategory category) const {
  std::vector<AssetEntry> out;
  std::copy_if(entries.begin(), entries.end(), std::back_inserter(out),
               [category](const AssetEntry& e) { return e.category == category; });
  return out;
}

AssetCatalog AssetCatalog::defaults() {
  using C = AssetCategory;
  using M = Mount;
  return AssetCatalog{{
      {C::Furniture, "counter:60", 0.60, 0.60, 0.90, M::Floor},
      {C::Furniture, "counter:80", 0.80, 0.60, 0.90, M::Floor},
      {C::Furniture, "counter:100", 1.00, 0.60, 0.90, M::Floor},
      {C::Furniture, "sink:80", 0.80, 0.60, 0.90, M::Floor},
      {C::Furniture, "sink:100", 1.00, 0.60, 0.90, M::Floor},
      {C::Furniture, "stove:60", 0.60, 0.60, 0.90, M::Floor},
      {C::ArticulatedTarget, "fridge:70", 0.70, 0.70, 1.80, M::Floor},
      {C::ArticulatedTarget, "fridge:90", 0.90, 0.70, 1.85, M::Floor},
      {C::ArticulatedTarget, "dishwasher:60", 0.60, 0.60, 0.85, M::Floor},
      {C::ArticulatedTarget, "cabinet:60", 0.60, 0.60, 2.00, M::Floor},
      {C::RigidTarget, "mug", 0.08, 0.08, 0.10, M::Countertop},
      {C::RigidTarget, "bowl", 0.15, 0.15, 0.07, M::Countertop},
      {C::RigidTarget, "bottle", 0.07, 0.07, 0.25, M::Countertop},
      {C::RigidTarget, "cereal-box", 0.20, 0.08, 0.28, M::Countertop},
      {C::RigidTarget, "pot", 0.25, 0.25, 0.15, M::Countertop},
      {C::Obstacle, "chair", 0.45, 0.45, 0.90, M::Floor},
      {C::Obstacle, "stool", 0.35, 0.35, 0.65, M::Floor},
      {C::Obstacle, "trash-bin", 0.30, 0.30, 0.60, M::Floor},
      {C::Obstacle, "crate", 0.50, 0.40, 0.45, M::Floor},
      {C::Obstacle, "basket", 0.40, 0.30, 0.30, M::Floor},
  }};
}

geom::Aabb furniture_box(const SceneSpec& scene, const FurniturePlacement& p) {
  const double height = p.asset.category == AssetCategory::Furniture ? scene.counter_height : p.asset.height;
  return {Vec3(p.offset, -p.asset.depth, 0.0), Vec3(p.offset + p.asset.width, 0.0, height)};
}

const Target* Configuration::find_target(std::uint32_t id) const {
  const auto it = std::find_if(targets.begin(), targets.end(), [id](const Target& t) { return t.id == id; });
  return it == targets.end() ? nullptr : &*it;
}

const Target& Configuration::target(std::uint32_t id) const {
  if (const Target* t = find_target(id)) {
    return *t;
  }
  throw DataError("configuration " + std::to_string(config_id) + " has no target " + std::to_string(id));
}

std::vector<geom::Solid> Configuration::solids() const {
  std::vector<geom::Solid> out;
  out.reserve(furniture.size() + targets.size() + obstacles.size());
  for (const auto& f : furniture) out.push_back({f.id, f.box});
  for (const auto& t : targets) out.push_back({t.id, t.box});
  for (const auto& o : obstacles) out.push_back({o.id, o.box});
  if (room) {
    const auto walls = room_walls(*room);
    out.insert(out.end(), walls.begin(), walls.end());
  }
  return out;
}

std::vector<geom::Solid> room_walls(const geom::Aabb& interior) {
  constexpr double t = 0.1;
  const Vec3& lo = interior.min;
  const Vec3& hi = interior.max;
  return {
      {0, {{lo.x() - t, hi.y(), lo.z()}, {hi.x() + t, hi.y() + t, hi.z()}}},
      {0, {{lo.x() - t, lo.y() - t, lo.z()}, {hi.x() + t, lo.y(), hi.z()}}},
      {0, {{lo.x() - t, lo.y(), lo.z()}, {lo.x(), hi.y(), hi.z()}}},
      {0, {{hi.x(), lo.y(), lo.z()}, {hi.x() + t, hi.y(), hi.z()}}},
  };
}

std::vector<std::uint32_t> Configuration::object_ids() const {
  std::vector<std::uint32_t> ids;
  for (const auto& s : solids()) {
    if (s.id != 0) ids.push_back(s.id);
  }
  return ids;
}

std::vector<std::uint32_t> Configuration::obstacle_ids() const {
  std::vector<std::uint32_t> ids;
  for (const auto& o : obstacles) ids.push_back(o.id);
  return ids;
}

std::vector<geom::Rect> Configuration::obstacle_footprints() const {
  std::vector<geom::Rect> out;
  for (const auto& o : obstacles) out.push_back(o.footprint());
  return out;
}

std::vector<geom::Rect> Configuration::furniture_footprints() const {
  std::vector<geom::Rect> out;
  for (const auto& f : furniture) out.push_back(f.footprint());
  return out;
}

SceneSpec generate_scene(std::uint64_t seed, const AssetCatalog& catalog, const SceneParams& params) {
  catalog.validate();
  if (!(params.wall_length > 0.0) || !(params.counter_height > 0.0)) {
    throw UsageError("scene parameters must be positive");
  }
  Rng rng(derive_seed(seed, {0x5CE0E}));

  std::vector<std::string> kinds;
  for (const auto& e : catalog.entries) {
    if (is_furniture(e) && std::find(kinds.begin(), kinds.end(), e.kind()) == kinds.end()) {
      kinds.push_back(e.kind());
    }
  }
  rng.shuffle(kinds);

  SceneSpec scene;
  scene.scene_id = seed;
  scene.wall_length = params.wall_length;
  scene.counter_height = params.counter_height;
  if (params.room_margin > 0.0 && params.room_depth > 0.0 && params.room_height > 0.0) {
    scene.room = geom::Aabb{{-params.room_margin, -params.room_depth, 0.0},
                            {params.wall_length + params.room_margin, 0.0, params.room_height}};
  }

  double cursor = 0.0;
  for (const auto& kind : kinds) {
    std::vector<AssetEntry> instances;
    for (const auto& e : catalog.entries) {
      if (is_furniture(e) && e.kind() == kind) instances.push_back(e);
    }
    const auto pick = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(instances.size()) - 1));
    scene.furniture.push_back({instances[pick], cursor});
    cursor += instances[pick].width;
  }

  if (cursor > params.wall_length) {
    std::ostringstream msg;
    msg << "furniture overflows the " << params.wall_length << " m wall by " << (cursor - params.wall_length)
        << " m:";
    for (const auto& f : scene.furniture) {
      msg << ' ' << f.asset.name << '[' << f.offset << ", " << f.offset + f.asset.width << ']';
    }
    throw UsageError(msg.str());
  }

  for (const auto& f : scene.furniture) {
    if (f.asset.category != AssetCategory::ArticulatedTarget) continue;
    const Vec3 handle(f.offset + f.asset.width / 2.0, -f.asset.depth - kHandleDepth / 2.0, handle_height(f.asset));
    scene.articulated_targets.push_back({f.asset, handle, Vec2(0.0, 1.0)});
  }
  return scene;
}

namespace {

struct Placer {
  const SceneSpec& scene;
  const PlacementParams& params;
  Rng& rng;
  std::vector<geom::Rect> blocked;  // furniture, handles and obstacles placed so far

  bool free(const geom::Rect& r) const {
    return std::none_of(blocked.begin(), blocked.end(), [&r](const geom::Rect& b) { return geom::rects_overlap(r, b); });
  }
};

}  // namespace

std::vector<Configuration> generate_configurations(const SceneSpec& scene, std::uint64_t seed, int count,
                                                   const AssetCatalog& catalog, const PlacementParams& params,
                                                   PlacementStats* stats) {
  if (count < 1) {
    throw UsageError("configuration count must be at least 1");
  }
  const auto rigid_assets = catalog.of(AssetCategory::RigidTarget);
  const auto obstacle_assets = catalog.of(AssetCategory::Obstacle);
  if (rigid_assets.empty()) {
    throw UsageError("catalog has no rigid targets");
  }

  std::vector<const FurniturePlacement*> counters;
  for (const auto& f : scene.furniture) {
    if (f.asset.category == AssetCategory::Furniture) counters.push_back(&f);
  }
  if (counters.empty()) {
    throw UsageError("scene has no countertop to place rigid targets on");
  }

  std::vector<Configuration> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int index = 0; index < count; ++index) {
    Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(index)}));
    Configuration config;
    config.config_id = static_cast<std::uint64_t>(index);
    config.scene_id = scene.scene_id;
    config.room = scene.room;

    std::uint32_t next_id = 1;
    Placer placer{scene, params, rng, {}};
    for (const auto& f : scene.furniture) {
      FurnitureSolid solid{next_id++, f.asset, furniture_box(scene, f)};
      placer.blocked.push_back(solid.footprint());
      config.furniture.push_back(std::move(solid));
    }

    for (const auto& a : scene.articulated_targets) {
      const Vec3 half(kHandleWidth / 2.0, kHandleDepth / 2.0, kHandleHeight / 2.0);
      Target t{next_id++, a.asset, TargetKind::Articulated, a.position, a.normal, {a.position - half, a.position + half}};
      placer.blocked.push_back(geom::Rect::of(t.box));
      config.targets.push_back(std::move(t));
    }

    const int rigid_count = static_cast<int>(rng.uniform_int(params.min_rigid, params.max_rigid));
    std::vector<geom::Rect> on_counter;
    for (int r = 0; r < rigid_count; ++r) {
      const AssetEntry& asset =
          rigid_assets[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(rigid_assets.size()) - 1))];
      bool placed = false;
      for (int attempt = 0; attempt < params.max_attempts && !placed; ++attempt) {
        const FurniturePlacement& counter =
            *counters[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(counters.size()) - 1))];
        const double x_lo = counter.offset + kCounterMargin + asset.width / 2.0;
        const double x_hi = counter.offset + counter.asset.width - kCounterMargin - asset.width / 2.0;
        const double gap = rng.uniform(0.03, 0.12);
        const double x = rng.uniform(x_lo, x_hi);
        if (x_hi < x_lo) continue;
        const double y = -counter.asset.depth + gap + asset.depth / 2.0;
        const geom::Rect footprint = geom::Rect::centered(Vec2(x, y), asset.width, asset.depth);
        if (std::any_of(on_counter.begin(), on_counter.end(),
                        [&](const geom::Rect& other) { return geom::rects_overlap(footprint, other); })) {
          continue;
        }
        const Vec3 base(x, y, scene.counter_height);
        geom::Aabb box{Vec3(footprint.min.x(), footprint.min.y(), scene.counter_height),
                       Vec3(footprint.max.x(), footprint.max.y(), scene.counter_height + asset.height)};
        config.targets.push_back({next_id++, asset, TargetKind::Rigid, base, Vec2(0.0, 1.0), box});
        on_counter.push_back(footprint);
        placed = true;
      }
      if (!placed && stats) ++stats->dropped_targets;
    }

    if (!obstacle_assets.empty()) {
      for (const auto& target : config.targets) {
        const int n = static_cast<int>(rng.uniform_int(params.min_obstacles, params.max_obstacles));
        const Vec2 back = -target.normal;
        const Vec2 side(-target.normal.y(), target.normal.x());
        for (int o = 0; o < n; ++o) {
          const AssetEntry& asset = obstacle_assets[static_cast<std::size_t>(
              rng.uniform_int(0, static_cast<std::int64_t>(obstacle_assets.size()) - 1))];
          bool placed = false;
          for (int attempt = 0; attempt < params.max_attempts && !placed; ++attempt) {
            const double radius = params.obstacle_radius * std::sqrt(rng.uniform());
            const double angle = rng.uniform(-std::numbers::pi / 2.0, std::numbers::pi / 2.0);
            const bool turned = rng.bernoulli(0.5);
            const Vec2 center = target.floor() + radius * (std::cos(angle) * back + std::sin(angle) * side);
            const double w = turned ? asset.depth : asset.width;
            const double d = turned ? asset.width : asset.depth;
            const geom::Rect footprint = geom::Rect::centered(center, w, d);
            if (!placer.free(footprint)) continue;
            Obstacle obstacle{next_id++, asset, center, turned ? std::numbers::pi / 2.0 : 0.0, target.id,
                              {Vec3(footprint.min.x(), footprint.min.y(), 0.0),
                               Vec3(footprint.max.x(), footprint.max.y(), asset.height)}};
            placer.blocked.push_back(footprint);
            config.obstacles.push_back(std::move(obstacle));
            placed = true;
          }
          if (!placed && stats) ++stats->dropped_obstacles;
        }
      }
    }
    out.push_back(std::move(config));
  }
  return out;
}

}  // namespace affordgen::scenegen

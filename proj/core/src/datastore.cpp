#include "affordgen/datastore.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>

#include "affordgen/errors.hpp"
#include "affordgen/rng.hpp"
#include "json.hpp"

namespace affordgen::datastore {

using nlohmann::json;

namespace {

constexpr std::size_t kFixedHeader = 16;  // magic + version + type + rank

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32(std::span<const std::uint8_t> b, std::size_t at) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[at + i]) << (8 * i);
  return v;
}

std::uint64_t get_u64(std::span<const std::uint8_t> b, std::size_t at) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[at + i]) << (8 * i);
  return v;
}

std::vector<std::uint8_t> read_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open " + path.string());
  }
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_bytes(const fs::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw IoError("cannot create " + path.string());
  }
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) {
    throw IoError("short write to " + path.string());
  }
}

json parse_json(const std::string& text, const std::string& source) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw DataError(source + ": " + e.what());
  }
}

template <typename Fn>
auto guarded(const std::string& source, Fn&& fn) {
  try {
    return fn();
  } catch (const json::exception& e) {
    throw DataError(source + ": " + e.what());
  }
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

json vec_json(const geom::Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }
json vec_json(const geom::Vec2& v) { return json::array({v.x(), v.y()}); }
geom::Vec3 vec3_of(const json& j) { return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()}; }
geom::Vec2 vec2_of(const json& j) { return {j.at(0).get<double>(), j.at(1).get<double>()}; }

json box_json(const geom::Aabb& b) { return {{"min", vec_json(b.min)}, {"max", vec_json(b.max)}}; }
geom::Aabb box_of(const json& j) { return {vec3_of(j.at("min")), vec3_of(j.at("max"))}; }
std::optional<geom::Aabb> room_of(const json& doc) {
  const auto it = doc.find("room");
  if (it == doc.end() || it->is_null()) return std::nullopt;
  return box_of(*it);
}

json asset_json(const scenegen::AssetEntry& e) {
  return {{"category", scenegen::to_string(e.category)},
          {"name", e.name},
          {"width", e.width},
          {"depth", e.depth},
          {"height", e.height},
          {"mount", scenegen::to_string(e.mount)}};
}

scenegen::AssetEntry asset_of(const json& j) {
  return {scenegen::parse_category(j.at("category").get<std::string>()),
          j.at("name").get<std::string>(),
          j.at("width").get<double>(),
          j.at("depth").get<double>(),
          j.at("height").get<double>(),
          scenegen::parse_mount(j.at("mount").get<std::string>())};
}

json robot_json(const labeler::RobotSpec& r) {
  return {{"name", r.name},
          {"arm_reach", r.arm_reach},
          {"min_reach", r.min_reach},
          {"base_height", r.base_height},
          {"base_radius", r.base_radius},
          {"end_effector", labeler::to_string(r.end_effector)}};
}

labeler::RobotSpec robot_of(const json& j) {
  labeler::RobotSpec r;
  r.name = j.at("name").get<std::string>();
  r.arm_reach = j.at("arm_reach").get<double>();
  r.min_reach = j.value("min_reach", 0.15);
  r.base_height = j.at("base_height").get<double>();
  r.base_radius = j.at("base_radius").get<double>();
  r.end_effector = labeler::parse_end_effector(j.at("end_effector").get<std::string>());
  r.validate();
  return r;
}

json pose_json(const geom::RigidTransform& t) {
  json rotation = json::array();
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) rotation.push_back(t.rotation()(r, c));
  return {{"rotation", rotation}, {"translation", vec_json(t.translation())}};
}

geom::RigidTransform pose_of(const json& j) {
  geom::Mat3 r;
  for (int i = 0; i < 9; ++i) r(i / 3, i % 3) = j.at("rotation").at(static_cast<std::size_t>(i)).get<double>();
  return {r, vec3_of(j.at("translation"))};
}

json intrinsics_json(const geom::CameraIntrinsics& c) {
  return {{"fx", c.fx}, {"fy", c.fy}, {"cx", c.cx}, {"cy", c.cy}, {"width", c.width}, {"height", c.height}};
}

geom::CameraIntrinsics intrinsics_of(const json& j) {
  geom::CameraIntrinsics c;
  c.fx = j.at("fx").get<double>();
  c.fy = j.at("fy").get<double>();
  c.cx = j.at("cx").get<double>();
  c.cy = j.at("cy").get<double>();
  c.width = j.at("width").get<int>();
  c.height = j.at("height").get<int>();
  c.validate();
  return c;
}

ArrayFile cloud_array(const geom::PointCloud& cloud) {
  ArrayFile a;
  a.type = ElementType::Float32;
  const std::size_t cols = 3 + cloud.channel_count();
  a.dims = {cloud.size(), cols};
  a.f32.reserve(cloud.size() * cols);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    for (int k = 0; k < 3; ++k) a.f32.push_back(static_cast<float>(cloud.point(i)[k]));
    for (double c : cloud.channels_of(i)) a.f32.push_back(static_cast<float>(c));
  }
  return a;
}

void expect_shape(const ArrayFile& a, ElementType type, std::size_t rank, const fs::path& path) {
  if (a.type != type) {
    throw FormatError(FormatError::Kind::ElementType, path.string(), 8, "unexpected element type");
  }
  if (a.dims.size() != rank) {
    throw FormatError(FormatError::Kind::Shape, path.string(), 12,
                      "expected rank " + std::to_string(rank) + ", got " + std::to_string(a.dims.size()));
  }
}

geom::PointCloud cloud_of(const ArrayFile& a, std::vector<std::string> names, const fs::path& path) {
  expect_shape(a, ElementType::Float32, 2, path);
  if (a.dims[1] != 3 + names.size()) {
    throw FormatError(FormatError::Kind::Shape, path.string(), kFixedHeader,
                      "expected " + std::to_string(3 + names.size()) + " columns, got " + std::to_string(a.dims[1]));
  }
  const std::size_t cols = a.dims[1];
  geom::PointCloud cloud(std::move(names));
  cloud.reserve(a.dims[0]);
  std::vector<double> channels(cols - 3);
  for (std::size_t i = 0; i < a.dims[0]; ++i) {
    const float* row = a.f32.data() + i * cols;
    for (std::size_t c = 3; c < cols; ++c) channels[c - 3] = row[c];
    cloud.push_back(geom::Vec3(row[0], row[1], row[2]), channels);
  }
  return cloud;
}

std::string id_name(const char* prefix, std::uint64_t id) { return std::string(prefix) + std::to_string(id); }

}  // namespace

std::uint64_t ArrayFile::element_count() const {
  std::uint64_t n = 1;
  for (auto d : dims) n *= d;
  return n;
}

std::vector<std::uint8_t> encode_array(const ArrayFile& array) {
  const std::uint64_t n = array.element_count();
  const std::size_t have = array.type == ElementType::Float32 ? array.f32.size() : array.u32.size();
  if (have != n) {
    throw UsageError("array payload has " + std::to_string(have) + " elements, dims imply " + std::to_string(n));
  }
  std::vector<std::uint8_t> out;
  out.reserve(kFixedHeader + 8 * array.dims.size() + 4 * n);
  out.insert(out.end(), kMagic, kMagic + 4);
  put_u32(out, kFormatVersion);
  put_u32(out, static_cast<std::uint32_t>(array.type));
  put_u32(out, static_cast<std::uint32_t>(array.dims.size()));
  for (auto d : array.dims) put_u64(out, d);
  if (array.type == ElementType::Float32) {
    for (float f : array.f32) put_u32(out, std::bit_cast<std::uint32_t>(f));
  } else {
    for (std::uint32_t v : array.u32) put_u32(out, v);
  }
  return out;
}

ArrayFile decode_array(std::span<const std::uint8_t> bytes, const std::string& source) {
  using K = FormatError::Kind;
  if (!bytes.empty() && std::memcmp(bytes.data(), kMagic, std::min<std::size_t>(bytes.size(), 4)) != 0) {
    throw FormatError(K::Magic, source, 0, "expected \"MMKA\"");
  }
  if (bytes.size() < kFixedHeader) {
    throw FormatError(K::Length, source, bytes.size(), "header truncated");
  }
  const std::uint32_t version = get_u32(bytes, 4);
  if (version != kFormatVersion) {
    throw FormatError(K::Version, source, 4, "version " + std::to_string(version));
  }
  ArrayFile a;
  const std::uint32_t tag = get_u32(bytes, 8);
  if (tag != static_cast<std::uint32_t>(ElementType::Float32) && tag != static_cast<std::uint32_t>(ElementType::UInt32)) {
    throw FormatError(K::ElementType, source, 8, "tag " + std::to_string(tag));
  }
  a.type = static_cast<ElementType>(tag);
  const std::uint32_t rank = get_u32(bytes, 12);
  if (rank > 8) {
    throw FormatError(K::Shape, source, 12, "rank " + std::to_string(rank));
  }
  const std::size_t header = kFixedHeader + 8 * static_cast<std::size_t>(rank);
  if (bytes.size() < header) {
    throw FormatError(K::Length, source, bytes.size(), "dimension table truncated");
  }
  for (std::uint32_t i = 0; i < rank; ++i) a.dims.push_back(get_u64(bytes, kFixedHeader + 8 * i));
  const std::uint64_t n = a.element_count();
  const std::uint64_t payload = bytes.size() - header;
  if (payload != 4 * n) {
    throw FormatError(K::Length, source, std::min<std::uint64_t>(bytes.size(), header + 4 * n),
                      "payload " + std::to_string(payload) + " bytes, expected " + std::to_string(4 * n));
  }
  if (a.type == ElementType::Float32) {
    a.f32.resize(n);
    for (std::uint64_t i = 0; i < n; ++i) a.f32[i] = std::bit_cast<float>(get_u32(bytes, header + 4 * i));
  } else {
    a.u32.resize(n);
    for (std::uint64_t i = 0; i < n; ++i) a.u32[i] = get_u32(bytes, header + 4 * i);
  }
  return a;
}

void write_array(const fs::path& path, const ArrayFile& array) { write_bytes(path, encode_array(array)); }

ArrayFile read_array(const fs::path& path) { return decode_array(read_bytes(path), path.string()); }

geom::PointCloud attach_feature_channels(const geom::PointCloud& cloud, std::uint32_t target_id,
                                         std::span<const std::uint32_t> obstacle_ids) {
  const auto id_channel = cloud.channel_index(geom::kIdChannel);
  if (!id_channel) {
    throw UsageError("attach_feature_channels: cloud has no id channel");
  }
  const std::set<std::uint32_t> obstacles(obstacle_ids.begin(), obstacle_ids.end());
  std::vector<double> target(cloud.size(), 0.0);
  std::vector<double> obstacle(cloud.size(), 0.0);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const auto id = static_cast<std::uint32_t>(cloud.channel(i, *id_channel));
    if (id == target_id) target[i] = 1.0;
    if (obstacles.contains(id)) obstacle[i] = -1.0;
  }
  geom::PointCloud out = cloud;
  out.add_channel(kTargetChannel, target);
  out.add_channel(kObstacleChannel, obstacle);
  return out;
}

geom::PointCloud quantized(const geom::PointCloud& cloud) {
  geom::PointCloud out(cloud.channel_names());
  out.reserve(cloud.size());
  std::vector<double> channels(cloud.channel_count());
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const geom::Vec3 p = as_float32(cloud.point(i));
    const auto src = cloud.channels_of(i);
    for (std::size_t c = 0; c < channels.size(); ++c) channels[c] = as_float32(src[c]);
    out.push_back(p, channels);
  }
  return out;
}

void quantize(Episode& e) {
  e.global_cloud = quantized(e.global_cloud);
  e.floor_cloud = quantized(e.floor_cloud);
  if (e.sparse) {
    for (auto& s : e.sparse->samples) s.position = as_float32(s.position);
  }
  if (e.dense) {
    for (double& v : e.dense->values) v = as_float32(v);
  }
}

void write_episode(const Episode& e, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    throw IoError("cannot create " + dir.string() + ": " + ec.message());
  }
  if (e.dense && e.dense->size() != e.floor_cloud.size()) {
    throw DataError("episode " + std::to_string(e.episode_id) + ": dense map length differs from floor cloud");
  }

  ArrayFile depth{ElementType::Float32, {static_cast<std::uint64_t>(e.depth.height), static_cast<std::uint64_t>(e.depth.width)}, {}, {}};
  depth.f32.reserve(e.depth.values.size());
  for (float d : e.depth.values) {
    depth.f32.push_back(std::isfinite(d) ? d : std::bit_cast<float>(0xFFFFFFFFu));
  }
  write_array(dir / "depth.bin", depth);

  ArrayFile ids{ElementType::UInt32, {static_cast<std::uint64_t>(e.ids.height), static_cast<std::uint64_t>(e.ids.width)}, {}, e.ids.values};
  write_array(dir / "ids.bin", ids);
  write_array(dir / "cloud.bin", cloud_array(e.global_cloud));
  write_array(dir / "floor.bin", cloud_array(e.floor_cloud));

  json meta = {{"version", kFormatVersion},
               {"episode_id", e.episode_id},
               {"config_id", e.config_id},
               {"scene_id", e.scene_id},
               {"target_id", e.target_id},
               {"target_position", vec_json(e.target_position)},
               {"approach_normal", vec_json(e.approach_normal)},
               {"pose", pose_json(e.pose)},
               {"intrinsics", intrinsics_json(e.intrinsics)},
               {"robot", robot_json(e.robot)},
               {"cloud_channels", e.global_cloud.channel_names()},
               {"floor_channels", e.floor_cloud.channel_names()}};

  std::error_code ignored;
  if (e.sparse) {
    ArrayFile sparse{ElementType::Float32, {e.sparse->samples.size(), 3}, {}, {}};
    for (const auto& s : e.sparse->samples) {
      sparse.f32.push_back(static_cast<float>(s.position.x()));
      sparse.f32.push_back(static_cast<float>(s.position.y()));
      sparse.f32.push_back(static_cast<float>(s.value));
    }
    write_array(dir / "sparse.bin", sparse);
    meta["sparse"] = {{"robot", robot_json(e.sparse->robot)},
                      {"target_id", e.sparse->target_id},
                      {"spacing", e.sparse->spacing}};
  } else {
    fs::remove(dir / "sparse.bin", ignored);
  }
  if (e.dense) {
    ArrayFile dense{ElementType::Float32, {e.dense->size()}, {}, {}};
    for (double v : e.dense->values) dense.f32.push_back(static_cast<float>(v));
    write_array(dir / "dense.bin", dense);
    meta["dense"] = {{"k", e.dense->params.k}, {"sigma", e.dense->params.sigma}, {"theta", e.dense->params.theta}};
  } else {
    fs::remove(dir / "dense.bin", ignored);
  }
  write_text(dir / "meta.json", dump(meta));
}

Episode read_episode(const fs::path& dir) {
  const fs::path meta_path = dir / "meta.json";
  const json meta = parse_json(read_text(meta_path), meta_path.string());
  Episode e;
  guarded(meta_path.string(), [&] {
    const auto version = meta.at("version").get<std::uint32_t>();
    if (version != kFormatVersion) {
      throw FormatError(FormatError::Kind::Version, meta_path.string(), 0, "version " + std::to_string(version));
    }
    e.episode_id = meta.at("episode_id").get<std::uint64_t>();
    e.config_id = meta.at("config_id").get<std::uint64_t>();
    e.scene_id = meta.at("scene_id").get<std::uint64_t>();
    e.target_id = meta.at("target_id").get<std::uint32_t>();
    e.target_position = vec3_of(meta.at("target_position"));
    e.approach_normal = vec2_of(meta.at("approach_normal"));
    e.pose = pose_of(meta.at("pose"));
    e.intrinsics = intrinsics_of(meta.at("intrinsics"));
    e.robot = robot_of(meta.at("robot"));
    return 0;
  });

  const ArrayFile depth = read_array(dir / "depth.bin");
  expect_shape(depth, ElementType::Float32, 2, dir / "depth.bin");
  e.depth.height = static_cast<int>(depth.dims[0]);
  e.depth.width = static_cast<int>(depth.dims[1]);
  e.depth.values.reserve(depth.f32.size());
  for (float d : depth.f32) e.depth.values.push_back(std::isfinite(d) ? d : geom::DepthMap::no_hit());

  const ArrayFile ids = read_array(dir / "ids.bin");
  expect_shape(ids, ElementType::UInt32, 2, dir / "ids.bin");
  if (ids.dims != depth.dims) {
    throw FormatError(FormatError::Kind::Shape, (dir / "ids.bin").string(), kFixedHeader, "id map size differs from depth map");
  }
  e.ids.height = e.depth.height;
  e.ids.width = e.depth.width;
  e.ids.values = ids.u32;

  const auto names = [&](const char* key) {
    return guarded(meta_path.string(), [&] { return meta.at(key).get<std::vector<std::string>>(); });
  };
  e.global_cloud = cloud_of(read_array(dir / "cloud.bin"), names("cloud_channels"), dir / "cloud.bin");
  e.floor_cloud = cloud_of(read_array(dir / "floor.bin"), names("floor_channels"), dir / "floor.bin");

  if (meta.contains("sparse")) {
    const fs::path path = dir / "sparse.bin";
    const ArrayFile a = read_array(path);
    expect_shape(a, ElementType::Float32, 2, path);
    if (a.dims[1] != 3) {
      throw FormatError(FormatError::Kind::Shape, path.string(), kFixedHeader, "expected 3 columns");
    }
    labeler::SparseAffordance sparse;
    guarded(meta_path.string(), [&] {
      sparse.robot = robot_of(meta.at("sparse").at("robot"));
      sparse.target_id = meta.at("sparse").at("target_id").get<std::uint32_t>();
      sparse.spacing = meta.at("sparse").at("spacing").get<double>();
      return 0;
    });
    for (std::size_t i = 0; i < a.dims[0]; ++i) {
      const float* row = a.f32.data() + 3 * i;
      sparse.samples.push_back({geom::Vec2(row[0], row[1]), static_cast<std::uint8_t>(row[2] != 0.0f ? 1 : 0)});
    }
    e.sparse = std::move(sparse);
  }
  if (meta.contains("dense")) {
    const fs::path path = dir / "dense.bin";
    const ArrayFile a = read_array(path);
    expect_shape(a, ElementType::Float32, 1, path);
    if (a.dims[0] != e.floor_cloud.size()) {
      throw FormatError(FormatError::Kind::Length, path.string(), kFixedHeader,
                        "dense map has " + std::to_string(a.dims[0]) + " values for " +
                            std::to_string(e.floor_cloud.size()) + " floor points");
    }
    affordance::DenseAffordanceMap dense;
    guarded(meta_path.string(), [&] {
      dense.params.k = meta.at("dense").at("k").get<int>();
      dense.params.sigma = meta.at("dense").at("sigma").get<double>();
      dense.params.theta = meta.at("dense").at("theta").get<double>();
      return 0;
    });
    dense.values.assign(a.f32.begin(), a.f32.end());
    e.dense = std::move(dense);
  }
  return e;
}

const char* to_string(Split split) { return split == Split::Train ? "train" : "test"; }

Split parse_split(const std::string& text) {
  if (text == "train") return Split::Train;
  if (text == "test") return Split::Test;
  throw DataError("unknown split '" + text + "'");
}

fs::path scene_dir(const fs::path& root, std::uint64_t scene_id) { return root / id_name("scene_", scene_id); }

fs::path config_dir(const fs::path& root, std::uint64_t scene_id, std::uint64_t config_id) {
  return scene_dir(root, scene_id) / id_name("config_", config_id);
}

fs::path episode_dir(const fs::path& root, std::uint64_t scene_id, std::uint64_t config_id, std::uint64_t episode_id) {
  return config_dir(root, scene_id, config_id) / id_name("episode_", episode_id);
}

void write_manifest(const DatasetManifest& m, const fs::path& root) {
  json scenes = json::array();
  for (const auto& s : m.scenes) {
    json configs = json::array();
    for (const auto& c : s.configs) {
      configs.push_back({{"config_id", c.config_id}, {"episode_ids", c.episode_ids}});
    }
    scenes.push_back({{"scene_id", s.scene_id}, {"split", to_string(s.split)}, {"configs", configs}});
  }
  const json doc = {{"version", m.version}, {"seed", m.seed}, {"scenes", scenes}, {"params", m.params}};
  std::error_code ec;
  fs::create_directories(root, ec);
  write_text(root / "manifest.json", dump(doc));
}

DatasetManifest read_manifest(const fs::path& root) {
  const fs::path path = root / "manifest.json";
  const json doc = parse_json(read_text(path), path.string());
  return guarded(path.string(), [&] {
    DatasetManifest m;
    m.version = doc.at("version").get<std::uint32_t>();
    if (m.version != kFormatVersion) {
      throw FormatError(FormatError::Kind::Version, path.string(), 0, "version " + std::to_string(m.version));
    }
    m.seed = doc.at("seed").get<std::uint64_t>();
    m.params = doc.value("params", std::map<std::string, std::string>{});
    for (const auto& s : doc.at("scenes")) {
      SceneEntry entry;
      entry.scene_id = s.at("scene_id").get<std::uint64_t>();
      entry.split = parse_split(s.at("split").get<std::string>());
      for (const auto& c : s.at("configs")) {
        entry.configs.push_back({c.at("config_id").get<std::uint64_t>(), c.at("episode_ids").get<std::vector<std::uint64_t>>()});
      }
      m.scenes.push_back(std::move(entry));
    }
    return m;
  });
}

DatasetManifest split_dataset(const DatasetManifest& manifest, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw UsageError("train fraction must lie in (0, 1)");
  }
  const std::size_t n = manifest.scenes.size();
  if (n < 2) {
    throw UsageError("splitting needs at least 2 scenes, manifest has " + std::to_string(n));
  }
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Rng rng(derive_seed(seed, {0x5B117}));
  rng.shuffle(order);
  const auto wanted = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(n)));
  const std::size_t train = std::clamp<std::size_t>(wanted, 1, n - 1);

  DatasetManifest out = manifest;
  for (std::size_t rank = 0; rank < n; ++rank) {
    out.scenes[order[rank]].split = rank < train ? Split::Train : Split::Test;
  }
  return out;
}

DatasetStats count(const DatasetManifest& m) {
  DatasetStats st;
  for (const auto& s : m.scenes) {
    SplitCounts& bucket = s.split == Split::Train ? st.train : st.test;
    for (SplitCounts* c : {&bucket, &st.total}) {
      c->scenes += 1;
      c->configurations += s.configs.size();
      for (const auto& cfg : s.configs) c->episodes += cfg.episode_ids.size();
    }
  }
  return st;
}

DatasetStats stats(const DatasetManifest& m, const fs::path& root) {
  std::set<fs::path> expected;
  for (const auto& s : m.scenes) {
    expected.insert(scene_dir(root, s.scene_id));
    for (const auto& c : s.configs) {
      expected.insert(config_dir(root, s.scene_id, c.config_id));
      for (auto e : c.episode_ids) expected.insert(episode_dir(root, s.scene_id, c.config_id, e));
    }
  }

  std::set<fs::path> found;
  std::error_code ec;
  const auto is_dir_with_prefix = [](const fs::directory_entry& d, const char* prefix) {
    return d.is_directory() && d.path().filename().string().rfind(prefix, 0) == 0;
  };
  for (const auto& sd : fs::directory_iterator(root, ec)) {
    if (!is_dir_with_prefix(sd, "scene_")) continue;
    found.insert(sd.path());
    for (const auto& cd : fs::directory_iterator(sd.path())) {
      if (!is_dir_with_prefix(cd, "config_")) continue;
      found.insert(cd.path());
      for (const auto& ed : fs::directory_iterator(cd.path())) {
        if (is_dir_with_prefix(ed, "episode_")) found.insert(ed.path());
      }
    }
  }
  if (ec) {
    throw IoError("cannot list " + root.string() + ": " + ec.message());
  }

  std::ostringstream problems;
  std::size_t issues = 0;
  for (const auto& p : expected) {
    if (!found.contains(p)) {
      problems << "\n  missing: " << fs::relative(p, root).string();
      ++issues;
    }
  }
  for (const auto& p : found) {
    if (!expected.contains(p)) {
      problems << "\n  not in manifest: " << fs::relative(p, root).string();
      ++issues;
    }
  }
  if (issues > 0) {
    throw DataError("dataset at " + root.string() + " disagrees with its manifest (" + std::to_string(issues) +
                    " discrepancies):" + problems.str());
  }
  return count(m);
}

std::string to_json(const scenegen::AssetCatalog& catalog) {
  json entries = json::array();
  for (const auto& e : catalog.entries) entries.push_back(asset_json(e));
  return dump({{"assets", entries}});
}

scenegen::AssetCatalog catalog_from_json(const std::string& text) {
  const json doc = parse_json(text, "catalog");
  scenegen::AssetCatalog catalog = guarded("catalog", [&] {
    scenegen::AssetCatalog c;
    for (const auto& e : doc.at("assets")) c.entries.push_back(asset_of(e));
    return c;
  });
  catalog.validate();
  return catalog;
}

scenegen::AssetCatalog load_catalog(const fs::path& path) { return catalog_from_json(read_text(path)); }

std::string to_json(const std::vector<labeler::RobotSpec>& robots) {
  json list = json::array();
  for (const auto& r : robots) list.push_back(robot_json(r));
  return dump({{"robots", list}});
}

std::vector<labeler::RobotSpec> robots_from_json(const std::string& text) {
  const json doc = parse_json(text, "robots");
  return guarded("robots", [&] {
    std::vector<labeler::RobotSpec> out;
    for (const auto& r : doc.at("robots")) out.push_back(robot_of(r));
    return out;
  });
}

std::vector<labeler::RobotSpec> load_robots(const fs::path& path) { return robots_from_json(read_text(path)); }

std::string to_json(const scenegen::SceneSpec& scene) {
  json furniture = json::array();
  for (const auto& f : scene.furniture) furniture.push_back({{"asset", asset_json(f.asset)}, {"offset", f.offset}});
  json articulated = json::array();
  for (const auto& a : scene.articulated_targets) {
    articulated.push_back({{"asset", asset_json(a.asset)}, {"position", vec_json(a.position)}, {"normal", vec_json(a.normal)}});
  }
  return dump({{"version", kFormatVersion},
               {"scene_id", scene.scene_id},
               {"wall_length", scene.wall_length},
               {"counter_height", scene.counter_height},
               {"room", scene.room ? box_json(*scene.room) : json(nullptr)},
               {"furniture", furniture},
               {"articulated_targets", articulated}});
}

scenegen::SceneSpec scene_from_json(const std::string& text) {
  const json doc = parse_json(text, "scene");
  return guarded("scene", [&] {
    scenegen::SceneSpec s;
    s.scene_id = doc.at("scene_id").get<std::uint64_t>();
    s.wall_length = doc.at("wall_length").get<double>();
    s.counter_height = doc.at("counter_height").get<double>();
    s.room = room_of(doc);
    for (const auto& f : doc.at("furniture")) s.furniture.push_back({asset_of(f.at("asset")), f.at("offset").get<double>()});
    for (const auto& a : doc.at("articulated_targets")) {
      s.articulated_targets.push_back({asset_of(a.at("asset")), vec3_of(a.at("position")), vec2_of(a.at("normal"))});
    }
    return s;
  });
}

std::string to_json(const scenegen::Configuration& c) {
  json furniture = json::array();
  for (const auto& f : c.furniture) furniture.push_back({{"id", f.id}, {"asset", asset_json(f.asset)}, {"box", box_json(f.box)}});
  json targets = json::array();
  for (const auto& t : c.targets) {
    targets.push_back({{"id", t.id},
                       {"asset", asset_json(t.asset)},
                       {"kind", t.kind == scenegen::TargetKind::Rigid ? "rigid" : "articulated"},
                       {"position", vec_json(t.position)},
                       {"normal", vec_json(t.normal)},
                       {"box", box_json(t.box)}});
  }
  json obstacles = json::array();
  for (const auto& o : c.obstacles) {
    obstacles.push_back({{"id", o.id},
                         {"asset", asset_json(o.asset)},
                         {"position", vec_json(o.position)},
                         {"yaw", o.yaw},
                         {"near_target", o.near_target},
                         {"box", box_json(o.box)}});
  }
  return dump({{"version", kFormatVersion},
               {"config_id", c.config_id},
               {"scene_id", c.scene_id},
               {"furniture", furniture},
               {"targets", targets},
               {"obstacles", obstacles},
               {"room", c.room ? box_json(*c.room) : json(nullptr)}});
}

scenegen::Configuration configuration_from_json(const std::string& text) {
  const json doc = parse_json(text, "configuration");
  return guarded("configuration", [&] {
    scenegen::Configuration c;
    c.config_id = doc.at("config_id").get<std::uint64_t>();
    c.scene_id = doc.at("scene_id").get<std::uint64_t>();
    c.room = room_of(doc);
    for (const auto& f : doc.at("furniture")) {
      c.furniture.push_back({f.at("id").get<std::uint32_t>(), asset_of(f.at("asset")), box_of(f.at("box"))});
    }
    for (const auto& t : doc.at("targets")) {
      const auto kind = t.at("kind").get<std::string>();
      if (kind != "rigid" && kind != "articulated") throw DataError("configuration: unknown target kind '" + kind + "'");
      c.targets.push_back({t.at("id").get<std::uint32_t>(), asset_of(t.at("asset")),
                           kind == "rigid" ? scenegen::TargetKind::Rigid : scenegen::TargetKind::Articulated,
                           vec3_of(t.at("position")), vec2_of(t.at("normal")), box_of(t.at("box"))});
    }
    for (const auto& o : doc.at("obstacles")) {
      c.obstacles.push_back({o.at("id").get<std::uint32_t>(), asset_of(o.at("asset")), vec2_of(o.at("position")),
                             o.at("yaw").get<double>(), o.at("near_target").get<std::uint32_t>(), box_of(o.at("box"))});
    }
    return c;
  });
}

void write_configuration(const scenegen::Configuration& config, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  write_text(dir / "config.json", to_json(config));
}

scenegen::Configuration read_configuration(const fs::path& dir) {
  return configuration_from_json(read_text(dir / "config.json"));
}

void write_scene(const scenegen::SceneSpec& scene, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  write_text(dir / "scene.json", to_json(scene));
}

scenegen::SceneSpec read_scene(const fs::path& dir) { return scene_from_json(read_text(dir / "scene.json")); }

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open " + path.string());
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_text(const fs::path& path, const std::string& text) {
  write_bytes(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

}  // namespace affordgen::datastore

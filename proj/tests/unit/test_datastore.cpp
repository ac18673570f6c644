#include <algorithm>
#include <fstream>

#include "affordgen/datastore.hpp"
#include "affordgen/errors.hpp"
#include "affordgen/pipeline.hpp"
#include "doctest.h"
#include "support/fixtures.hpp"

using namespace affordgen;
using namespace affordgen::datastore;
using geom::Vec2;
using geom::Vec3;

namespace {

std::vector<std::uint8_t> file_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void put_bytes(const fs::path& p, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

FormatError::Kind decode_kind(const std::vector<std::uint8_t>& bytes) {
  try {
    decode_array(bytes, "x.bin");
  } catch (const FormatError& e) {
    return e.kind();
  }
  FAIL("decode succeeded");
  return FormatError::Kind::Magic;
}

/// A labeled, interpolated episode of the counter-and-mug fixture.
Episode sample_episode() {
  pipeline::PipelineConfig cfg;
  cfg.views = 2;
  auto config = fixture::counter_with_mug();
  config.obstacles.push_back(fixture::obstacle(3, Vec2(0.7, -1.1), 0.3, 0.3));
  const auto robot = labeler::find_robot(labeler::default_robots(), "panda");
  auto episodes = pipeline::make_episodes(cfg, config, 17, robot, true);
  REQUIRE(!episodes.empty());
  return episodes.front();
}

DatasetManifest synthetic_manifest(std::size_t scenes, std::size_t configs, std::size_t episodes) {
  DatasetManifest m;
  m.seed = 4;
  for (std::size_t s = 0; s < scenes; ++s) {
    SceneEntry scene{s, Split::Train, {}};
    for (std::size_t c = 0; c < configs; ++c) {
      ConfigEntry entry{c, {}};
      for (std::size_t e = 0; e < episodes; ++e) entry.episode_ids.push_back(e);
      scene.configs.push_back(entry);
    }
    m.scenes.push_back(scene);
  }
  return m;
}

}  // namespace

TEST_CASE("array encoding: header layout byte for byte") {
  ArrayFile a;
  a.type = ElementType::Float32;
  a.dims = {2};
  a.f32 = {1.0f, -2.0f};
  const std::vector<std::uint8_t> expect{'M', 'M', 'K', 'A', 1, 0, 0, 0, 1, 0, 0, 0, 1, 0, 0, 0,
                                         2,   0,   0,   0,   0, 0, 0, 0, 0, 0, 0x80, 0x3f, 0, 0, 0, 0xc0};
  CHECK(encode_array(a) == expect);
  const auto back = decode_array(expect, "x.bin");
  CHECK(back.dims == a.dims);
  CHECK(back.f32 == a.f32);
}

TEST_CASE("array decoding rejects damaged files") {
  ArrayFile a;
  a.type = ElementType::UInt32;
  a.dims = {2, 3};
  a.u32 = {1, 2, 3, 4, 5, 6};
  const auto good = encode_array(a);
  CHECK(decode_array(good, "ok").u32 == a.u32);

  auto bytes = good;
  bytes[0] = 'X';
  CHECK(decode_kind(bytes) == FormatError::Kind::Magic);
  try {
    decode_array(bytes, "x.bin");
  } catch (const FormatError& e) {
    CHECK(e.offset() == 0);
    CHECK(e.file() == "x.bin");
  }

  bytes = good;
  bytes[4] = 9;
  CHECK(decode_kind(bytes) == FormatError::Kind::Version);

  bytes = good;
  bytes[8] = 7;
  CHECK(decode_kind(bytes) == FormatError::Kind::ElementType);

  bytes = good;
  bytes.pop_back();
  CHECK(decode_kind(bytes) == FormatError::Kind::Length);
  bytes = good;
  bytes.push_back(0);
  CHECK(decode_kind(bytes) == FormatError::Kind::Length);
  CHECK(decode_kind({'M', 'M'}) == FormatError::Kind::Length);
}

TEST_CASE("feature channels") {
  geom::PointCloud cloud({"id"});
  for (double id : {0.0, 2.0, 3.0, 1.0}) cloud.push_back(Vec3(id, 0, 0), std::vector<double>{id});
  const std::vector<std::uint32_t> obstacles{3};
  const auto out = attach_feature_channels(cloud, 2, obstacles);
  const auto t = *out.channel_index(kTargetChannel);
  const auto o = *out.channel_index(kObstacleChannel);
  CHECK(out.channel(0, t) == 0.0);
  CHECK(out.channel(1, t) == 1.0);
  CHECK(out.channel(2, o) == -1.0);
  CHECK(out.channel(3, o) == 0.0);
  CHECK(out.points() == cloud.points());
  CHECK_THROWS_AS(attach_feature_channels(geom::PointCloud{}, 2, obstacles), UsageError);
}

TEST_CASE("episode round trip is exact and byte-stable") {
  const Episode e = sample_episode();
  REQUIRE(e.sparse);
  REQUIRE(e.dense);
  fixture::TempDir tmp("episode");
  write_episode(e, tmp / "a");
  for (const char* name : {"depth.bin", "ids.bin", "cloud.bin", "floor.bin", "sparse.bin", "dense.bin", "meta.json"}) {
    CHECK(fs::exists(tmp / "a" / name));
  }
  const Episode back = read_episode(tmp / "a");
  CHECK(back == e);
  write_episode(back, tmp / "b");
  CHECK(fixture::tree_bytes(tmp / "a") == fixture::tree_bytes(tmp / "b"));
}

TEST_CASE("unlabeled episodes omit sparse and dense files") {
  Episode e = sample_episode();
  e.sparse.reset();
  e.dense.reset();
  fixture::TempDir tmp("bare");
  write_episode(e, tmp.path());
  CHECK_FALSE(fs::exists(tmp / "sparse.bin"));
  CHECK(read_episode(tmp.path()) == e);
}

TEST_CASE("damaged episode files surface as format errors") {
  const Episode e = sample_episode();
  fixture::TempDir tmp("damaged");
  write_episode(e, tmp.path());
  auto bytes = file_bytes(tmp / "floor.bin");
  bytes.resize(bytes.size() - 3);
  put_bytes(tmp / "floor.bin", bytes);
  try {
    read_episode(tmp.path());
    FAIL("expected a format error");
  } catch (const FormatError& err) {
    CHECK(err.kind() == FormatError::Kind::Length);
    CHECK(err.file().find("floor.bin") != std::string::npos);
  }

  write_episode(e, tmp.path());
  bytes = file_bytes(tmp / "depth.bin");
  bytes[1] = 'Z';
  put_bytes(tmp / "depth.bin", bytes);
  try {
    read_episode(tmp.path());
    FAIL("expected a format error");
  } catch (const FormatError& err) {
    CHECK(err.kind() == FormatError::Kind::Magic);
  }
}

TEST_CASE("split: 569 scenes at the default fraction") {
  const auto m = split_dataset(synthetic_manifest(569, 1, 1), 456.0 / 569.0, 3);
  const auto c = count(m);
  CHECK(c.train.scenes == 456);
  CHECK(c.test.scenes == 113);
  CHECK(c.total.scenes == 569);
  CHECK(split_dataset(synthetic_manifest(569, 1, 1), 456.0 / 569.0, 3) == m);
  CHECK(split_dataset(synthetic_manifest(569, 1, 1), 456.0 / 569.0, 4) != m);
}

TEST_CASE("split: small datasets keep both sides non-empty") {
  auto c = count(split_dataset(synthetic_manifest(2, 1, 1), 0.8, 0));
  CHECK(c.train.scenes == 1);
  CHECK(c.test.scenes == 1);
  c = count(split_dataset(synthetic_manifest(10, 1, 1), 0.97, 0));
  CHECK(c.test.scenes == 1);
  CHECK_THROWS_AS(split_dataset(synthetic_manifest(1, 1, 1), 0.8, 0), UsageError);
  CHECK_THROWS_AS(split_dataset(synthetic_manifest(4, 1, 1), 1.0, 0), UsageError);
}

TEST_CASE("stats agree with a directory walk and catch missing directories") {
  fixture::TempDir tmp("stats");
  auto m = split_dataset(synthetic_manifest(5, 3, 4), 0.6, 1);
  for (const auto& s : m.scenes)
    for (const auto& c : s.configs)
      for (auto e : c.episode_ids) fs::create_directories(episode_dir(tmp.path(), s.scene_id, c.config_id, e));
  write_manifest(m, tmp.path());
  CHECK(read_manifest(tmp.path()) == m);

  std::size_t scenes = 0, configs = 0, episodes = 0;
  for (const auto& entry : fs::recursive_directory_iterator(tmp.path())) {
    const auto name = entry.path().filename().string();
    if (!entry.is_directory()) continue;
    scenes += name.rfind("scene_", 0) == 0;
    configs += name.rfind("config_", 0) == 0;
    episodes += name.rfind("episode_", 0) == 0;
  }
  const auto st = stats(m, tmp.path());
  CHECK(st.total.scenes == scenes);
  CHECK(st.total.configurations == configs);
  CHECK(st.total.episodes == episodes);
  CHECK(st.train.episodes + st.test.episodes == episodes);
  CHECK(st.train.scenes == 3);

  fs::remove_all(episode_dir(tmp.path(), 2, 1, 3));
  try {
    stats(m, tmp.path());
    FAIL("expected a data error");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("episode_") != std::string::npos);
  }
  fs::create_directories(episode_dir(tmp.path(), 2, 1, 3));
  fs::create_directories(episode_dir(tmp.path(), 2, 1, 99));
  CHECK_THROWS_AS(stats(m, tmp.path()), DataError);
}

TEST_CASE("JSON documents round trip") {
  const auto catalog = scenegen::AssetCatalog::defaults();
  CHECK(catalog_from_json(to_json(catalog)) == catalog);
  const auto robots = labeler::default_robots();
  CHECK(robots_from_json(to_json(robots)) == robots);

  const auto scene = scenegen::generate_scene(5, catalog);
  CHECK(scene_from_json(to_json(scene)) == scene);
  for (const auto& c : scenegen::generate_configurations(scene, 5, 4, catalog)) {
    CHECK(configuration_from_json(to_json(c)) == c);
    CHECK(to_json(configuration_from_json(to_json(c))) == to_json(c));
  }
  auto open = scene;
  open.room.reset();
  CHECK(scene_from_json(to_json(open)) == open);

  fixture::TempDir tmp("json");
  write_scene(scene, tmp.path());
  CHECK(read_scene(tmp.path()) == scene);
}

TEST_CASE("malformed JSON is a data error, missing files an io error") {
  CHECK_THROWS_AS(catalog_from_json("{"), DataError);
  CHECK_THROWS_AS(catalog_from_json(R"({"assets": [{"name": 3}]})"), DataError);
  CHECK_THROWS_AS(robots_from_json("[]x"), DataError);
  fixture::TempDir tmp("missing");
  CHECK_THROWS_AS(read_text(tmp / "nope.json"), IoError);
  CHECK_THROWS_AS(read_manifest(tmp.path()), IoError);
}

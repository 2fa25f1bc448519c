#include <doctest.h>

#include <unistd.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "aerial/io.hpp"

using namespace aerial;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    static int counter = 0;
    path = fs::temp_directory_path() / ("aerial_io_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

CameraPose random_camera(Rng& rng, int i) {
  CameraPose c;
  c.id = "cam_" + std::to_string(i);
  const Vec3 pos(1000 * rng.uniform() - 500, 1000 * rng.uniform() - 500, 50 + 100 * rng.uniform());
  c.translation = pos;
  c.rotation = look_at_rotation(pos, Vec3(rng.uniform(), rng.uniform(), 0));
  c.time = 1e3 * rng.uniform();
  c.width = 17 + i;
  c.height = 9 + i;
  c.fx = 10 + 90 * rng.uniform();
  c.fy = 10 + 90 * rng.uniform();
  c.cx = c.width * rng.uniform();
  c.cy = c.height * rng.uniform();
  return c;
}

std::vector<PoseRecord> parse(const std::string& text, bool require_time = true) {
  std::istringstream in(text);
  return parse_poses(in, "poses.jsonl", require_time);
}

void write_text(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

}  // namespace

TEST_CASE("camera files round-trip exactly") {
  TempDir dir;
  Rng rng(1);
  std::vector<CameraPose> cams;
  for (int i = 0; i < 10; ++i) cams.push_back(random_camera(rng, i));
  write_cameras(dir.path / "cameras.jsonl", cams);
  const auto back = read_cameras(dir.path / "cameras.jsonl");
  REQUIRE(back.size() == cams.size());
  for (std::size_t i = 0; i < cams.size(); ++i) {
    CHECK(back[i].id == cams[i].id);
    CHECK(back[i].rotation == cams[i].rotation);
    CHECK(back[i].translation == cams[i].translation);
    CHECK(back[i].time == cams[i].time);
    CHECK(back[i].fx == cams[i].fx);
    CHECK(back[i].fy == cams[i].fy);
    CHECK(back[i].cx == cams[i].cx);
    CHECK(back[i].cy == cams[i].cy);
    CHECK(back[i].width == cams[i].width);
    CHECK(back[i].height == cams[i].height);
  }
}

TEST_CASE("pose parsing errors name the line and field") {
  Rng rng(2);
  const std::string good = camera_to_json(random_camera(rng, 0));

  std::string reflected = good;
  {
    CameraPose c = random_camera(rng, 1);
    c.rotation.col(0) *= -1.0;
    reflected = camera_to_json(c);
  }
  CHECK_THROWS_WITH_AS(parse(good + "\n" + reflected + "\n"), doctest::Contains("poses.jsonl:2"), DataError);

  std::string missing = good;
  const auto pos = missing.find("\"fx\"");
  REQUIRE(pos != std::string::npos);
  missing.replace(pos, 4, "\"fz\"");
  CHECK_THROWS_WITH_AS(parse("\n" + missing), doctest::Contains("poses.jsonl:2: missing field 'fx'"), DataError);

  CHECK_THROWS_WITH_AS(parse("{not json"), doctest::Contains("poses.jsonl:1"), DataError);
}

TEST_CASE("query poses may omit time") {
  Rng rng(3);
  std::string line = camera_to_json(random_camera(rng, 0));
  const auto pos = line.find(",\"time\"");
  REQUIRE(pos != std::string::npos);
  const auto end = line.find_first_of(",}", pos + 1);
  line.erase(pos, end - pos);
  const auto recs = parse(line, false);
  REQUIRE(recs.size() == 1);
  CHECK_FALSE(recs[0].has_time);
  CHECK_THROWS_AS(parse(line, true), DataError);
}

TEST_CASE("duplicate camera ids are rejected") {
  TempDir dir;
  Rng rng(4);
  CameraPose c = random_camera(rng, 0);
  write_text(dir.path / "c.jsonl", camera_to_json(c) + "\n" + camera_to_json(c) + "\n");
  CHECK_THROWS_AS(read_cameras(dir.path / "c.jsonl"), DataError);
}

TEST_CASE("regions round-trip and validate") {
  Rng rng(5);
  std::vector<CameraPose> cams;
  for (int i = 0; i < 12; ++i) {
    cams.push_back(random_camera(rng, i));
    cams.back().translation.x() = i < 6 ? 10.0 * i : 500.0 + 10.0 * i;
  }
  PartitionParams p;
  p.n_regions = 2;
  p.min_cameras = 1;
  p.alpha = 60.0;
  RegionSet rs = build_regions(cams, p, SceneFrame{});
  rs.gamma_calibration = 0.123456789012345678;
  const std::string text = regions_to_json(rs);
  const RegionSet back = regions_from_json(text, cams);
  CHECK(back.centroids == rs.centroids);
  CHECK(back.assignments == rs.assignments);
  CHECK(back.home == rs.home);
  CHECK(back.boundary == rs.boundary);
  CHECK(back.gamma_calibration == rs.gamma_calibration);
  CHECK(*back.params.alpha == *rs.params.alpha);
  CHECK(back.params.n_p == rs.params.n_p);
  CHECK(regions_to_json(back) == text);

  std::vector<CameraPose> fewer(cams.begin() + 1, cams.end());
  CHECK_THROWS_WITH_AS(regions_from_json(text, fewer), doctest::Contains("unknown camera id"), DataError);

  RegionSet empty = rs;
  empty.centroids.clear();
  empty.assignments.clear();
  empty.home.clear();
  empty.boundary.clear();
  empty.params.n_regions = 0;
  CHECK_THROWS_AS(regions_from_json(regions_to_json(empty), cams), DataError);
  CHECK_THROWS_AS(regions_from_json("[]", cams), DataError);
}

TEST_CASE("field checkpoints round-trip at single precision") {
  TempDir dir;
  Rng rng(6);
  VoxelGridField f(Aabb{Vec3(-1.25, 2, -3), Vec3(4, 5.5, 6)}, Eigen::Vector3i(3, 4, 5));
  for (Eigen::Index i = 0; i < f.params().size(); ++i) f.params()[i] = 10 * rng.uniform() - 5;
  write_checkpoint(dir.path / "f.anf", f);
  const VoxelGridField g = read_checkpoint(dir.path / "f.anf");
  CHECK(g.bbox().min == f.bbox().min);
  CHECK(g.bbox().max == f.bbox().max);
  CHECK(g.resolution() == f.resolution());
  for (Eigen::Index i = 0; i < f.params().size(); ++i)
    CHECK(g.params()[i] == static_cast<double>(static_cast<float>(f.params()[i])));

  std::ifstream in(dir.path / "f.anf", std::ios::binary);
  std::string magic(5, '\0');
  in.read(magic.data(), 5);
  CHECK(magic == "ANFV1");
  CHECK(fs::file_size(dir.path / "f.anf") == 5 + 6 * 8 + 3 * 4 + 4 * 60 * 4);

  write_text(dir.path / "bad.anf", "ANFV2");
  CHECK_THROWS_AS(read_checkpoint(dir.path / "bad.anf"), DataError);
  fs::resize_file(dir.path / "f.anf", 100);
  CHECK_THROWS_AS(read_checkpoint(dir.path / "f.anf"), DataError);
}

TEST_CASE("PFM images round-trip at single precision") {
  TempDir dir;
  Rng rng(7);
  Image im(5, 3);
  for (Eigen::Index i = 0; i < im.pixels.size(); ++i) im.pixels.data()[i] = rng.uniform();
  write_pfm(dir.path / "a.pfm", im);
  const Image back = read_pfm(dir.path / "a.pfm");
  CHECK(back.width == 5);
  CHECK(back.height == 3);
  for (Eigen::Index i = 0; i < im.pixels.size(); ++i)
    CHECK(back.pixels.data()[i] == static_cast<double>(static_cast<float>(im.pixels.data()[i])));

  // Bottom row is stored first.
  std::ifstream in(dir.path / "a.pfm", std::ios::binary);
  std::string header;
  std::getline(in, header);
  CHECK(header == "PF");
  std::getline(in, header);
  std::getline(in, header);
  CHECK(std::stod(header) < 0.0);
  float first = 0.0f;
  in.read(reinterpret_cast<char*>(&first), 4);
  CHECK(first == static_cast<float>(im.pixel(0, 2)[0]));

  write_ppm(dir.path / "a.ppm", im);
  CHECK(fs::file_size(dir.path / "a.ppm") > 5 * 3 * 3);
  write_text(dir.path / "b.pfm", "P6\n1 1\n255\n");
  CHECK_THROWS_AS(read_pfm(dir.path / "b.pfm"), DataError);
}

TEST_CASE("datasets round-trip and check image coverage") {
  TempDir dir;
  Rng rng(8);
  std::vector<CameraPose> cams;
  std::vector<Image> images;
  for (int i = 0; i < 3; ++i) {
    cams.push_back(random_camera(rng, i));
    images.emplace_back(cams.back().width, cams.back().height);
    images.back().pixels.setConstant(0.25 * i);
  }
  DatasetManifest m;
  m.frame.building_height = 33.0;
  m.frame.foreground_radius = 444.0;
  write_dataset(dir.path, m, cams, images);
  const Dataset ds = read_dataset(dir.path);
  CHECK(ds.manifest.version == 1);
  CHECK(ds.manifest.frame.building_height == 33.0);
  CHECK(ds.manifest.frame.foreground_radius == 444.0);
  CHECK(ds.manifest.frame.earth_center == m.frame.earth_center);
  REQUIRE(ds.cameras.size() == 3);
  CHECK(ds.images[2].pixels == images[2].pixels);
  CHECK(read_dataset(dir.path, false).images.empty());

  SUBCASE("missing image") {
    fs::remove(image_path(dir.path, m, cams[1].id));
    CHECK_THROWS_WITH_AS(read_dataset(dir.path), doctest::Contains(cams[1].id.c_str()), DataError);
  }
  SUBCASE("stray image") {
    write_pfm(dir.path / "images" / "ghost.pfm", images[0]);
    CHECK_THROWS_AS(read_dataset(dir.path), DataError);
  }
  SUBCASE("wrong version") {
    std::ifstream in(dir.path / "manifest.json");
    std::stringstream ss;
    ss << in.rdbuf();
    std::string text = ss.str();
    const auto pos = text.find("\"version\": 1");
    REQUIRE(pos != std::string::npos);
    text.replace(pos, 12, "\"version\": 2");
    write_text(dir.path / "manifest.json", text);
    CHECK_THROWS_WITH_AS(read_dataset(dir.path), doctest::Contains("version"), DataError);
  }
  SUBCASE("image size mismatch") {
    write_pfm(image_path(dir.path, m, cams[0].id), Image(2, 2));
    CHECK_THROWS_AS(read_dataset(dir.path), DataError);
  }
}

TEST_CASE("config files") {
  std::istringstream in(
      "# comment\n"
      "n = 4\n"
      "scale = 2.5  # trailing\n"
      "name = demo\n"
      "flag = true\n"
      "list = 1 2 3\n"
      "colors = 0.1 0.2 0.3; 1 1 1\n");
  Config c = Config::parse(in, "x.cfg");
  CHECK(c.get_int("n", 0) == 4);
  CHECK(c.get_double("scale", 0.0) == 2.5);
  CHECK(c.get_string("name", "") == "demo");
  CHECK(c.get_bool("flag", false));
  CHECK(c.get_doubles("list", {}) == std::vector<double>{1, 2, 3});
  const auto colors = c.get_colors("colors", {});
  REQUIRE(colors.size() == 2);
  CHECK(colors[1] == Vec3(1, 1, 1));
  CHECK(c.get_int("absent", 9) == 9);
  CHECK_NOTHROW(c.finish());

  std::istringstream unknown("n = 4\ntypo = 1\n");
  Config u = Config::parse(unknown, "y.cfg");
  u.get_int("n", 0);
  CHECK_THROWS_WITH_AS(u.finish(), doctest::Contains("y.cfg:2"), DataError);

  std::istringstream dup("n = 4\nn = 5\n");
  CHECK_THROWS_WITH_AS(Config::parse(dup, "z.cfg"), doctest::Contains("z.cfg:2"), DataError);

  std::istringstream bad("n = four\n");
  Config b = Config::parse(bad, "b.cfg");
  CHECK_THROWS_WITH_AS(b.get_int("n", 0), doctest::Contains("b.cfg:1"), DataError);

  std::istringstream noeq("just words\n");
  CHECK_THROWS_AS(Config::parse(noeq, "w.cfg"), DataError);
}

TEST_CASE("seed override from the environment") {
  std::istringstream in("seed = 5\n");
  Config c = Config::parse(in, "s.cfg");
  ::unsetenv("AERO_SEED");
  CHECK(c.get_seed("seed", 1) == 5);
  ::setenv("AERO_SEED", "77", 1);
  CHECK(seed_override() == 77u);
  std::istringstream in2("seed = 5\n");
  Config c2 = Config::parse(in2, "s.cfg");
  CHECK(c2.get_seed("seed", 1) == 77);
  ::setenv("AERO_SEED", "-3", 1);
  CHECK_THROWS_AS(seed_override(), DataError);
  ::setenv("AERO_SEED", "12abc", 1);
  CHECK_THROWS_AS(seed_override(), DataError);
  ::unsetenv("AERO_SEED");
  CHECK_FALSE(seed_override().has_value());
}

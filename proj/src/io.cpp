#include "aerial/io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace aerial {
namespace {

using nlohmann::json;

static_assert(std::endian::native == std::endian::little, "binary formats assume a little-endian host");

constexpr char kCheckpointMagic[5] = {'A', 'N', 'F', 'V', '1'};

std::ifstream open_in(const fs::path& path, std::ios::openmode mode = std::ios::in) {
  std::ifstream in(path, mode);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  return in;
}

std::ofstream open_out(const fs::path& path, std::ios::openmode mode = std::ios::out) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, mode | std::ios::trunc);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  return out;
}

std::string read_text(const fs::path& path) {
  auto in = open_in(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct LineContext {
  const std::string& source;
  int line;

  [[noreturn]] void fail(const std::string& what) const {
    throw DataError(source + ":" + std::to_string(line) + ": " + what);
  }

  const json& field(const json& obj, const char* name) const {
    auto it = obj.find(name);
    if (it == obj.end()) fail(std::string("missing field '") + name + "'");
    return *it;
  }

  double number(const json& obj, const char* name) const {
    const json& v = field(obj, name);
    if (!v.is_number()) fail(std::string("field '") + name + "' must be a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) fail(std::string("field '") + name + "' must be finite");
    return d;
  }

  int integer(const json& obj, const char* name) const {
    const json& v = field(obj, name);
    if (!v.is_number_integer()) fail(std::string("field '") + name + "' must be an integer");
    return v.get<int>();
  }

  std::vector<double> numbers(const json& obj, const char* name, std::size_t count) const {
    const json& v = field(obj, name);
    if (!v.is_array() || v.size() != count)
      fail(std::string("field '") + name + "' must be an array of " + std::to_string(count) + " numbers");
    std::vector<double> out;
    for (const auto& x : v) {
      if (!x.is_number()) fail(std::string("field '") + name + "' must contain numbers only");
      out.push_back(x.get<double>());
    }
    return out;
  }
};

json frame_to_json(const SceneFrame& f) {
  return json{{"earth_center", {f.earth_center.x(), f.earth_center.y(), f.earth_center.z()}},
              {"earth_radius", f.earth_radius},
              {"building_height", f.building_height},
              {"foreground_radius", f.foreground_radius}};
}

SceneFrame frame_from_json(const json& j, const std::string& source) {
  const LineContext ctx{source, 0};
  SceneFrame f;
  const auto c = ctx.numbers(j, "earth_center", 3);
  f.earth_center = Vec3(c[0], c[1], c[2]);
  f.earth_radius = ctx.number(j, "earth_radius");
  f.building_height = ctx.number(j, "building_height");
  f.foreground_radius = ctx.number(j, "foreground_radius");
  validate(f);
  return f;
}

template <typename T>
void put(std::ostream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T get(std::istream& in, const fs::path& path) {
  T value;
  if (!in.read(reinterpret_cast<char*>(&value), sizeof(T))) throw DataError("'" + path.string() + "' is truncated");
  return value;
}

double srgb_encode(double linear) {
  const double c = std::clamp(linear, 0.0, 1.0);
  return c <= 0.0031308 ? 12.92 * c : 1.055 * std::pow(c, 1.0 / 2.4) - 0.055;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

std::string camera_to_json(const CameraPose& p) {
  json rot = json::array();
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) rot.push_back(p.rotation(r, c));
  json j;
  j["id"] = p.id;
  j["width"] = p.width;
  j["height"] = p.height;
  j["fx"] = p.fx;
  j["fy"] = p.fy;
  j["cx"] = p.cx;
  j["cy"] = p.cy;
  j["rotation"] = rot;
  j["translation"] = {p.translation.x(), p.translation.y(), p.translation.z()};
  j["time"] = p.time;
  return j.dump();
}

std::vector<PoseRecord> parse_poses(std::istream& in, const std::string& source, bool require_time) {
  std::vector<PoseRecord> out;
  std::string text;
  int line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (trim(text).empty()) continue;
    const LineContext ctx{source, line};
    json j;
    try {
      j = json::parse(text);
    } catch (const json::parse_error& e) {
      ctx.fail(std::string("invalid JSON: ") + e.what());
    }
    if (!j.is_object()) ctx.fail("expected a JSON object");

    PoseRecord rec;
    CameraPose& p = rec.pose;
    const json& id = ctx.field(j, "id");
    if (!id.is_string() || id.get<std::string>().empty()) ctx.fail("field 'id' must be a non-empty string");
    p.id = id.get<std::string>();
    p.width = ctx.integer(j, "width");
    p.height = ctx.integer(j, "height");
    p.fx = ctx.number(j, "fx");
    p.fy = ctx.number(j, "fy");
    p.cx = ctx.number(j, "cx");
    p.cy = ctx.number(j, "cy");
    const auto rot = ctx.numbers(j, "rotation", 9);
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) p.rotation(r, c) = rot[3 * r + c];
    if (!is_rotation(p.rotation, 1e-4)) ctx.fail("field 'rotation' is not a proper orthonormal rotation");
    const auto t = ctx.numbers(j, "translation", 3);
    p.translation = Vec3(t[0], t[1], t[2]);
    if (j.contains("time")) {
      p.time = ctx.number(j, "time");
    } else if (require_time) {
      ctx.fail("missing field 'time'");
    } else {
      rec.has_time = false;
      p.time = 0.0;
    }
    try {
      validate(p);
    } catch (const DataError& e) {
      ctx.fail(e.what());
    }
    out.push_back(std::move(rec));
  }
  return out;
}

void write_cameras(const fs::path& path, std::span<const CameraPose> cameras) {
  auto out = open_out(path);
  for (const auto& c : cameras) out << camera_to_json(c) << '\n';
  if (!out) throw DataError("failed writing '" + path.string() + "'");
}

std::vector<CameraPose> read_cameras(const fs::path& path) {
  auto in = open_in(path);
  std::vector<CameraPose> out;
  for (auto& r : parse_poses(in, path.string(), true)) out.push_back(std::move(r.pose));
  std::set<std::string> ids;
  for (const auto& c : out)
    if (!ids.insert(c.id).second) throw DataError(path.string() + ": duplicate camera id '" + c.id + "'");
  return out;
}

std::vector<PoseRecord> read_poses(const fs::path& path) {
  auto in = open_in(path);
  auto out = parse_poses(in, path.string(), false);
  if (out.empty()) throw DataError(path.string() + ": no poses");
  return out;
}

std::string regions_to_json(const RegionSet& regions) {
  json j;
  j["centroids"] = json::array();
  for (const auto& c : regions.centroids) j["centroids"].push_back({c.x(), c.y()});
  j["assignments"] = json::object();
  for (const auto& [id, rs] : regions.assignments) j["assignments"][id] = json(std::vector<int>(rs.begin(), rs.end()));
  j["home"] = json::object();
  for (const auto& [id, r] : regions.home) j["home"][id] = r;
  j["boundary"] = json::object();
  for (const auto& [r, ids] : regions.boundary)
    j["boundary"][std::to_string(r)] = json(std::vector<std::string>(ids.begin(), ids.end()));
  const PartitionParams& p = regions.params;
  j["params"] = {{"n_regions", p.n_regions},
                 {"alpha", p.alpha.value_or(0.0)},
                 {"n_p", p.n_p},
                 {"time_scale", p.time_scale},
                 {"translation_scale", p.translation_scale},
                 {"kmeans_max_iters", p.kmeans_max_iters},
                 {"seed", p.seed},
                 {"min_cameras", p.min_cameras}};
  j["gamma_calibration"] = regions.gamma_calibration;
  return j.dump(2) + "\n";
}

RegionSet regions_from_json(const std::string& text, std::span<const CameraPose> cameras) {
  const std::string src = "regions.json";
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw DataError(src + ": invalid JSON: " + e.what());
  }
  auto need = [&](const char* key) -> const json& {
    if (!j.is_object() || !j.contains(key)) throw DataError(src + ": missing key '" + std::string(key) + "'");
    return j.at(key);
  };
  std::set<std::string> known;
  for (const auto& c : cameras) known.insert(c.id);
  auto check_id = [&](const std::string& id) {
    if (!known.count(id)) throw DataError(src + ": unknown camera id '" + id + "'");
  };

  RegionSet rs;
  try {
    for (const auto& c : need("centroids")) rs.centroids.emplace_back(c.at(0).get<double>(), c.at(1).get<double>());
    if (rs.centroids.empty()) throw DataError(src + ": region list is empty");
    const int n = rs.size();
    auto check_region = [&](int r) {
      if (r < 0 || r >= n) throw DataError(src + ": region index " + std::to_string(r) + " out of range");
    };
    for (const auto& [id, list] : need("assignments").items()) {
      check_id(id);
      auto& set = rs.assignments[id];
      for (const auto& r : list) {
        check_region(r.get<int>());
        set.insert(r.get<int>());
      }
      if (set.empty()) throw DataError(src + ": camera '" + id + "' has no region");
    }
    for (const auto& [id, r] : need("home").items()) {
      check_id(id);
      check_region(r.get<int>());
      if (!rs.assignments.count(id) || !rs.assignments[id].count(r.get<int>()))
        throw DataError(src + ": home region of '" + id + "' is not among its assignments");
      rs.home[id] = r.get<int>();
    }
    if (rs.home.size() != rs.assignments.size()) throw DataError(src + ": every assigned camera needs a home region");
    for (const auto& [key, ids] : need("boundary").items()) {
      const int r = std::stoi(key);
      check_region(r);
      auto& set = rs.boundary[r];
      for (const auto& id : ids) {
        check_id(id.get<std::string>());
        set.insert(id.get<std::string>());
      }
    }
    const json& p = need("params");
    rs.params.n_regions = p.at("n_regions").get<int>();
    rs.params.alpha = p.at("alpha").get<double>();
    rs.params.n_p = p.at("n_p").get<int>();
    rs.params.time_scale = p.at("time_scale").get<double>();
    rs.params.translation_scale = p.at("translation_scale").get<double>();
    rs.params.kmeans_max_iters = p.at("kmeans_max_iters").get<int>();
    rs.params.seed = p.at("seed").get<std::uint64_t>();
    rs.params.min_cameras = p.at("min_cameras").get<int>();
    if (rs.params.n_regions != n) throw DataError(src + ": n_regions does not match the centroid count");
    rs.gamma_calibration = need("gamma_calibration").get<double>();
  } catch (const json::exception& e) {
    throw DataError(src + ": malformed content: " + e.what());
  } catch (const std::logic_error& e) {
    throw DataError(src + ": malformed content: " + e.what());
  }
  return rs;
}

void write_regions(const fs::path& path, const RegionSet& regions) {
  auto out = open_out(path);
  out << regions_to_json(regions);
}

RegionSet read_regions(const fs::path& path, std::span<const CameraPose> cameras) {
  try {
    return regions_from_json(read_text(path), cameras);
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

void write_checkpoint(const fs::path& path, const VoxelGridField& field) {
  auto out = open_out(path, std::ios::binary);
  out.write(kCheckpointMagic, sizeof kCheckpointMagic);
  for (int a = 0; a < 3; ++a) put<double>(out, field.bbox().min[a]);
  for (int a = 0; a < 3; ++a) put<double>(out, field.bbox().max[a]);
  for (int a = 0; a < 3; ++a) put<std::uint32_t>(out, static_cast<std::uint32_t>(field.resolution()[a]));
  for (Eigen::Index i = 0; i < field.params().size(); ++i) put<float>(out, static_cast<float>(field.params()[i]));
  if (!out) throw DataError("failed writing '" + path.string() + "'");
}

VoxelGridField read_checkpoint(const fs::path& path) {
  auto in = open_in(path, std::ios::binary);
  char magic[sizeof kCheckpointMagic];
  if (!in.read(magic, sizeof magic) || std::memcmp(magic, kCheckpointMagic, sizeof magic) != 0)
    throw DataError("'" + path.string() + "' is not a field checkpoint");
  Aabb box;
  for (int a = 0; a < 3; ++a) box.min[a] = get<double>(in, path);
  for (int a = 0; a < 3; ++a) box.max[a] = get<double>(in, path);
  Eigen::Vector3i res;
  for (int a = 0; a < 3; ++a) {
    const auto n = get<std::uint32_t>(in, path);
    if (n < 2 || n > (1u << 16)) throw DataError("'" + path.string() + "' has an invalid resolution");
    res[a] = static_cast<int>(n);
  }
  if (!(box.extent().array() > 0.0).all()) throw DataError("'" + path.string() + "' has an empty bounding box");
  VoxelGridField field(box, res);
  for (Eigen::Index i = 0; i < field.params().size(); ++i) field.params()[i] = get<float>(in, path);
  if (in.peek() != std::char_traits<char>::eof()) throw DataError("'" + path.string() + "' has trailing data");
  return field;
}

void write_pfm(const fs::path& path, const Image& image) {
  auto out = open_out(path, std::ios::binary);
  out << "PF\n" << image.width << ' ' << image.height << "\n-1.0\n";
  for (int y = image.height - 1; y >= 0; --y)
    for (int x = 0; x < image.width; ++x)
      for (int c = 0; c < 3; ++c) put<float>(out, static_cast<float>(image.pixel(x, y)[c]));
  if (!out) throw DataError("failed writing '" + path.string() + "'");
}

Image read_pfm(const fs::path& path) {
  auto in = open_in(path, std::ios::binary);
  std::string magic;
  int w = 0, h = 0;
  double scale = 0.0;
  in >> magic >> w >> h >> scale;
  if (!in || magic != "PF" || w < 1 || h < 1) throw DataError("'" + path.string() + "' is not a color PFM");
  if (!(scale < 0.0)) throw DataError("'" + path.string() + "': only little-endian PFM is supported");
  in.get();
  Image image(w, h);
  for (int y = h - 1; y >= 0; --y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < 3; ++c) image.pixel(x, y)[c] = get<float>(in, path);
  return image;
}

void write_ppm(const fs::path& path, const Image& image) {
  auto out = open_out(path, std::ios::binary);
  out << "P6\n" << image.width << ' ' << image.height << "\n255\n";
  for (int y = 0; y < image.height; ++y)
    for (int x = 0; x < image.width; ++x)
      for (int c = 0; c < 3; ++c)
        out.put(static_cast<char>(static_cast<unsigned char>(std::lround(255.0 * srgb_encode(image.pixel(x, y)[c])))));
  if (!out) throw DataError("failed writing '" + path.string() + "'");
}

fs::path image_path(const fs::path& root, const DatasetManifest& manifest, const std::string& camera_id) {
  return root / manifest.images_dir / (camera_id + ".pfm");
}

void write_dataset(const fs::path& root, const DatasetManifest& manifest, std::span<const CameraPose> cameras,
                   std::span<const Image> images) {
  if (cameras.size() != images.size()) throw std::invalid_argument("write_dataset: one image per camera required");
  validate(manifest.frame);
  fs::create_directories(root / manifest.images_dir);
  json j{{"version", manifest.version},
         {"cameras", manifest.cameras_file},
         {"images", manifest.images_dir},
         {"scene", frame_to_json(manifest.frame)}};
  auto out = open_out(root / "manifest.json");
  out << j.dump(2) << '\n';
  write_cameras(root / manifest.cameras_file, cameras);
  for (std::size_t i = 0; i < cameras.size(); ++i) write_pfm(image_path(root, manifest, cameras[i].id), images[i]);
}

Dataset read_dataset(const fs::path& root, bool load_images) {
  const fs::path mpath = root / "manifest.json";
  json j;
  try {
    j = json::parse(read_text(mpath));
  } catch (const json::parse_error& e) {
    throw DataError(mpath.string() + ": invalid JSON: " + e.what());
  }
  Dataset ds;
  ds.root = root;
  try {
    ds.manifest.version = j.at("version").get<int>();
    ds.manifest.cameras_file = j.at("cameras").get<std::string>();
    ds.manifest.images_dir = j.at("images").get<std::string>();
    ds.manifest.frame = frame_from_json(j.at("scene"), mpath.string());
  } catch (const json::exception& e) {
    throw DataError(mpath.string() + ": " + e.what());
  }
  if (ds.manifest.version != 1)
    throw DataError(mpath.string() + ": unsupported version " + std::to_string(ds.manifest.version));
  ds.cameras = read_cameras(root / ds.manifest.cameras_file);
  if (ds.cameras.empty()) throw DataError(mpath.string() + ": dataset has no cameras");

  std::set<std::string> expected;
  for (const auto& c : ds.cameras) expected.insert(c.id + ".pfm");
  const fs::path dir = root / ds.manifest.images_dir;
  if (!fs::is_directory(dir)) throw DataError("missing image directory '" + dir.string() + "'");
  for (const auto& entry : fs::directory_iterator(dir)) {
    const auto name = entry.path().filename().string();
    if (entry.path().extension() == ".pfm" && !expected.count(name))
      throw DataError("image '" + name + "' has no camera");
  }
  for (const auto& c : ds.cameras) {
    const fs::path p = image_path(root, ds.manifest, c.id);
    if (!fs::is_regular_file(p)) throw DataError("camera '" + c.id + "' has no image '" + p.string() + "'");
    if (load_images) {
      Image im = read_pfm(p);
      if (im.width != c.width || im.height != c.height)
        throw DataError("image '" + p.string() + "' does not match the size of camera '" + c.id + "'");
      ds.images.push_back(std::move(im));
    }
  }
  return ds;
}

Config Config::parse(std::istream& in, const std::string& source) {
  Config cfg;
  cfg.source_ = source;
  std::string text;
  int line = 0;
  while (std::getline(in, text)) {
    ++line;
    const auto hash = text.find('#');
    if (hash != std::string::npos) text.resize(hash);
    text = trim(text);
    if (text.empty()) continue;
    const auto eq = text.find('=');
    if (eq == std::string::npos)
      throw DataError(source + ":" + std::to_string(line) + ": expected 'key = value'");
    const std::string key = trim(text.substr(0, eq));
    const std::string value = trim(text.substr(eq + 1));
    if (key.empty()) throw DataError(source + ":" + std::to_string(line) + ": empty key");
    if (cfg.entries_.count(key))
      throw DataError(source + ":" + std::to_string(line) + ": duplicate key '" + key + "'");
    cfg.entries_[key] = Entry{value, line, false};
  }
  return cfg;
}

Config Config::load(const fs::path& path) {
  auto in = open_in(path);
  return parse(in, path.string());
}

const Config::Entry* Config::take(const std::string& key) {
  auto it = entries_.find(key);
  if (it == entries_.end()) return nullptr;
  it->second.used = true;
  return &it->second;
}

void Config::fail(const std::string& key, const Entry& e, const std::string& what) const {
  throw DataError(source_ + ":" + std::to_string(e.line) + ": key '" + key + "' " + what);
}

std::string Config::get_string(const std::string& key, const std::string& fallback) {
  const Entry* e = take(key);
  return e ? e->value : fallback;
}

double Config::get_double(const std::string& key, double fallback) {
  const Entry* e = take(key);
  if (!e) return fallback;
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(e->value, &used);
  } catch (const std::exception&) {
    fail(key, *e, "expects a number");
  }
  if (used != e->value.size() || !std::isfinite(v)) fail(key, *e, "expects a number");
  return v;
}

int Config::get_int(const std::string& key, int fallback) {
  const Entry* e = take(key);
  if (!e) return fallback;
  std::size_t used = 0;
  int v = 0;
  try {
    v = std::stoi(e->value, &used);
  } catch (const std::exception&) {
    fail(key, *e, "expects an integer");
  }
  if (used != e->value.size()) fail(key, *e, "expects an integer");
  return v;
}

std::uint64_t Config::get_seed(const std::string& key, std::uint64_t fallback) {
  const Entry* e = take(key);
  std::uint64_t v = fallback;
  if (e) {
    std::size_t used = 0;
    try {
      v = std::stoull(e->value, &used);
    } catch (const std::exception&) {
      fail(key, *e, "expects a non-negative integer");
    }
    if (used != e->value.size() || e->value.front() == '-') fail(key, *e, "expects a non-negative integer");
  }
  if (auto o = seed_override()) return *o;
  return v;
}

bool Config::get_bool(const std::string& key, bool fallback) {
  const Entry* e = take(key);
  if (!e) return fallback;
  if (e->value == "true" || e->value == "1") return true;
  if (e->value == "false" || e->value == "0") return false;
  fail(key, *e, "expects true or false");
}

std::vector<double> Config::get_doubles(const std::string& key, const std::vector<double>& fallback) {
  const Entry* e = take(key);
  if (!e) return fallback;
  std::istringstream ss(e->value);
  std::vector<double> out;
  std::string tok;
  while (ss >> tok) {
    std::size_t used = 0;
    try {
      out.push_back(std::stod(tok, &used));
    } catch (const std::exception&) {
      fail(key, *e, "expects numbers");
    }
    if (used != tok.size()) fail(key, *e, "expects numbers");
  }
  return out;
}

std::vector<Vec3> Config::get_colors(const std::string& key, const std::vector<Vec3>& fallback) {
  const Entry* e = take(key);
  if (!e) return fallback;
  std::vector<Vec3> out;
  std::istringstream ss(e->value);
  std::string part;
  while (std::getline(ss, part, ';')) {
    std::istringstream ps(part);
    Vec3 c;
    std::string extra;
    if (!(ps >> c.x() >> c.y() >> c.z()) || (ps >> extra)) fail(key, *e, "expects 'r g b; r g b; ...'");
    if ((c.array() < 0.0).any() || (c.array() > 1.0).any()) fail(key, *e, "colors must lie in [0, 1]");
    out.push_back(c);
  }
  if (out.empty()) fail(key, *e, "expects at least one color");
  return out;
}

void Config::finish() const {
  for (const auto& [key, e] : entries_)
    if (!e.used) fail(key, e, "is unknown");
}

std::optional<std::uint64_t> seed_override() {
  const char* env = std::getenv("AERO_SEED");
  if (!env || !*env) return std::nullopt;
  const std::string s(env);
  std::size_t used = 0;
  std::uint64_t v = 0;
  try {
    v = std::stoull(s, &used);
  } catch (const std::exception&) {
    throw DataError("AERO_SEED must be a non-negative integer");
  }
  if (used != s.size() || s.front() == '-') throw DataError("AERO_SEED must be a non-negative integer");
  return v;
}

}  // namespace aerial

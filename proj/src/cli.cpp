#include "aerial/cli.hpp"

#include <algorithm>
#include <ostream>
#include <memory>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "aerial/dispatch.hpp"
#include "aerial/metrics.hpp"
#include "aerial/render.hpp"
#include "aerial/train.hpp"

namespace aerial {
namespace {

using nlohmann::json;

std::string region_file(int r) { return "region_" + std::to_string(r) + ".anf"; }

fs::path default_regions(const fs::path& dataset, const std::string& flag) {
  return flag.empty() ? dataset / "regions.json" : fs::path(flag);
}

fs::path default_fields(const fs::path& dataset, const std::string& flag) {
  return flag.empty() ? dataset / "fields" : fs::path(flag);
}

std::vector<std::unique_ptr<VoxelGridField>> load_fields(const fs::path& dir, int n_regions) {
  std::vector<std::unique_ptr<VoxelGridField>> fields;
  for (int r = 0; r < n_regions; ++r)
    fields.push_back(std::make_unique<VoxelGridField>(read_checkpoint(dir / region_file(r))));
  return fields;
}

std::vector<const RadianceField*> field_pointers(const std::vector<std::unique_ptr<VoxelGridField>>& fields) {
  std::vector<const RadianceField*> out;
  for (const auto& f : fields) out.push_back(f.get());
  return out;
}

json decision_json(const std::string& id, const DispatchDecision& d) {
  json scores = json::object();
  for (const auto& [r, s] : d.region_scores) scores[std::to_string(r)] = s;
  return json{{"id", id},
              {"region_scores", scores},
              {"selected", d.selected},
              {"used_fallback", d.used_fallback},
              {"time_ignored", d.time_ignored}};
}

/// Options shared by the rendering subcommands.
struct RenderFlags {
  std::string regions;
  std::string fields;
  int n_coarse = 64;
  int n_fine = 128;
  std::uint64_t seed = 0;
  unsigned threads = 0;
  int n_s = 5;
  double gamma = 0.0;  ///< <= 0 uses the calibrated value.

  void add(CLI::App* app) {
    app->add_option("--regions", regions, "regions.json (default <dataset>/regions.json)");
    app->add_option("--fields", fields, "checkpoint directory (default <dataset>/fields)");
    app->add_option("--n-coarse", n_coarse, "coarse samples per ray")->check(CLI::Range(2, 1 << 16));
    app->add_option("--n-fine", n_fine, "fine samples per ray")->check(CLI::Range(0, 1 << 16));
    app->add_option("--seed", seed, "sampling seed");
    app->add_option("--threads", threads, "worker threads (0 = all cores)");
    app->add_option("--ns", n_s, "cameras averaged per region score")->check(CLI::PositiveNumber);
    app->add_option("--gamma", gamma, "selection threshold (default: calibrated)");
  }

  RenderParams render_params() const {
    RenderParams p;
    p.sampling = SamplingParams{n_coarse, n_fine, false, seed_override().value_or(seed)};
    p.threads = threads;
    return p;
  }

  DispatchParams dispatch_params(const RegionSet& regions, bool has_time) const {
    DispatchParams p;
    p.n_s = n_s;
    p.gamma = gamma > 0.0 ? gamma : regions.gamma_calibration;
    p.use_time = has_time;
    return p;
  }
};

struct Session {
  std::ostream& out;
  std::ostream& err;
};

int cmd_synth(Session& s, const std::string& scene_cfg, const std::string& kind, const std::string& out_dir,
              unsigned threads) {
  Config cfg = Config::load(scene_cfg);
  SynthSettings settings = load_synth_settings(cfg);
  if (!kind.empty()) settings.trajectory.kind = parse_trajectory_kind(kind);
  const GeneratedDataset ds = generate_dataset(settings, threads);
  write_dataset(out_dir, ds.manifest, ds.cameras, ds.images);
  s.out << json{{"dataset", out_dir},
                {"cameras", ds.cameras.size()},
                {"buildings", ds.scene.buildings.size()},
                {"building_height", ds.manifest.frame.building_height},
                {"foreground_radius", ds.manifest.frame.foreground_radius}}
               .dump()
        << '\n';
  return 0;
}

int cmd_partition(Session& s, const std::string& dataset, PartitionParams params, std::optional<double> alpha,
                  int n_s, const std::string& out_path) {
  const Dataset ds = read_dataset(dataset, false);
  params.alpha = alpha;
  if (auto o = seed_override()) params.seed = *o;
  RegionSet regions = build_regions(ds.cameras, params, ds.manifest.frame);
  regions.gamma_calibration = calibrate_gamma(regions, ds.cameras, n_s);
  const fs::path path = out_path.empty() ? fs::path(dataset) / "regions.json" : fs::path(out_path);
  write_regions(path, regions);
  json sizes = json::array();
  for (int r = 0; r < regions.size(); ++r) sizes.push_back(region_members(regions, ds.cameras, r).size());
  s.out << json{{"regions", path.string()},
                {"members", sizes},
                {"alpha", *regions.params.alpha},
                {"gamma_calibration", regions.gamma_calibration}}
               .dump()
        << '\n';
  return 0;
}

struct TrainFlags {
  std::string dataset;
  std::string regions;
  std::string region = "all";
  std::string out;
  int grid = 8;
  int holdout_every = 0;
  TrainConfig config;
  LossParams loss;
  int n_coarse = 64;
  int n_fine = 128;
};

int cmd_train(Session& s, TrainFlags f) {
  const Dataset ds = read_dataset(f.dataset);
  const RegionSet regions = read_regions(default_regions(f.dataset, f.regions), ds.cameras);
  std::vector<int> targets;
  if (f.region == "all") {
    for (int r = 0; r < regions.size(); ++r) targets.push_back(r);
  } else {
    std::size_t used = 0;
    int r = -1;
    try {
      r = std::stoi(f.region, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != f.region.size() || r < 0 || r >= regions.size())
      throw DataError("--region must be 'all' or an index below " + std::to_string(regions.size()));
    targets.push_back(r);
  }
  if (auto o = seed_override()) f.config.seed = *o;
  const fs::path out_dir = default_fields(f.dataset, f.out);
  const SamplingParams sampling{f.n_coarse, f.n_fine, false, derive_seed(f.config.seed, 7)};

  for (int r : targets) {
    std::vector<CameraPose> cams;
    std::vector<Image> imgs;
    for (std::size_t i : region_members(regions, ds.cameras, r)) {
      if (f.holdout_every > 0 && i % f.holdout_every == static_cast<std::size_t>(f.holdout_every - 1)) continue;
      cams.push_back(ds.cameras[i]);
      imgs.push_back(ds.images[i]);
    }
    if (cams.empty()) throw DataError("region " + std::to_string(r) + " has no training cameras");
    const Aabb box = region_bounds(cams, ds.manifest.frame);
    TrainConfig cfg = f.config;
    cfg.seed = derive_seed(f.config.seed, static_cast<std::uint64_t>(r));
    LossParams loss = f.loss;
    loss.seed = cfg.seed;
    const TrainResult res = train_region(cams, imgs, ds.manifest.frame,
                                         VoxelGridField(box, Eigen::Vector3i::Constant(f.grid)), cfg, loss, sampling);
    const fs::path path = out_dir / region_file(r);
    write_checkpoint(path, res.field);
    s.out << json{{"region", r},
                  {"cameras", cams.size()},
                  {"checkpoint", path.string()},
                  {"final_loss", res.loss_curve.empty() ? 0.0 : res.loss_curve.back()}}
                 .dump()
          << '\n';
  }
  return 0;
}

int cmd_assign(Session& s, const std::string& dataset, const std::string& pose_file, const RenderFlags& f) {
  const Dataset ds = read_dataset(dataset, false);
  const RegionSet regions = read_regions(default_regions(dataset, f.regions), ds.cameras);
  for (const auto& rec : read_poses(pose_file)) {
    const DispatchDecision d = dispatch(rec.pose, regions, ds.cameras, f.dispatch_params(regions, rec.has_time));
    s.out << decision_json(rec.pose.id, d).dump() << '\n';
  }
  return 0;
}

int cmd_render(Session& s, const std::string& dataset, const std::string& pose_file, const std::string& mode,
               const std::string& out_path, const RenderFlags& f) {
  const Dataset ds = read_dataset(dataset, false);
  const RegionSet regions = read_regions(default_regions(dataset, f.regions), ds.cameras);
  const auto fields = load_fields(default_fields(dataset, f.fields), regions.size());
  const auto ptrs = field_pointers(fields);
  const auto poses = read_poses(pose_file);
  const fs::path out(out_path);
  if (poses.size() > 1) fs::create_directories(out);

  for (const auto& rec : poses) {
    RenderResult res;
    json info{{"id", rec.pose.id}, {"mode", mode}};
    if (mode == "dispatch") {
      const DispatchDecision d = dispatch(rec.pose, regions, ds.cameras, f.dispatch_params(regions, rec.has_time));
      res = render_image(rec.pose, d, ptrs, ds.manifest.frame, f.render_params());
      info["selected"] = d.selected;
    } else {
      res = render_fusion_baseline(rec.pose, ptrs, ds.manifest.frame, f.render_params());
    }
    const fs::path target = poses.size() > 1 ? out / (rec.pose.id + ".pfm") : out;
    write_pfm(target, res.image);
    fs::path preview = target;
    write_ppm(preview.replace_extension(".ppm"), res.image);
    info["image"] = target.string();
    info["wall_seconds"] = res.timing.wall_seconds;
    info["field_queries"] = res.timing.field_queries;
    s.out << info.dump() << '\n';
  }
  return 0;
}

int cmd_eval(Session& s, const std::string& pred_dir, const std::string& truth_dir) {
  std::vector<fs::path> preds;
  if (!fs::is_directory(pred_dir)) throw DataError("'" + pred_dir + "' is not a directory");
  for (const auto& e : fs::directory_iterator(pred_dir))
    if (e.path().extension() == ".pfm") preds.push_back(e.path());
  std::sort(preds.begin(), preds.end());
  if (preds.empty()) throw DataError("no .pfm images in '" + pred_dir + "'");
  double sum_psnr = 0.0, sum_ssim = 0.0;
  for (const auto& p : preds) {
    fs::path t = fs::path(truth_dir) / p.filename();
    if (!fs::exists(t) && fs::exists(fs::path(truth_dir) / "images" / p.filename()))
      t = fs::path(truth_dir) / "images" / p.filename();
    if (!fs::exists(t)) throw DataError("no ground truth for '" + p.filename().string() + "'");
    const Image a = read_pfm(p);
    const Image b = read_pfm(t);
    if (a.width != b.width || a.height != b.height)
      throw DataError("size mismatch for '" + p.filename().string() + "'");
    const double q = psnr(a, b);
    const double m = ssim(a, b);
    sum_psnr += q;
    sum_ssim += m;
    s.out << json{{"image", p.filename().string()}, {"psnr", q}, {"ssim", m}}.dump() << '\n';
  }
  const double n = static_cast<double>(preds.size());
  s.out << json{{"count", preds.size()}, {"mean_psnr", sum_psnr / n}, {"mean_ssim", sum_ssim / n}}.dump() << '\n';
  return 0;
}

int cmd_bench(Session& s, const std::string& dataset, const std::string& pose_file, const RenderFlags& f) {
  const Dataset ds = read_dataset(dataset, false);
  const RegionSet regions = read_regions(default_regions(dataset, f.regions), ds.cameras);
  const auto fields = load_fields(default_fields(dataset, f.fields), regions.size());
  const auto ptrs = field_pointers(fields);
  const auto poses = read_poses(pose_file);
  RenderTiming dispatch_t, fusion_t;
  std::size_t single = 0;
  for (const auto& rec : poses) {
    const DispatchDecision d = dispatch(rec.pose, regions, ds.cameras, f.dispatch_params(regions, rec.has_time));
    if (d.selected.size() == 1) ++single;
    const RenderResult a = render_image(rec.pose, d, ptrs, ds.manifest.frame, f.render_params());
    const RenderResult b = render_fusion_baseline(rec.pose, ptrs, ds.manifest.frame, f.render_params());
    dispatch_t.wall_seconds += a.timing.wall_seconds;
    dispatch_t.field_queries += a.timing.field_queries;
    fusion_t.wall_seconds += b.timing.wall_seconds;
    fusion_t.field_queries += b.timing.field_queries;
  }
  auto timing = [](const RenderTiming& t) {
    return json{{"wall_seconds", t.wall_seconds}, {"field_queries", t.field_queries}};
  };
  s.out << json{{"poses", poses.size()},
                {"regions", regions.size()},
                {"single_region_poses", single},
                {"dispatch", timing(dispatch_t)},
                {"fusion", timing(fusion_t)},
                {"query_ratio", static_cast<double>(fusion_t.field_queries) / dispatch_t.field_queries},
                {"wall_time_ratio", fusion_t.wall_seconds / dispatch_t.wall_seconds}}
               .dump()
        << '\n';
  return 0;
}

int cmd_sample(Session& s, const std::string& dataset, const std::string& camera_id, const std::string& pixel,
               const std::string& field_path, SamplingParams sp) {
  const Dataset ds = read_dataset(dataset, false);
  const auto it = std::find_if(ds.cameras.begin(), ds.cameras.end(),
                               [&](const CameraPose& c) { return c.id == camera_id; });
  if (it == ds.cameras.end()) throw DataError("unknown camera id '" + camera_id + "'");
  double px = 0.0, py = 0.0;
  char comma = 0;
  std::istringstream ps(pixel);
  std::string rest;
  if (!(ps >> px >> comma >> py) || comma != ',' || (ps >> rest))
    throw DataError("--pixel expects 'x,y'");
  const Ray ray = pixel_ray(*it, px + 0.5, py + 0.5);
  if (auto o = seed_override()) sp.seed = *o;
  Rng rng(derive_seed(sp.seed, 0));
  SampleSpec spec = plan_coarse(ray, ds.manifest.frame, sp, rng);
  if (!field_path.empty() && sp.n_fine > 0) {
    const VoxelGridField field = read_checkpoint(field_path);
    std::vector<FieldSample> coarse;
    for (double t : spec.coarse_t) coarse.push_back(field.query(ray.at(t), ray.direction));
    add_fine(spec, integrate_ray(spec.deltas, coarse).weights, sp, rng);
  }
  s.out << json{{"camera", camera_id},
                {"pixel", {px, py}},
                {"mode", to_string(spec.mode)},
                {"near", spec.near},
                {"far", spec.far},
                {"foreground_radius", spec.foreground_radius},
                {"coarse_t", spec.coarse_t},
                {"coarse_edges", spec.coarse_edges},
                {"fine_t", spec.fine_t},
                {"t", spec.t},
                {"deltas", spec.deltas}}
               .dump()
        << '\n';
  return 0;
}

}  // namespace

SynthSettings load_synth_settings(Config& c) {
  SynthSettings s;
  SceneSpec& sc = s.scene;
  sc.earth_radius = c.get_double("earth_radius", sc.earth_radius);
  sc.n_buildings = c.get_int("n_buildings", sc.n_buildings);
  sc.height_min = c.get_double("height_min", sc.height_min);
  sc.height_max = c.get_double("height_max", sc.height_max);
  sc.footprint_min = c.get_double("footprint_min", sc.footprint_min);
  sc.footprint_max = c.get_double("footprint_max", sc.footprint_max);
  sc.palette = c.get_colors("palette", sc.palette);
  if (c.has("ground_albedo")) sc.ground_albedo = c.get_colors("ground_albedo", {}).at(0);
  sc.ground_thickness = c.get_double("ground_thickness", sc.ground_thickness);
  sc.density = c.get_double("density", sc.density);
  sc.n_clusters = c.get_int("n_clusters", sc.n_clusters);
  for (double v : c.get_doubles("cluster_sizes", {})) sc.cluster_sizes.push_back(static_cast<int>(v));
  sc.patch_radius = c.get_double("patch_radius", sc.patch_radius);
  sc.cluster_separation = c.get_double("cluster_separation", sc.cluster_separation);
  sc.cluster_radius = c.get_double("cluster_radius", sc.cluster_radius);

  TrajectorySpec& t = s.trajectory;
  t.kind = parse_trajectory_kind(c.get_string("trajectory", to_string(t.kind)));
  t.n_cameras = c.get_int("n_cameras", t.n_cameras);
  t.image_width = c.get_int("image_width", t.image_width);
  t.image_height = c.get_int("image_height", t.image_height);
  t.fov_deg = c.get_double("fov_deg", t.fov_deg);
  t.altitude = c.get_double("altitude", t.altitude);
  t.grid_extent = c.get_double("grid_extent", t.grid_extent);
  t.pitch_deg = c.get_double("pitch_deg", t.pitch_deg);
  if (c.has("landmark")) {
    const auto v = c.get_doubles("landmark", {});
    if (v.size() != 2) throw DataError("config key 'landmark' expects 2 numbers");
    t.landmark = Vec2(v[0], v[1]);
  }
  t.orbit_rings = c.get_int("orbit_rings", t.orbit_rings);
  t.orbit_radius = c.get_double("orbit_radius", t.orbit_radius);
  t.orbit_radius_step = c.get_double("orbit_radius_step", t.orbit_radius_step);
  t.orbit_altitude_step = c.get_double("orbit_altitude_step", t.orbit_altitude_step);
  t.building_orbit_radius = c.get_double("building_orbit_radius", t.building_orbit_radius);
  t.building_clearance = c.get_double("building_clearance", t.building_clearance);
  t.dwell = c.get_double("dwell", t.dwell);

  s.sampling.n_coarse = c.get_int("n_coarse", s.sampling.n_coarse);
  s.sampling.n_fine = c.get_int("n_fine", s.sampling.n_fine);
  s.foreground_scale = c.get_double("foreground_scale", s.foreground_scale);
  const std::uint64_t seed = c.get_seed("seed", 1);
  sc.seed = derive_seed(seed, 0);
  t.seed = derive_seed(seed, 1);
  s.sampling.seed = derive_seed(seed, 2);
  c.finish();
  if (s.sampling.n_coarse < 2 || s.sampling.n_fine < 0) throw DataError("config: invalid sample counts");
  if (!(s.foreground_scale > 0.0)) throw DataError("config: foreground_scale must be positive");
  return s;
}

GeneratedDataset generate_dataset(const SynthSettings& settings, unsigned threads) {
  SyntheticScene scene = build_scene(settings.scene);
  std::vector<CameraPose> cameras = generate_trajectory(settings.trajectory, scene);
  scene.frame.foreground_radius = settings.foreground_scale * std::max(camera_cloud_radius(cameras), 1.0);
  RenderParams rp;
  rp.sampling = settings.sampling;
  rp.threads = threads;
  std::vector<Image> images = render_ground_truth(cameras, scene, rp);
  DatasetManifest manifest;
  manifest.frame = scene.frame;
  return GeneratedDataset{std::move(scene), manifest, std::move(cameras), std::move(images)};
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Region-partitioned radiance fields for aerial scenes", "aerial"};
  app.require_subcommand(1);

  std::string scene_cfg, kind, out_dir;
  unsigned synth_threads = 0;
  auto* synth = app.add_subcommand("synth", "generate a synthetic dataset");
  synth->add_option("--scene", scene_cfg, "scene config (key = value)")->required();
  synth->add_option("--trajectory", kind, "uniform_grid | orbit_multi_altitude | uneven_per_building");
  synth->add_option("--out", out_dir, "output dataset directory")->required();
  synth->add_option("--threads", synth_threads, "worker threads (0 = all cores)");

  std::string dataset;
  PartitionParams pparams;
  std::optional<double> alpha;
  int part_ns = 5;
  std::string part_out;
  auto* partition = app.add_subcommand("partition", "split cameras into regions");
  partition->add_option("--dataset", dataset)->required();
  partition->add_option("--regions", pparams.n_regions, "number of regions")->required()->check(CLI::PositiveNumber);
  partition->add_option("--alpha", alpha, "boundary distance threshold, meters");
  partition->add_option("--np", pparams.n_p, "extra cameras per region")->check(CLI::NonNegativeNumber);
  partition->add_option("--seed", pparams.seed, "k-means seed");
  partition->add_option("--time-scale", pparams.time_scale);
  partition->add_option("--translation-scale", pparams.translation_scale);
  partition->add_option("--min-cameras", pparams.min_cameras)->check(CLI::NonNegativeNumber);
  partition->add_option("--ns", part_ns, "cameras averaged for gamma calibration")->check(CLI::PositiveNumber);
  partition->add_option("--out", part_out, "output path (default <dataset>/regions.json)");

  TrainFlags tf;
  auto* train = app.add_subcommand("train", "fit one voxel field per region");
  train->add_option("--dataset", tf.dataset)->required();
  train->add_option("--regions", tf.regions, "regions.json (default <dataset>/regions.json)");
  train->add_option("--region", tf.region, "region index or 'all'");
  train->add_option("--iters", tf.config.iterations, "SGD iterations")->check(CLI::NonNegativeNumber);
  train->add_option("--batch", tf.config.batch_rays, "rays per iteration")->check(CLI::PositiveNumber);
  train->add_option("--grid", tf.grid, "lattice vertices per axis")->check(CLI::Range(2, 512));
  train->add_option("--lr-start", tf.config.lr_start);
  train->add_option("--lr-end", tf.config.lr_end);
  train->add_option("--momentum", tf.config.momentum);
  train->add_option("--lambda-mse", tf.loss.lambda_mse);
  train->add_option("--lambda-s3im", tf.loss.lambda_s3im);
  train->add_option("--s3im-patches", tf.loss.s3im_patches)->check(CLI::PositiveNumber);
  train->add_option("--n-coarse", tf.n_coarse)->check(CLI::Range(2, 1 << 16));
  train->add_option("--n-fine", tf.n_fine)->check(CLI::Range(0, 1 << 16));
  train->add_option("--holdout-every", tf.holdout_every, "skip every k-th camera (0 = none)")
      ->check(CLI::NonNegativeNumber);
  train->add_option("--seed", tf.config.seed);
  train->add_option("--threads", tf.config.threads);
  train->add_option("--out", tf.out, "checkpoint directory (default <dataset>/fields)");

  std::string pose_file;
  RenderFlags assign_flags;
  auto* assign = app.add_subcommand("assign", "score regions for query poses");
  assign->add_option("--dataset", dataset)->required();
  assign->add_option("--pose", pose_file, "JSON-lines poses")->required();
  assign_flags.add(assign);

  std::string mode = "dispatch", render_out;
  RenderFlags render_flags;
  auto* render = app.add_subcommand("render", "render query poses");
  render->add_option("--dataset", dataset)->required();
  render->add_option("--pose", pose_file, "JSON-lines poses")->required();
  render->add_option("--mode", mode)->check(CLI::IsMember({"dispatch", "fusion"}));
  render->add_option("--out", render_out, "output .pfm (a directory for several poses)")->required();
  render_flags.add(render);

  std::string pred_dir, truth_dir;
  auto* eval = app.add_subcommand("eval", "PSNR and SSIM between image directories");
  eval->add_option("--pred", pred_dir)->required();
  eval->add_option("--truth", truth_dir)->required();

  RenderFlags bench_flags;
  auto* bench = app.add_subcommand("bench", "time dispatch against fusion rendering");
  bench->add_option("--dataset", dataset)->required();
  bench->add_option("--poses", pose_file, "JSON-lines poses")->required();
  bench_flags.add(bench);

  std::string camera_id, pixel, field_path;
  SamplingParams sample_params;
  auto* sample = app.add_subcommand("sample", "dump the sampling plan of one pixel ray");
  sample->add_option("--dataset", dataset)->required();
  sample->add_option("--camera", camera_id)->required();
  sample->add_option("--pixel", pixel, "x,y pixel indices")->required();
  sample->add_option("--field", field_path, "checkpoint driving the fine pass");
  sample->add_option("--n-coarse", sample_params.n_coarse)->check(CLI::Range(2, 1 << 16));
  sample->add_option("--n-fine", sample_params.n_fine)->check(CLI::Range(0, 1 << 16));
  sample->add_flag("--jitter", sample_params.jitter);
  sample->add_option("--seed", sample_params.seed);

  if (!args.empty() && !args[0].empty() && args[0][0] != '-' && app.get_subcommand_no_throw(args[0]) == nullptr) {
    err << "error: unknown subcommand '" << args[0] << "'\n\n" << app.help();
    return 1;
  }
  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return 1;
  }

  Session s{out, err};
  try {
    if (*synth) return cmd_synth(s, scene_cfg, kind, out_dir, synth_threads);
    if (*partition) return cmd_partition(s, dataset, pparams, alpha, part_ns, part_out);
    if (*train) return cmd_train(s, tf);
    if (*assign) return cmd_assign(s, dataset, pose_file, assign_flags);
    if (*render) return cmd_render(s, dataset, pose_file, mode, render_out, render_flags);
    if (*eval) return cmd_eval(s, pred_dir, truth_dir);
    if (*bench) return cmd_bench(s, dataset, pose_file, bench_flags);
    if (*sample) return cmd_sample(s, dataset, camera_id, pixel, field_path, sample_params);
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    err << "data error: " << e.what() << '\n';
    return 2;
  }
  err << app.help();
  return 1;
}

}  // namespace aerial

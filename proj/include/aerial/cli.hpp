#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "aerial/io.hpp"
#include "aerial/synth.hpp"

namespace aerial {

/// Everything `synth` reads from a scene config.
struct SynthSettings {
  SceneSpec scene;
  TrajectorySpec trajectory;
  SamplingParams sampling{64, 128, false, 0};
  /// Foreground radius R1 as a multiple of the camera-cloud radius.
  double foreground_scale = 2.0;
};

/// Consumes the known keys and rejects the rest. `seed` seeds the scene, the
/// trajectory and the ground-truth sampler.
SynthSettings load_synth_settings(Config& config);

struct GeneratedDataset {
  SyntheticScene scene;
  DatasetManifest manifest;
  std::vector<CameraPose> cameras;
  std::vector<Image> images;
};

GeneratedDataset generate_dataset(const SynthSettings& settings, unsigned threads = 0);

/// Runs one subcommand; `args` excludes the program name. Returns 0 on
/// success, 1 for usage errors, 2 for data errors, 3 for numerical failures.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace aerial

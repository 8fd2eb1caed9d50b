#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "lw/body_model.hpp"

namespace lw {

struct TaskConfig {
  std::filesystem::path model_path;
  std::filesystem::path src_params_path;
  std::filesystem::path ref_params_path;
  std::filesystem::path src_image_path;
  std::filesystem::path ref_image_path;
  std::filesystem::path out_dir;

  int width = 256;
  int height = 256;

  // view task
  double yaw_deg = 0.0;
  double pitch_deg = 0.0;
  double roll_deg = 0.0;
  Vec3 translate = Vec3::Zero();
  bool sweep = false;

  bool dump_flow = false;
  bool dump_maps = false;
  uint64_t seed = 0;
  int threads = 1;

  // eval task
  std::filesystem::path pred_path;
  std::filesystem::path gt_path;
  std::vector<std::string> metrics = {"ssim"};
  std::string extractor = "toy";

  void validate_resolution() const;
};

// Rotation from Euler angles in degrees, composed as yaw about y, then
// pitch about x, then roll about z (row-vector convention downstream).
Mat3 rotation_from_euler(double yaw_deg, double pitch_deg, double roll_deg);

// Full motion-imitation pipeline; writes C_s/C_t dumps and visualizations,
// T.bin, I_ft/I_bg, the raw warp and the background-composited preview.
void run_imitate(const TaskConfig& cfg);

// Novel-view pipeline; in sweep mode emits one artifact set per 30-degree
// yaw step from 30 to 330 under view_###/ subdirectories.
void run_view(const TaskConfig& cfg);

// Appearance transfer: T1/T2 dumps, head silhouette, and an image-level
// LWB preview (head from source one, body from source two).
void run_swap(const TaskConfig& cfg);

// Source render only: C_s dumps plus silhouette, and the decomposition
// when a source image is supplied.
void run_render(const TaskConfig& cfg);

// Metric record for a prediction / ground-truth pair.
std::map<std::string, double> run_eval(const TaskConfig& cfg);

// Deterministic synthetic scene files: model.json, src_params.json,
// ref_params.json, source.png, reference.png.
void gen_synthetic(uint64_t seed, const std::filesystem::path& out_dir,
                   int width, int height, int threads);

}  // namespace lw

#include "lw/pipeline.hpp"

#include <cmath>
#include <numbers>

#include "lw/flow.hpp"
#include "lw/io.hpp"
#include "lw/losses.hpp"
#include "lw/synthetic.hpp"
#include "lw/warp.hpp"

namespace lw {

namespace fs = std::filesystem;

void TaskConfig::validate_resolution() const {
  require(width >= 8 && height >= 8, "resolution must be at least 8x8");
}

Mat3 rotation_from_euler(double yaw_deg, double pitch_deg, double roll_deg) {
  const double d2r = std::numbers::pi / 180.0;
  const double y = yaw_deg * d2r, p = pitch_deg * d2r, r = roll_deg * d2r;
  Mat3 ry, rx, rz;
  ry << std::cos(y), 0, std::sin(y), 0, 1, 0, -std::sin(y), 0, std::cos(y);
  rx << 1, 0, 0, 0, std::cos(p), -std::sin(p), 0, std::sin(p), std::cos(p);
  rz << std::cos(r), -std::sin(r), 0, std::sin(r), std::cos(r), 0, 0, 0, 1;
  return rz * rx * ry;
}

namespace {

FeatureMap mask_to_map(const Silhouette& mask) {
  FeatureMap m(1, mask.height, mask.width);
  for (size_t i = 0; i < mask.mask.size(); ++i) m.data[i] = mask.mask[i] ? 1.0f : 0.0f;
  return m;
}

FeatureMap load_image_checked(const fs::path& path, int width, int height) {
  require(!path.empty(), "missing required image path");
  require(fs::exists(path), "image not found: " + path.string());
  FeatureMap img = read_png(path, -1.0f, 1.0f);
  require(img.width == width && img.height == height,
          path.string() + " is " + std::to_string(img.width) + "x" +
              std::to_string(img.height) + ", expected " + std::to_string(width) +
              "x" + std::to_string(height));
  return img;
}

BodyModel load_model_checked(const fs::path& path) {
  require(!path.empty(), "missing --model");
  require(fs::exists(path), "model not found: " + path.string());
  return load_body_model(path);
}

BodyParams load_params_checked(const fs::path& path, const BodyModel& model) {
  require(!path.empty(), "missing params path");
  require(fs::exists(path), "params not found: " + path.string());
  BodyParams p = load_body_params(path);
  p.validate(model);
  return p;
}

// Shared artifact writer for the imitation-shaped pipelines (imitate, view).
void write_flow_artifacts(const TaskConfig& cfg, const fs::path& dir,
                          const FlowBundle& bundle, const FeatureMap& source_image) {
  fs::create_directories(dir);

  DecomposedSource dec = decompose(source_image, bundle.source_map);
  FeatureMap warped = bilinear_sample(dec.foreground, bundle.flow, cfg.threads);
  AttentionPair coverage(mask_to_map(silhouette(bundle.target_map)), warped);
  FeatureMap composited = compose_output(coverage, dec.background);

  write_cmap(bundle.source_map, dir / "C_s.bin");
  write_cmap(bundle.target_map, dir / "C_t.bin");
  write_png(encode_visual(bundle.source_map), dir / "C_s.png", 0.0f, 1.0f);
  write_png(encode_visual(bundle.target_map), dir / "C_t.png", 0.0f, 1.0f);
  write_flow(bundle.flow, dir / "T.bin");
  write_png(dec.foreground, dir / "I_ft.png");
  write_png(dec.background, dir / "I_bg.png");
  write_png(warped, dir / "I_syn_raw.png");
  write_png(composited, dir / "I_syn.png");

  if (cfg.dump_flow) write_png(flow_visual(bundle.flow), dir / "T_vis.png");
  if (cfg.dump_maps) {
    write_mask_png(silhouette(bundle.source_map), dir / "S_s.png");
    write_mask_png(silhouette(bundle.target_map), dir / "S_t.png");
    write_mask_png(
        source_occlusion_mask(bundle.source_map, bundle.target_map, bundle.flow),
        dir / "occluded.png");
  }
}

}  // namespace

void run_imitate(const TaskConfig& cfg) {
  cfg.validate_resolution();
  BodyModel model = load_model_checked(cfg.model_path);
  BodyParams src = load_params_checked(cfg.src_params_path, model);
  BodyParams ref = load_params_checked(cfg.ref_params_path, model);
  FeatureMap image = load_image_checked(cfg.src_image_path, cfg.width, cfg.height);

  FlowBundle bundle =
      flow_for_imitation(model, src, ref, cfg.width, cfg.height, cfg.threads);
  write_flow_artifacts(cfg, cfg.out_dir, bundle, image);
}

void run_view(const TaskConfig& cfg) {
  cfg.validate_resolution();
  BodyModel model = load_model_checked(cfg.model_path);
  BodyParams src = load_params_checked(cfg.src_params_path, model);
  FeatureMap image = load_image_checked(cfg.src_image_path, cfg.width, cfg.height);

  auto render_view = [&](double yaw, const fs::path& dir) {
    Mat3 rot = rotation_from_euler(yaw, cfg.pitch_deg, cfg.roll_deg);
    FlowBundle bundle = flow_for_novel_view(model, src, rot, cfg.translate,
                                            cfg.width, cfg.height, cfg.threads);
    write_flow_artifacts(cfg, dir, bundle, image);
  };

  if (cfg.sweep) {
    for (int deg = 30; deg <= 330; deg += 30) {
      char name[16];
      std::snprintf(name, sizeof(name), "view_%03d", deg);
      render_view(deg, cfg.out_dir / name);
    }
  } else {
    render_view(cfg.yaw_deg, cfg.out_dir);
  }
}

void run_swap(const TaskConfig& cfg) {
  cfg.validate_resolution();
  BodyModel model = load_model_checked(cfg.model_path);
  BodyParams src = load_params_checked(cfg.src_params_path, model);
  BodyParams ref = load_params_checked(cfg.ref_params_path, model);
  FeatureMap src_image = load_image_checked(cfg.src_image_path, cfg.width, cfg.height);
  FeatureMap ref_image = load_image_checked(cfg.ref_image_path, cfg.width, cfg.height);

  SwapFlows flows = flow_for_swap(model, src, ref, cfg.width, cfg.height, cfg.threads);

  FeatureMap black(3, cfg.height, cfg.width);
  FeatureMap preview = lwb_aggregate({{&src_image, &flows.head_flow},
                                      {&ref_image, &flows.body_flow}},
                                     black, cfg.threads);

  fs::create_directories(cfg.out_dir);
  write_flow(flows.head_flow, cfg.out_dir / "T1.bin");
  write_flow(flows.body_flow, cfg.out_dir / "T2.bin");
  write_mask_png(flows.head_silhouette, cfg.out_dir / "S_head.png");
  write_png(preview, cfg.out_dir / "preview.png");
  if (cfg.dump_maps) {
    write_cmap(flows.source_body_map, cfg.out_dir / "C_b_s.bin");
    write_cmap(flows.reference_body_map, cfg.out_dir / "C_b_t.bin");
  }
}

void run_render(const TaskConfig& cfg) {
  cfg.validate_resolution();
  BodyModel model = load_model_checked(cfg.model_path);
  BodyParams src = load_params_checked(cfg.src_params_path, model);

  CorrespondenceMap cmap = rasterize(project(skin(model, src), src.camera),
                                     cfg.width, cfg.height, cfg.threads);
  fs::create_directories(cfg.out_dir);
  write_cmap(cmap, cfg.out_dir / "C_s.bin");
  write_png(encode_visual(cmap), cfg.out_dir / "C_s.png", 0.0f, 1.0f);
  write_mask_png(silhouette(cmap), cfg.out_dir / "S_s.png");

  if (!cfg.src_image_path.empty()) {
    FeatureMap image = load_image_checked(cfg.src_image_path, cfg.width, cfg.height);
    DecomposedSource dec = decompose(image, cmap);
    write_png(dec.foreground, cfg.out_dir / "I_ft.png");
    write_png(dec.background, cfg.out_dir / "I_bg.png");
  }
}

std::map<std::string, double> run_eval(const TaskConfig& cfg) {
  require(!cfg.pred_path.empty() && !cfg.gt_path.empty(),
          "eval needs --pred and --gt");
  require(fs::exists(cfg.pred_path), "prediction not found: " + cfg.pred_path.string());
  require(fs::exists(cfg.gt_path), "ground truth not found: " + cfg.gt_path.string());

  // Metrics read images in [0, 1] (the SSIM dynamic range).
  FeatureMap pred = read_png(cfg.pred_path, 0.0f, 1.0f);
  FeatureMap gt = read_png(cfg.gt_path, 0.0f, 1.0f);
  require(pred.same_shape(gt), "prediction and ground truth dimensions differ");

  std::map<std::string, double> record;
  for (const std::string& metric : cfg.metrics) {
    if (metric == "ssim") {
      record["ssim"] = ssim(pred, gt);
    } else if (metric == "l1") {
      double acc = 0.0;
      for (size_t i = 0; i < pred.data.size(); ++i)
        acc += std::abs(static_cast<double>(pred.data[i]) - gt.data[i]);
      record["l1"] = acc / static_cast<double>(pred.data.size());
    } else if (metric == "mse") {
      double acc = 0.0;
      for (size_t i = 0; i < pred.data.size(); ++i) {
        const double d = static_cast<double>(pred.data[i]) - gt.data[i];
        acc += d * d;
      }
      record["mse"] = acc / static_cast<double>(pred.data.size());
    } else if (metric == "perceptual") {
      auto f = make_extractor(cfg.extractor);
      // Single-pair perceptual distance: both halves of the training-time
      // loss collapse to the same pair.
      record["perceptual"] = perceptual_loss(*f, pred, gt, pred, gt) / 2.0;
    } else {
      throw ValidationError("unknown metric '" + metric +
                            "' (expected ssim|l1|mse|perceptual)");
    }
  }
  return record;
}

void gen_synthetic(uint64_t seed, const fs::path& out_dir, int width, int height,
                   int threads) {
  require(width >= 8 && height >= 8, "resolution must be at least 8x8");
  SyntheticScene scene = make_synthetic_scene(seed);
  fs::create_directories(out_dir);
  save_body_model(scene.model, out_dir / "model.json");
  save_body_params(scene.source_params, out_dir / "src_params.json");
  save_body_params(scene.reference_params, out_dir / "ref_params.json");
  write_png(render_body_image(scene.model, scene.source_params, width, height, threads),
            out_dir / "source.png");
  write_png(render_body_image(scene.model, scene.reference_params, width, height, threads),
            out_dir / "reference.png");
}

}  // namespace lw

#include <CLI11.hpp>
#include <iostream>
#include <nlohmann/json.hpp>

#include "lw/errors.hpp"
#include "lw/io.hpp"
#include "lw/parallel.hpp"
#include "lw/pipeline.hpp"

namespace {

// Exit codes: 0 success, 2 usage error, 3 input validation error,
// 4 internal invariant violation.
constexpr int kExitUsage = 2;
constexpr int kExitValidation = 3;
constexpr int kExitInternal = 4;

void add_size_option(CLI::App* cmd, lw::TaskConfig& cfg) {
  cmd->add_option_function<std::string>(
         "--size",
         [&cfg](const std::string& s) {
           const auto x = s.find('x');
           if (x == std::string::npos)
             throw CLI::ValidationError("--size", "expected WxH, e.g. 256x256");
           try {
             cfg.width = std::stoi(s.substr(0, x));
             cfg.height = std::stoi(s.substr(x + 1));
           } catch (const std::exception&) {
             throw CLI::ValidationError("--size", "expected WxH, e.g. 256x256");
           }
         },
         "Output resolution WxH (default 256x256)");
}

void add_common_options(CLI::App* cmd, lw::TaskConfig& cfg) {
  cmd->add_option("--model", cfg.model_path, "Body model manifest (JSON)");
  cmd->add_option("--src-params", cfg.src_params_path, "Source body params (JSON)");
  cmd->add_option("--out", cfg.out_dir, "Output directory")->required();
  add_size_option(cmd, cfg);
  cmd->add_flag("--dump-flow", cfg.dump_flow, "Also write a flow visualization PNG");
  cmd->add_flag("--dump-maps", cfg.dump_maps, "Also write silhouette/diagnostic maps");
  cmd->add_option("--threads", cfg.threads,
                  "Worker threads (0 = LIQUIDWARP_THREADS env var, else 1)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"liquidwarp: geometric warping engine for body-mesh guided "
               "motion imitation, novel view synthesis and appearance transfer"};
  app.require_subcommand(1);

  lw::TaskConfig cfg;
  cfg.threads = 0;
  std::string translate_spec;

  CLI::App* imitate = app.add_subcommand("imitate", "Warp a source image into a reference pose");
  add_common_options(imitate, cfg);
  imitate->add_option("--ref-params", cfg.ref_params_path, "Reference body params (JSON)");
  imitate->add_option("--src-image", cfg.src_image_path, "Source image (PNG)");

  CLI::App* view = app.add_subcommand("view", "Re-render a source image from a novel view");
  add_common_options(view, cfg);
  view->add_option("--src-image", cfg.src_image_path, "Source image (PNG)");
  view->add_option("--yaw", cfg.yaw_deg, "Yaw in degrees (about y)");
  view->add_option("--pitch", cfg.pitch_deg, "Pitch in degrees (about x)");
  view->add_option("--roll", cfg.roll_deg, "Roll in degrees (about z)");
  view->add_option("--translate", translate_spec, "Translation x,y,z in model units");
  view->add_flag("--sweep", cfg.sweep, "Emit a 30..330 degree yaw sweep (30 degree steps)");

  CLI::App* swap = app.add_subcommand("swap", "Keep source-one head, take source-two body");
  add_common_options(swap, cfg);
  swap->add_option("--ref-params", cfg.ref_params_path, "Second-source body params (JSON)");
  swap->add_option("--src-image", cfg.src_image_path, "First source image (head)");
  swap->add_option("--ref-image", cfg.ref_image_path, "Second source image (body)");

  CLI::App* render = app.add_subcommand("render", "Render correspondence map and silhouette");
  add_common_options(render, cfg);
  render->add_option("--src-image", cfg.src_image_path,
                     "Optional source image to decompose");

  CLI::App* eval = app.add_subcommand("eval", "Evaluate metrics on an image pair");
  eval->add_option("--pred", cfg.pred_path, "Prediction image (PNG)")->required();
  eval->add_option("--gt", cfg.gt_path, "Ground-truth image (PNG)")->required();
  eval->add_option("--metrics", cfg.metrics,
                   "Metrics to emit (ssim, l1, mse, perceptual)")
      ->delimiter(',');
  eval->add_option("--extractor", cfg.extractor,
                   "Feature extractor: toy | identity | external:<path>");
  eval->add_option("--out", cfg.out_dir, "Directory for metrics.json (default: stdout only)");

  CLI::App* gen = app.add_subcommand("gen-synthetic", "Generate the synthetic test scene");
  gen->add_option("--seed", cfg.seed, "Scene seed");
  gen->add_option("--out", cfg.out_dir, "Output directory")->required();
  add_size_option(gen, cfg);
  gen->add_option("--threads", cfg.threads, "Worker threads");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    cfg.threads = lw::resolve_threads(cfg.threads);
    if (!translate_spec.empty()) {
      double x, y, z;
      if (std::sscanf(translate_spec.c_str(), "%lf,%lf,%lf", &x, &y, &z) != 3)
        throw lw::ValidationError("--translate expects x,y,z");
      cfg.translate = lw::Vec3(x, y, z);
    }

    if (imitate->parsed()) {
      lw::run_imitate(cfg);
    } else if (view->parsed()) {
      lw::run_view(cfg);
    } else if (swap->parsed()) {
      lw::run_swap(cfg);
    } else if (render->parsed()) {
      lw::run_render(cfg);
    } else if (eval->parsed()) {
      auto record = lw::run_eval(cfg);
      nlohmann::json j(record);
      std::cout << j.dump(1) << "\n";
      if (!cfg.out_dir.empty()) {
        std::filesystem::create_directories(cfg.out_dir);
        lw::write_file_atomic(cfg.out_dir / "metrics.json",
                              [&](std::ostream& os) { os << j.dump(1) << "\n"; });
      }
    } else if (gen->parsed()) {
      lw::gen_synthetic(cfg.seed, cfg.out_dir, cfg.width, cfg.height, cfg.threads);
    }
  } catch (const lw::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return 0;
}

#pragma once

#include <filesystem>
#include <functional>
#include <string>

#include "lw/body_model.hpp"
#include "lw/feature_map.hpp"
#include "lw/flow.hpp"
#include "lw/raster.hpp"

namespace lw {

// All binary artifacts are little-endian; formats are documented in
// docs/binary_formats.md. Writes go through a temp file plus rename so
// partial runs never leave corrupt artifacts.

void write_file_atomic(const std::filesystem::path& path,
                       const std::function<void(std::ostream&)>& writer);

// PNG <-> FeatureMap. Values map affinely between [lo, hi] and [0, 255]
// with round-half-to-even; 3-channel images write RGB, 1-channel gray.
void write_png(const FeatureMap& image, const std::filesystem::path& path,
               float lo = -1.0f, float hi = 1.0f);
FeatureMap read_png(const std::filesystem::path& path, float lo = -1.0f,
                    float hi = 1.0f);

void write_mask_png(const Silhouette& mask, const std::filesystem::path& path);
Silhouette read_mask_png(const std::filesystem::path& path);

// Correspondence map dump: "LWCM", u32 W, u32 H, then per pixel
// {i32 face_index (-1 empty), f32 w1, w2, w3, f32 depth}.
void write_cmap(const CorrespondenceMap& cmap, const std::filesystem::path& path);
CorrespondenceMap read_cmap(const std::filesystem::path& path);

// Flow dump: "LWFL", u32 W, u32 H, then per pixel {f32 u, f32 v} with the
// (-2, -2) sentinel for invalid pixels.
void write_flow(const TransformFlow& flow, const std::filesystem::path& path);
TransformFlow read_flow(const std::filesystem::path& path);

// False-color flow visualization (u -> red, v -> green, invalid -> black).
FeatureMap flow_visual(const TransformFlow& flow);

// Feature map dump: "LWFM", u32 C, u32 H, u32 W, f32 row-major data.
void write_feature_map(const FeatureMap& map, const std::filesystem::path& path);
FeatureMap read_feature_map(const std::filesystem::path& path);

// Body model manifest (JSON, optionally with an adjacent f32 blob); see
// docs/model_format.md.
BodyModel load_body_model(const std::filesystem::path& json_path);
void save_body_model(const BodyModel& model, const std::filesystem::path& json_path);

// Body params: {"theta": [...], "beta": [...], "camera": [s, tx, ty]}.
BodyParams load_body_params(const std::filesystem::path& path);
void save_body_params(const BodyParams& params, const std::filesystem::path& path);

}  // namespace lw

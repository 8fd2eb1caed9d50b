#include "lw/io.hpp"

#include <png.h>

#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

static_assert(std::endian::native == std::endian::little,
              "binary formats assume a little-endian host");

namespace lw {

namespace fs = std::filesystem;
using nlohmann::json;

void write_file_atomic(const fs::path& path,
                       const std::function<void(std::ostream&)>& writer) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    require(os.good(), "cannot open " + tmp.string() + " for writing");
    writer(os);
    require(os.good(), "failed writing " + tmp.string());
  }
  fs::rename(tmp, path);
}

namespace {

void write_u32(std::ostream& os, uint32_t v) {
  os.write(reinterpret_cast<const char*>(&v), 4);
}
uint32_t read_u32(std::istream& is) {
  uint32_t v = 0;
  is.read(reinterpret_cast<char*>(&v), 4);
  return v;
}
void write_f32(std::ostream& os, float v) {
  os.write(reinterpret_cast<const char*>(&v), 4);
}
float read_f32(std::istream& is) {
  float v = 0;
  is.read(reinterpret_cast<char*>(&v), 4);
  return v;
}
void write_i32(std::ostream& os, int32_t v) {
  os.write(reinterpret_cast<const char*>(&v), 4);
}
int32_t read_i32(std::istream& is) {
  int32_t v = 0;
  is.read(reinterpret_cast<char*>(&v), 4);
  return v;
}

std::ifstream open_binary(const fs::path& path, const char expect_magic[4]) {
  std::ifstream is(path, std::ios::binary);
  require(is.good(), "cannot open " + path.string());
  char magic[4];
  is.read(magic, 4);
  require(is.good() && std::memcmp(magic, expect_magic, 4) == 0,
          path.string() + " has the wrong magic");
  return is;
}

uint8_t quantize(float v, float lo, float hi) {
  double t = (static_cast<double>(v) - lo) / (static_cast<double>(hi) - lo);
  t = std::clamp(t, 0.0, 1.0);
  return static_cast<uint8_t>(std::nearbyint(t * 255.0));
}

struct PngReadCloser {
  png_structp png = nullptr;
  png_infop info = nullptr;
  FILE* fp = nullptr;
  ~PngReadCloser() {
    if (png) png_destroy_read_struct(&png, info ? &info : nullptr, nullptr);
    if (fp) std::fclose(fp);
  }
};
struct PngWriteCloser {
  png_structp png = nullptr;
  png_infop info = nullptr;
  FILE* fp = nullptr;
  ~PngWriteCloser() {
    if (png) png_destroy_write_struct(&png, info ? &info : nullptr);
    if (fp) std::fclose(fp);
  }
};

void write_png_bytes(const fs::path& path, const std::vector<uint8_t>& bytes,
                     int width, int height, int channels) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    PngWriteCloser c;
    c.fp = std::fopen(tmp.string().c_str(), "wb");
    require(c.fp != nullptr, "cannot open " + tmp.string() + " for writing");
    c.png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    require(c.png != nullptr, "png_create_write_struct failed");
    c.info = png_create_info_struct(c.png);
    require(c.info != nullptr, "png_create_info_struct failed");
    if (setjmp(png_jmpbuf(c.png))) throw ValidationError("libpng write error for " + path.string());
    png_init_io(c.png, c.fp);
    png_set_IHDR(c.png, c.info, width, height, 8,
                 channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    png_write_info(c.png, c.info);
    std::vector<png_bytep> rows(height);
    for (int y = 0; y < height; ++y)
      rows[y] = const_cast<png_bytep>(bytes.data() + static_cast<size_t>(y) * width * channels);
    png_write_image(c.png, rows.data());
    png_write_end(c.png, nullptr);
  }
  fs::rename(tmp, path);
}

std::vector<uint8_t> read_png_bytes(const fs::path& path, int& width, int& height) {
  PngReadCloser c;
  c.fp = std::fopen(path.string().c_str(), "rb");
  require(c.fp != nullptr, "cannot open " + path.string());
  c.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  require(c.png != nullptr, "png_create_read_struct failed");
  c.info = png_create_info_struct(c.png);
  require(c.info != nullptr, "png_create_info_struct failed");
  if (setjmp(png_jmpbuf(c.png))) throw ValidationError(path.string() + " is not a readable PNG");
  png_init_io(c.png, c.fp);
  png_read_info(c.png, c.info);

  width = static_cast<int>(png_get_image_width(c.png, c.info));
  height = static_cast<int>(png_get_image_height(c.png, c.info));
  const png_byte color = png_get_color_type(c.png, c.info);
  const png_byte depth = png_get_bit_depth(c.png, c.info);

  if (depth == 16) png_set_strip_16(c.png);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(c.png);
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(c.png);
  if (png_get_valid(c.png, c.info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(c.png);
  if (color == PNG_COLOR_TYPE_GRAY || color == PNG_COLOR_TYPE_GRAY_ALPHA)
    png_set_gray_to_rgb(c.png);
  png_set_strip_alpha(c.png);
  png_read_update_info(c.png, c.info);

  std::vector<uint8_t> bytes(static_cast<size_t>(width) * height * 3);
  std::vector<png_bytep> rows(height);
  for (int y = 0; y < height; ++y)
    rows[y] = bytes.data() + static_cast<size_t>(y) * width * 3;
  png_read_image(c.png, rows.data());
  return bytes;
}

}  // namespace

void write_png(const FeatureMap& image, const fs::path& path, float lo, float hi) {
  require(image.channels == 1 || image.channels == 3,
          "write_png expects a 1- or 3-channel map");
  const int w = image.width, h = image.height, ch = image.channels;
  std::vector<uint8_t> bytes(static_cast<size_t>(w) * h * ch);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < ch; ++c)
        bytes[(static_cast<size_t>(y) * w + x) * ch + c] = quantize(image.at(c, y, x), lo, hi);
  write_png_bytes(path, bytes, w, h, ch);
}

FeatureMap read_png(const fs::path& path, float lo, float hi) {
  int w = 0, h = 0;
  std::vector<uint8_t> bytes = read_png_bytes(path, w, h);
  FeatureMap img(3, h, w);
  const double span = static_cast<double>(hi) - lo;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < 3; ++c)
        img.at(c, y, x) = static_cast<float>(
            lo + bytes[(static_cast<size_t>(y) * w + x) * 3 + c] / 255.0 * span);
  return img;
}

void write_mask_png(const Silhouette& mask, const fs::path& path) {
  std::vector<uint8_t> bytes(mask.mask.size());
  for (size_t i = 0; i < mask.mask.size(); ++i) bytes[i] = mask.mask[i] ? 255 : 0;
  write_png_bytes(path, bytes, mask.width, mask.height, 1);
}

Silhouette read_mask_png(const fs::path& path) {
  int w = 0, h = 0;
  std::vector<uint8_t> bytes = read_png_bytes(path, w, h);
  Silhouette s;
  s.width = w;
  s.height = h;
  s.mask.resize(static_cast<size_t>(w) * h);
  for (size_t i = 0; i < s.mask.size(); ++i) s.mask[i] = bytes[3 * i] >= 128 ? 1 : 0;
  return s;
}

void write_cmap(const CorrespondenceMap& cmap, const fs::path& path) {
  write_file_atomic(path, [&](std::ostream& os) {
    os.write("LWCM", 4);
    write_u32(os, static_cast<uint32_t>(cmap.width));
    write_u32(os, static_cast<uint32_t>(cmap.height));
    for (size_t p = 0; p < cmap.face_index.size(); ++p) {
      write_i32(os, cmap.face_index[p]);
      write_f32(os, static_cast<float>(cmap.bary[3 * p + 0]));
      write_f32(os, static_cast<float>(cmap.bary[3 * p + 1]));
      write_f32(os, static_cast<float>(cmap.bary[3 * p + 2]));
      write_f32(os, static_cast<float>(cmap.depth[p]));
    }
  });
}

CorrespondenceMap read_cmap(const fs::path& path) {
  std::ifstream is = open_binary(path, "LWCM");
  CorrespondenceMap cmap;
  cmap.width = static_cast<int>(read_u32(is));
  cmap.height = static_cast<int>(read_u32(is));
  require(cmap.width >= 1 && cmap.height >= 1 && cmap.width <= 1 << 16 &&
              cmap.height <= 1 << 16,
          "corrupt correspondence map header in " + path.string());
  const size_t n = static_cast<size_t>(cmap.width) * cmap.height;
  cmap.face_index.resize(n);
  cmap.bary.resize(3 * n);
  cmap.depth.resize(n);
  int32_t max_face = -1;
  for (size_t p = 0; p < n; ++p) {
    cmap.face_index[p] = read_i32(is);
    cmap.bary[3 * p + 0] = read_f32(is);
    cmap.bary[3 * p + 1] = read_f32(is);
    cmap.bary[3 * p + 2] = read_f32(is);
    cmap.depth[p] = read_f32(is);
    max_face = std::max(max_face, cmap.face_index[p]);
  }
  require(is.good(), "truncated correspondence map " + path.string());
  cmap.num_faces = max_face + 1;  // lower bound; the header carries no face count
  return cmap;
}

void write_flow(const TransformFlow& flow, const fs::path& path) {
  write_file_atomic(path, [&](std::ostream& os) {
    os.write("LWFL", 4);
    write_u32(os, static_cast<uint32_t>(flow.width));
    write_u32(os, static_cast<uint32_t>(flow.height));
    for (size_t p = 0; p < flow.valid.size(); ++p) {
      write_f32(os, static_cast<float>(flow.uv[2 * p]));
      write_f32(os, static_cast<float>(flow.uv[2 * p + 1]));
    }
  });
}

TransformFlow read_flow(const fs::path& path) {
  std::ifstream is = open_binary(path, "LWFL");
  const int w = static_cast<int>(read_u32(is));
  const int h = static_cast<int>(read_u32(is));
  require(w >= 1 && h >= 1 && w <= 1 << 16 && h <= 1 << 16,
          "corrupt flow header in " + path.string());
  TransformFlow flow(w, h);
  for (size_t p = 0; p < flow.valid.size(); ++p) {
    const float u = read_f32(is);
    const float v = read_f32(is);
    if (u == static_cast<float>(kInvalidFlow) && v == static_cast<float>(kInvalidFlow))
      continue;
    flow.uv[2 * p] = u;
    flow.uv[2 * p + 1] = v;
    flow.valid[p] = 1;
  }
  require(is.good(), "truncated flow " + path.string());
  return flow;
}

FeatureMap flow_visual(const TransformFlow& flow) {
  FeatureMap img(3, flow.height, flow.width);
  std::fill(img.data.begin(), img.data.end(), -1.0f);
  for (int y = 0; y < flow.height; ++y) {
    for (int x = 0; x < flow.width; ++x) {
      if (!flow.valid[flow.pixel(y, x)]) continue;
      img.at(0, y, x) = static_cast<float>(std::clamp(flow.u(y, x), -1.0, 1.0));
      img.at(1, y, x) = static_cast<float>(std::clamp(flow.v(y, x), -1.0, 1.0));
    }
  }
  return img;
}

void write_feature_map(const FeatureMap& map, const fs::path& path) {
  write_file_atomic(path, [&](std::ostream& os) {
    os.write("LWFM", 4);
    write_u32(os, static_cast<uint32_t>(map.channels));
    write_u32(os, static_cast<uint32_t>(map.height));
    write_u32(os, static_cast<uint32_t>(map.width));
    os.write(reinterpret_cast<const char*>(map.data.data()),
             static_cast<std::streamsize>(map.data.size() * sizeof(float)));
  });
}

FeatureMap read_feature_map(const fs::path& path) {
  std::ifstream is = open_binary(path, "LWFM");
  const int c = static_cast<int>(read_u32(is));
  const int h = static_cast<int>(read_u32(is));
  const int w = static_cast<int>(read_u32(is));
  require(c >= 1 && h >= 1 && w >= 1 && c <= 1 << 16 && h <= 1 << 16 && w <= 1 << 16,
          "corrupt feature map header in " + path.string());
  FeatureMap map(c, h, w);
  is.read(reinterpret_cast<char*>(map.data.data()),
          static_cast<std::streamsize>(map.data.size() * sizeof(float)));
  require(is.good(), "truncated feature map " + path.string());
  return map;
}

namespace {

// An array entry is {"shape": [...]} plus either inline "data" (flat,
// row-major) or an "offset" in bytes into the adjacent f32 blob.
std::vector<double> load_array(const json& entry, const std::string& name,
                               const std::vector<float>& blob,
                               std::vector<size_t>& shape_out) {
  require(entry.is_object() && entry.contains("shape"),
          "array '" + name + "' needs a shape");
  size_t count = 1;
  shape_out.clear();
  for (const auto& d : entry.at("shape")) {
    require(d.is_number_unsigned() && d.get<size_t>() >= 1,
            "array '" + name + "' has a bad shape entry");
    shape_out.push_back(d.get<size_t>());
    count *= shape_out.back();
  }
  std::vector<double> values;
  values.reserve(count);
  if (entry.contains("data")) {
    const auto& data = entry.at("data");
    require(data.is_array() && data.size() == count,
            "array '" + name + "' inline data length does not match its shape");
    for (const auto& v : data) {
      require(v.is_number(), "array '" + name + "' has non-numeric data");
      values.push_back(v.get<double>());
    }
  } else if (entry.contains("offset")) {
    const size_t offset = entry.at("offset").get<size_t>();
    require(offset % 4 == 0, "array '" + name + "' offset must be 4-byte aligned");
    const size_t first = offset / 4;
    require(first + count <= blob.size(),
            "array '" + name + "' runs past the end of the blob");
    for (size_t i = 0; i < count; ++i) values.push_back(blob[first + i]);
  } else {
    throw ValidationError("array '" + name + "' needs inline data or a blob offset");
  }
  return values;
}

MatX to_matrix(const std::vector<double>& v, size_t rows, size_t cols) {
  MatX m(rows, cols);
  for (size_t r = 0; r < rows; ++r)
    for (size_t c = 0; c < cols; ++c) m(r, c) = v[r * cols + c];
  return m;
}

json matrix_entry(const MatX& m) {
  json entry;
  entry["shape"] = {m.rows(), m.cols()};
  json data = json::array();
  for (int r = 0; r < m.rows(); ++r)
    for (int c = 0; c < m.cols(); ++c) data.push_back(m(r, c));
  entry["data"] = std::move(data);
  return entry;
}

json parse_json_file(const fs::path& path) {
  std::ifstream is(path);
  require(is.good(), "cannot open " + path.string());
  json j = json::parse(is, nullptr, /*allow_exceptions=*/false);
  require(!j.is_discarded(), path.string() + " is not valid JSON");
  return j;
}

}  // namespace

BodyModel load_body_model(const fs::path& json_path) {
  json j = parse_json_file(json_path);
  require(j.value("format", "") == "liquidwarp-body-model",
          json_path.string() + " is not a body model manifest");

  std::vector<float> blob;
  if (j.contains("blob")) {
    fs::path blob_path = json_path.parent_path() / j.at("blob").get<std::string>();
    std::ifstream bs(blob_path, std::ios::binary);
    require(bs.good(), "cannot open model blob " + blob_path.string());
    bs.seekg(0, std::ios::end);
    const auto bytes = static_cast<size_t>(bs.tellg());
    require(bytes % 4 == 0, "model blob size must be a multiple of 4");
    bs.seekg(0);
    blob.resize(bytes / 4);
    bs.read(reinterpret_cast<char*>(blob.data()), static_cast<std::streamsize>(bytes));
    require(bs.good(), "failed reading model blob " + blob_path.string());
  }

  require(j.contains("arrays") && j.at("arrays").is_object(),
          "model manifest needs an 'arrays' object");
  const json& arrays = j.at("arrays");
  auto fetch = [&](const std::string& name, std::vector<size_t>& shape) {
    require(arrays.contains(name), "model manifest is missing array '" + name + "'");
    return load_array(arrays.at(name), name, blob, shape);
  };

  BodyModel model;
  std::vector<size_t> shape;

  auto tv = fetch("template_vertices", shape);
  require(shape.size() == 2 && shape[1] == 3, "template_vertices must be Nv x 3");
  const size_t nv = shape[0];
  model.template_vertices = to_matrix(tv, nv, 3);

  auto fc = fetch("faces", shape);
  require(shape.size() == 2 && shape[1] == 3, "faces must be Nf x 3");
  model.faces.resize(static_cast<int>(shape[0]), 3);
  for (size_t f = 0; f < shape[0]; ++f) {
    for (int k = 0; k < 3; ++k) {
      const double v = fc[f * 3 + k];
      require(v == std::floor(v), "face indices must be integers");
      model.faces(static_cast<int>(f), k) = static_cast<int>(v);
    }
  }

  if (arrays.contains("shape_blendshapes")) {
    auto bs = fetch("shape_blendshapes", shape);
    require(shape.size() == 3 && shape[1] == nv && shape[2] == 3,
            "shape_blendshapes must be Nb x Nv x 3");
    for (size_t b = 0; b < shape[0]; ++b)
      model.shape_blendshapes.push_back(
          to_matrix({bs.begin() + static_cast<long>(b * nv * 3),
                     bs.begin() + static_cast<long>((b + 1) * nv * 3)},
                    nv, 3));
  }

  auto jr = fetch("joint_regressor", shape);
  require(shape.size() == 2 && shape[1] == nv, "joint_regressor must be Nj x Nv");
  const size_t nj = shape[0];
  model.joint_regressor = to_matrix(jr, nj, nv);

  auto kp = fetch("kinematic_parents", shape);
  require(shape.size() == 1 && shape[0] == nj, "kinematic_parents must be Nj long");
  for (double v : kp) {
    require(v == std::floor(v), "kinematic parents must be integers");
    model.kinematic_parents.push_back(static_cast<int>(v));
  }

  auto sw = fetch("skinning_weights", shape);
  require(shape.size() == 2 && shape[0] == nv && shape[1] == nj,
          "skinning_weights must be Nv x Nj");
  model.skinning_weights = to_matrix(sw, nv, nj);

  if (j.contains("vertex_groups")) {
    for (const auto& [name, ids] : j.at("vertex_groups").items()) {
      require(ids.is_array(), "vertex group '" + name + "' must be an index list");
      std::vector<int> group;
      for (const auto& v : ids) group.push_back(v.get<int>());
      model.vertex_groups[name] = std::move(group);
    }
  }

  model.validate();
  return model;
}

void save_body_model(const BodyModel& model, const fs::path& json_path) {
  model.validate();
  json j;
  j["format"] = "liquidwarp-body-model";
  j["version"] = 1;

  json arrays;
  arrays["template_vertices"] = matrix_entry(model.template_vertices);

  json faces;
  faces["shape"] = {model.num_faces(), 3};
  json fdata = json::array();
  for (int f = 0; f < model.num_faces(); ++f)
    for (int k = 0; k < 3; ++k) fdata.push_back(model.faces(f, k));
  faces["data"] = std::move(fdata);
  arrays["faces"] = std::move(faces);

  if (!model.shape_blendshapes.empty()) {
    json bs;
    bs["shape"] = {model.num_shapes(), model.num_vertices(), 3};
    json bdata = json::array();
    for (const MatX& m : model.shape_blendshapes)
      for (int r = 0; r < m.rows(); ++r)
        for (int c = 0; c < 3; ++c) bdata.push_back(m(r, c));
    bs["data"] = std::move(bdata);
    arrays["shape_blendshapes"] = std::move(bs);
  }

  arrays["joint_regressor"] = matrix_entry(model.joint_regressor);

  json kp;
  kp["shape"] = {model.num_joints()};
  kp["data"] = model.kinematic_parents;
  arrays["kinematic_parents"] = std::move(kp);

  arrays["skinning_weights"] = matrix_entry(model.skinning_weights);
  j["arrays"] = std::move(arrays);

  if (!model.vertex_groups.empty()) {
    json groups;
    for (const auto& [name, ids] : model.vertex_groups) groups[name] = ids;
    j["vertex_groups"] = std::move(groups);
  }

  write_file_atomic(json_path, [&](std::ostream& os) { os << j.dump(1) << "\n"; });
}

BodyParams load_body_params(const fs::path& path) {
  json j = parse_json_file(path);
  require(j.contains("theta") && j.contains("camera"),
          path.string() + " must contain 'theta' and 'camera'");
  BodyParams p;
  for (const auto& v : j.at("theta")) p.theta.push_back(v.get<double>());
  if (j.contains("beta"))
    for (const auto& v : j.at("beta")) p.beta.push_back(v.get<double>());
  const auto& cam = j.at("camera");
  require(cam.is_array() && cam.size() == 3, "camera must be [s, tx, ty]");
  p.camera.scale = cam[0].get<double>();
  p.camera.tx = cam[1].get<double>();
  p.camera.ty = cam[2].get<double>();
  p.camera.validate();
  return p;
}

void save_body_params(const BodyParams& params, const fs::path& path) {
  json j;
  j["theta"] = params.theta;
  j["beta"] = params.beta;
  j["camera"] = {params.camera.scale, params.camera.tx, params.camera.ty};
  write_file_atomic(path, [&](std::ostream& os) { os << j.dump(1) << "\n"; });
}

}  // namespace lw

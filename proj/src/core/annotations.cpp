#include "plantres/annotations.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "plantres/error.hpp"
#include "plantres/image_io.hpp"
#include "plantres/xml.hpp"

namespace plantres {

namespace {

std::string_view trim(std::string_view s) {
  auto is_ws = [](char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; };
  while (!s.empty() && is_ws(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_ws(s.back())) s.remove_suffix(1);
  return s;
}

double parse_number(std::string_view text, const std::string& what) {
  text = trim(text);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(v)) {
    throw Error(ErrorCode::kSchema, what + ": expected a number, got '" + std::string(text) + "'");
  }
  return v;
}

const xml::Element& require_child(const xml::Element& parent, std::string_view name,
                                  const std::string& context) {
  const xml::Element* c = parent.child(name);
  if (!c) {
    throw Error(ErrorCode::kSchema, context + ": missing <" + std::string(name) + "> element");
  }
  return *c;
}

std::string strip_extension(std::string_view filename) {
  auto slash = filename.find_last_of("/\\");
  if (slash != std::string_view::npos) filename.remove_prefix(slash + 1);
  auto dot = filename.find_last_of('.');
  if (dot != std::string_view::npos && dot > 0) filename = filename.substr(0, dot);
  return std::string(filename);
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, ptr);
}

Annotation parse_voc_xml(std::string_view content) { return parse_voc_xml(content, nullptr); }

Annotation parse_voc_xml(std::string_view content, VocImageSize* size) {
  auto root = xml::parse(content);
  if (root->name != "annotation") {
    throw Error(ErrorCode::kSchema, "root element is <" + root->name + ">, expected <annotation>");
  }
  const xml::Element* filename = root->child("filename");
  if (!filename || trim(filename->text).empty()) {
    throw Error(ErrorCode::kSchema, "annotation has no <filename>");
  }

  Annotation out;
  out.image_id = strip_extension(trim(filename->text));
  if (out.image_id.empty()) throw Error(ErrorCode::kSchema, "annotation <filename> has no stem");

  if (size) {
    *size = {};
    if (const xml::Element* s = root->child("size")) {
      auto dim = [&](std::string_view key, int fallback) {
        const xml::Element* e = s->child(key);
        return e ? static_cast<int>(parse_number(e->text, "size/" + std::string(key))) : fallback;
      };
      size->width = dim("width", 0);
      size->height = dim("height", 0);
      size->depth = dim("depth", 3);
    }
  }

  auto objects = root->children_named("object");
  out.boxes.reserve(objects.size());
  for (std::size_t i = 0; i < objects.size(); ++i) {
    const std::string ctx = "object " + std::to_string(i);
    const xml::Element& bnd = require_child(*objects[i], "bndbox", ctx);
    auto coord = [&](std::string_view key) {
      return parse_number(require_child(bnd, key, ctx).text, ctx + " " + std::string(key));
    };
    const double xmin = coord("xmin");
    const double ymin = coord("ymin");
    const double xmax = coord("xmax");
    const double ymax = coord("ymax");
    if (xmin >= xmax || ymin >= ymax) {
      std::ostringstream os;
      os << "invalid box at object index " << i << ": (" << xmin << ", " << ymin << ", " << xmax
         << ", " << ymax << ")";
      throw Error(ErrorCode::kInvalidBox, os.str());
    }
    // Some tools write 0-based corners; a corner at 0 maps onto the image edge.
    BBox b{std::max(0.0, xmin - 1.0), std::max(0.0, ymin - 1.0), xmax, ymax};
    validate_box(b, "object index " + std::to_string(i));
    out.boxes.push_back(b);
  }
  return out;
}

std::string serialize_annotation(const Annotation& a, const VocImageSize& size,
                                 std::string_view filename) {
  std::ostringstream os;
  const std::string fname = filename.empty() ? a.image_id + ".png" : std::string(filename);
  os << "<annotation>\n";
  os << "\t<folder>images</folder>\n";
  os << "\t<filename>" << xml::escape(fname) << "</filename>\n";
  os << "\t<size>\n";
  os << "\t\t<width>" << size.width << "</width>\n";
  os << "\t\t<height>" << size.height << "</height>\n";
  os << "\t\t<depth>" << size.depth << "</depth>\n";
  os << "\t</size>\n";
  os << "\t<segmented>0</segmented>\n";
  for (const BBox& b : a.boxes) {
    os << "\t<object>\n";
    os << "\t\t<name>plant</name>\n";
    os << "\t\t<pose>Unspecified</pose>\n";
    os << "\t\t<truncated>0</truncated>\n";
    os << "\t\t<difficult>0</difficult>\n";
    os << "\t\t<bndbox>\n";
    os << "\t\t\t<xmin>" << format_double(b.x_min + 1.0) << "</xmin>\n";
    os << "\t\t\t<ymin>" << format_double(b.y_min + 1.0) << "</ymin>\n";
    os << "\t\t\t<xmax>" << format_double(b.x_max) << "</xmax>\n";
    os << "\t\t\t<ymax>" << format_double(b.y_max) << "</ymax>\n";
    os << "\t\t</bndbox>\n";
    os << "\t</object>\n";
  }
  os << "</annotation>\n";
  return os.str();
}

// ---------------------------------------------------------------------------

std::vector<Prediction> parse_predictions(std::string_view content) {
  static const std::set<std::string> kKeys{"image_id", "x_min", "y_min", "x_max", "y_max", "score"};
  std::vector<Prediction> out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < content.size()) {
    auto nl = content.find('\n', pos);
    std::string_view line =
        content.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? content.size() : nl + 1;
    ++line_no;
    line = trim(line);
    if (line.empty()) continue;

    const std::string where = "predictions line " + std::to_string(line_no);
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(ErrorCode::kParse, where + ": " + e.what());
    }
    if (!j.is_object()) throw Error(ErrorCode::kParse, where + ": expected a JSON object");
    for (const auto& [key, value] : j.items()) {
      if (!kKeys.count(key)) throw Error(ErrorCode::kParse, where + ": unexpected key '" + key + "'");
    }
    for (const auto& key : kKeys) {
      if (!j.contains(key)) throw Error(ErrorCode::kParse, where + ": missing key '" + key + "'");
    }
    if (!j["image_id"].is_string() || j["image_id"].get<std::string>().empty()) {
      throw Error(ErrorCode::kParse, where + ": image_id must be a non-empty string");
    }
    auto num = [&](const char* key) {
      const auto& v = j[key];
      if (!v.is_number()) throw Error(ErrorCode::kParse, where + ": '" + key + "' is not a number");
      return v.get<double>();
    };
    Prediction p;
    p.image_id = j["image_id"].get<std::string>();
    p.box = {num("x_min"), num("y_min"), num("x_max"), num("y_max")};
    p.score = num("score");
    if (!(p.score >= 0.0 && p.score <= 1.0)) {
      throw Error(ErrorCode::kRange, where + ": score " + format_double(p.score) + " outside [0,1]");
    }
    validate_box(p.box, where);
    out.push_back(std::move(p));
  }
  return out;
}

std::string serialize_predictions(const std::vector<Prediction>& predictions) {
  std::string out;
  for (const auto& p : predictions) {
    nlohmann::ordered_json j;
    j["image_id"] = p.image_id;
    j["x_min"] = p.box.x_min;
    j["y_min"] = p.box.y_min;
    j["x_max"] = p.box.x_max;
    j["y_max"] = p.box.y_max;
    j["score"] = p.score;
    out += j.dump();
    out += '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------

DatasetDescriptor parse_manifest(std::string_view content, const ManifestResolver& resolver) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(content);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::kParse, std::string("manifest: ") + e.what());
  }
  if (!j.is_object()) throw Error(ErrorCode::kSchema, "manifest: expected a JSON object");

  auto string_field = [](const nlohmann::json& obj, const char* key, const std::string& ctx,
                         bool required) -> std::string {
    if (!obj.contains(key)) {
      if (required) throw Error(ErrorCode::kSchema, ctx + ": missing '" + key + "'");
      return {};
    }
    if (!obj[key].is_string()) throw Error(ErrorCode::kSchema, ctx + ": '" + key + "' must be a string");
    return obj[key].get<std::string>();
  };

  DatasetDescriptor d;
  d.name = string_field(j, "name", "manifest", false);
  d.role_label = string_field(j, "role", "manifest", true);
  d.role = role_from_string(d.role_label);

  if (!j.contains("images") || !j["images"].is_array()) {
    throw Error(ErrorCode::kSchema, "manifest: 'images' must be an array");
  }
  std::set<std::string> ids;
  for (std::size_t i = 0; i < j["images"].size(); ++i) {
    const auto& e = j["images"][i];
    const std::string ctx = "manifest images[" + std::to_string(i) + "]";
    if (!e.is_object()) throw Error(ErrorCode::kSchema, ctx + ": expected an object");
    ImageMeta m;
    m.image_id = string_field(e, "id", ctx, true);
    m.path = string_field(e, "path", ctx, true);
    m.site = string_field(e, "site", ctx, false);
    if (!e.contains("gsd_cm") || !e["gsd_cm"].is_number()) {
      throw Error(ErrorCode::kSchema, ctx + ": 'gsd_cm' must be a number");
    }
    m.gsd_cm = e["gsd_cm"].get<double>();
    if (!ids.insert(m.image_id).second) {
      throw Error(ErrorCode::kUniqueness, "manifest: duplicate image_id '" + m.image_id + "'");
    }
    if (e.contains("width") && e.contains("height")) {
      if (!e["width"].is_number_integer() || !e["height"].is_number_integer()) {
        throw Error(ErrorCode::kSchema, ctx + ": width/height must be integers");
      }
      m.width = e["width"].get<int>();
      m.height = e["height"].get<int>();
    } else if (resolver.image_size) {
      std::tie(m.width, m.height) = resolver.image_size(m.path);
    }
    d.images.push_back(std::move(m));
  }

  if (j.contains("annotations")) {
    if (!j["annotations"].is_array()) throw Error(ErrorCode::kSchema, "manifest: 'annotations' must be an array");
    // Referential integrity is checked before any annotation file is touched.
    std::vector<std::pair<std::string, std::string>> bindings;
    for (std::size_t i = 0; i < j["annotations"].size(); ++i) {
      const auto& e = j["annotations"][i];
      const std::string ctx = "manifest annotations[" + std::to_string(i) + "]";
      if (!e.is_object()) throw Error(ErrorCode::kSchema, ctx + ": expected an object");
      std::string id = string_field(e, "image_id", ctx, true);
      std::string path = string_field(e, "path", ctx, true);
      if (!ids.count(id)) {
        throw Error(ErrorCode::kDanglingReference, ctx + ": unknown image_id '" + id + "'");
      }
      bindings.emplace_back(std::move(id), std::move(path));
    }
    for (auto& [id, path] : bindings) {
      if (d.annotations.count(id)) {
        throw Error(ErrorCode::kUniqueness, "manifest: image '" + id + "' has two annotation files");
      }
      if (!resolver.load_annotation) {
        throw Error(ErrorCode::kInvalidArgument, "manifest: no annotation loader supplied");
      }
      Annotation a = resolver.load_annotation(path);
      a.image_id = id;  // the manifest binding wins over the XML filename
      d.annotations.emplace(id, std::move(a));
    }
  }

  validate(d);
  return d;
}

std::string serialize_manifest(const DatasetDescriptor& d,
                               const std::vector<std::string>& annotation_paths) {
  nlohmann::ordered_json j;
  j["name"] = d.name;
  j["role"] = d.role_label.empty() ? std::string(role_to_string(d.role)) : d.role_label;
  j["images"] = nlohmann::ordered_json::array();
  j["annotations"] = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < d.images.size(); ++i) {
    const ImageMeta& m = d.images[i];
    nlohmann::ordered_json e;
    e["id"] = m.image_id;
    e["path"] = m.path;
    e["gsd_cm"] = m.gsd_cm;
    e["site"] = m.site;
    e["width"] = m.width;
    e["height"] = m.height;
    j["images"].push_back(std::move(e));
    if (i < annotation_paths.size() && !annotation_paths[i].empty()) {
      j["annotations"].push_back({{"image_id", m.image_id}, {"path", annotation_paths[i]}});
    }
  }
  return j.dump(2) + "\n";
}

ManifestResolver file_resolver(const std::filesystem::path& base_dir) {
  ManifestResolver r;
  r.load_annotation = [base_dir](const std::string& path) {
    const auto full = base_dir / path;
    try {
      return parse_voc_xml(read_file(full));
    } catch (const Error& e) {
      throw Error(e.code(), full.string() + ": " + e.what());
    }
  };
  r.image_size = [base_dir](const std::string& path) { return read_image_size(base_dir / path); };
  return r;
}

DatasetDescriptor load_manifest(const std::filesystem::path& manifest_path) {
  const auto base = manifest_path.parent_path();
  DatasetDescriptor d = parse_manifest(read_file(manifest_path), file_resolver(base));
  for (auto& m : d.images) {
    std::filesystem::path p(m.path);
    if (p.is_relative()) m.path = (base / p).lexically_normal().string();
  }
  return d;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open '" + path.string() + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot open '" + path.string() + "' for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw Error(ErrorCode::kIo, "failed writing '" + path.string() + "'");
}

}  // namespace plantres

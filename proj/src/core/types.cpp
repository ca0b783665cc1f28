#include "plantres/types.hpp"

#include <array>
#include <cmath>
#include <set>
#include <sstream>
#include <utility>

#include "plantres/error.hpp"

namespace plantres {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid argument";
    case ErrorCode::kParse: return "parse error";
    case ErrorCode::kSchema: return "schema error";
    case ErrorCode::kInvalidBox: return "invalid box";
    case ErrorCode::kRange: return "range error";
    case ErrorCode::kUniqueness: return "uniqueness error";
    case ErrorCode::kDanglingReference: return "dangling reference";
    case ErrorCode::kUndefined: return "undefined value";
    case ErrorCode::kDegenerate: return "degenerate input";
    case ErrorCode::kSize: return "size error";
    case ErrorCode::kIo: return "i/o error";
    case ErrorCode::kConfig: return "config error";
  }
  return "unknown error";
}

bool is_valid(const BBox& b) {
  const std::array<double, 4> c{b.x_min, b.y_min, b.x_max, b.y_max};
  for (double v : c) {
    if (!std::isfinite(v) || v < 0.0) return false;
  }
  return b.x_min < b.x_max && b.y_min < b.y_max;
}

void validate_box(const BBox& b, std::string_view what) {
  if (is_valid(b)) return;
  std::ostringstream os;
  os << what << ": invalid box (" << b.x_min << ", " << b.y_min << ", "
     << b.x_max << ", " << b.y_max << ")";
  throw Error(ErrorCode::kInvalidBox, os.str());
}

namespace {

constexpr std::array<std::pair<DatasetRole, std::string_view>, 9> kRoleNames{{
    {DatasetRole::kTrainHigh, "T_h"},
    {DatasetRole::kTrainDegraded, "T_gm_h2l"},
    {DatasetRole::kTrainMixed, "T_mixed"},
    {DatasetRole::kValHigh, "V_h"},
    {DatasetRole::kValLow, "V_l"},
    {DatasetRole::kValBicubicUp, "V_bc_l2h"},
    {DatasetRole::kValSuperResolved, "V_sr_l2h"},
    {DatasetRole::kValDegraded, "V_gm_h2l"},
    {DatasetRole::kCustom, "custom"},
}};

}  // namespace

DatasetRole role_from_string(std::string_view name) {
  for (const auto& [role, text] : kRoleNames) {
    if (text == name) return role;
  }
  return DatasetRole::kCustom;
}

std::string_view role_to_string(DatasetRole role) {
  for (const auto& [r, text] : kRoleNames) {
    if (r == role) return text;
  }
  return "custom";
}

const ImageMeta* DatasetDescriptor::find_image(std::string_view image_id) const {
  for (const auto& m : images) {
    if (m.image_id == image_id) return &m;
  }
  return nullptr;
}

Annotation DatasetDescriptor::annotation_for(const std::string& image_id) const {
  auto it = annotations.find(image_id);
  if (it != annotations.end()) return it->second;
  return Annotation{image_id, {}};
}

void validate(const DatasetDescriptor& d) {
  std::set<std::string> ids;
  for (const auto& m : d.images) {
    if (m.image_id.empty()) {
      throw Error(ErrorCode::kSchema, "image with empty id");
    }
    if (!ids.insert(m.image_id).second) {
      throw Error(ErrorCode::kUniqueness, "duplicate image_id '" + m.image_id + "'");
    }
    if (m.width < 1 || m.height < 1) {
      throw Error(ErrorCode::kSchema, "image '" + m.image_id + "' has non-positive size");
    }
    if (!(m.gsd_cm > 0.0) || !std::isfinite(m.gsd_cm)) {
      throw Error(ErrorCode::kRange, "image '" + m.image_id + "' has gsd_cm <= 0");
    }
  }
  for (const auto& [id, ann] : d.annotations) {
    if (!ids.count(id)) {
      throw Error(ErrorCode::kDanglingReference,
                  "annotation references unknown image_id '" + id + "'");
    }
    for (std::size_t i = 0; i < ann.boxes.size(); ++i) {
      validate_box(ann.boxes[i], "image '" + id + "' box " + std::to_string(i));
    }
  }
}

}  // namespace plantres

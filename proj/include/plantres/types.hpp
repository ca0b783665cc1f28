#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace plantres {

// Continuous pixel coordinates, origin at the top-left corner of the image,
// x to the right and y down. A pixel (i, j) covers [i, i+1) x [j, j+1).
struct BBox {
  double x_min = 0.0;
  double y_min = 0.0;
  double x_max = 0.0;
  double y_max = 0.0;

  double width() const { return x_max - x_min; }
  double height() const { return y_max - y_min; }

  bool operator==(const BBox&) const = default;
};

// Finite, non-negative, strictly positive area.
bool is_valid(const BBox& b);

// Throws Error(kInvalidBox) naming `what` when the box is invalid.
void validate_box(const BBox& b, std::string_view what);

struct Annotation {
  std::string image_id;
  std::vector<BBox> boxes;

  bool operator==(const Annotation&) const = default;
};

struct Prediction {
  std::string image_id;
  BBox box;
  double score = 0.0;

  bool operator==(const Prediction&) const = default;
};

struct ImageMeta {
  std::string image_id;
  std::string path;
  int width = 0;
  int height = 0;
  double gsd_cm = 0.0;
  std::string site;

  bool operator==(const ImageMeta&) const = default;
};

enum class DatasetRole {
  kTrainHigh,          // T_h
  kTrainDegraded,      // T_gm_h2l
  kTrainMixed,         // T_mixed
  kValHigh,            // V_h
  kValLow,             // V_l
  kValBicubicUp,       // V_bc_l2h
  kValSuperResolved,   // V_sr_l2h
  kValDegraded,        // V_gm_h2l
  kCustom,
};

// Unknown names map to kCustom.
DatasetRole role_from_string(std::string_view name);
std::string_view role_to_string(DatasetRole role);

struct DatasetDescriptor {
  std::string name;
  DatasetRole role = DatasetRole::kCustom;
  // Role as written in the manifest; identical to role_to_string(role)
  // except for custom roles, whose free-form name is kept here.
  std::string role_label;
  std::vector<ImageMeta> images;
  std::map<std::string, Annotation> annotations;

  const ImageMeta* find_image(std::string_view image_id) const;
  // Ground truth for an image; empty annotation when none is bound.
  Annotation annotation_for(const std::string& image_id) const;
};

// Checks unique image ids, ImageMeta invariants, annotation references, and
// box validity. Throws the matching Error.
void validate(const DatasetDescriptor& d);

}  // namespace plantres

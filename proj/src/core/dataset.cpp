#include "plantres/dataset.hpp"

#include "plantres/annotations.hpp"
#include "plantres/error.hpp"
#include "plantres/image_io.hpp"
#include "plantres/parallel.hpp"

namespace plantres {

Dataset load_dataset(const std::filesystem::path& manifest_path, int workers) {
  Dataset ds;
  ds.descriptor = load_manifest(manifest_path);
  ds.images.resize(ds.descriptor.images.size());
  parallel_for(ds.images.size(), workers, [&](std::size_t i) {
    const ImageMeta& m = ds.descriptor.images[i];
    ds.images[i] = read_image(m.path);
    if (ds.images[i].width() != m.width || ds.images[i].height() != m.height) {
      throw Error(ErrorCode::kSchema, "image '" + m.image_id + "' is " +
                                          std::to_string(ds.images[i].width()) + "x" +
                                          std::to_string(ds.images[i].height()) +
                                          " but the manifest declares " + std::to_string(m.width) +
                                          "x" + std::to_string(m.height));
    }
  });
  return ds;
}

DatasetDescriptor write_dataset(const Dataset& ds, const std::filesystem::path& dir, int workers) {
  if (ds.images.size() != ds.descriptor.images.size()) {
    throw Error(ErrorCode::kInvalidArgument, "dataset image count does not match its descriptor");
  }
  validate(ds.descriptor);
  std::filesystem::create_directories(dir / "images");
  std::filesystem::create_directories(dir / "annotations");

  DatasetDescriptor manifest_view = ds.descriptor;
  std::vector<std::string> ann_paths(ds.images.size());
  for (std::size_t i = 0; i < ds.images.size(); ++i) {
    const std::string& id = ds.descriptor.images[i].image_id;
    manifest_view.images[i].path = "images/" + id + ".png";
    if (ds.descriptor.annotations.count(id)) ann_paths[i] = "annotations/" + id + ".xml";
  }
  parallel_for(ds.images.size(), workers, [&](std::size_t i) {
    const ImageMeta& m = ds.descriptor.images[i];
    write_png(dir / manifest_view.images[i].path, ds.images[i]);
    if (!ann_paths[i].empty()) {
      write_file(dir / ann_paths[i],
                 serialize_annotation(ds.descriptor.annotations.at(m.image_id),
                                      {ds.images[i].width(), ds.images[i].height(), 3},
                                      m.image_id + ".png"));
    }
  });
  write_file(dir / "manifest.json", serialize_manifest(manifest_view, ann_paths));

  DatasetDescriptor out = ds.descriptor;
  for (std::size_t i = 0; i < out.images.size(); ++i) {
    out.images[i].path = (dir / manifest_view.images[i].path).lexically_normal().string();
  }
  return out;
}

}  // namespace plantres

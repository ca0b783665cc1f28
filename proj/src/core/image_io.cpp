#include "plantres/image_io.hpp"

#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <memory>
#include <string>

#include <jpeglib.h>
#include <png.h>

#include "plantres/error.hpp"

namespace plantres {

namespace {

enum class Format { kPng, kJpeg, kUnknown };

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using File = std::unique_ptr<std::FILE, FileCloser>;

File open_file(const std::filesystem::path& path, const char* mode) {
  File f(std::fopen(path.c_str(), mode));
  if (!f) throw Error(ErrorCode::kIo, "cannot open image '" + path.string() + "'");
  return f;
}

Format sniff(const std::filesystem::path& path) {
  File f = open_file(path, "rb");
  unsigned char sig[8] = {};
  std::size_t n = std::fread(sig, 1, sizeof(sig), f.get());
  if (n >= 8 && png_sig_cmp(sig, 0, 8) == 0) return Format::kPng;
  if (n >= 3 && sig[0] == 0xFF && sig[1] == 0xD8 && sig[2] == 0xFF) return Format::kJpeg;
  return Format::kUnknown;
}

Raster read_png(const std::filesystem::path& path) {
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.c_str())) {
    throw Error(ErrorCode::kIo, "png '" + path.string() + "': " + image.message);
  }
  image.format = PNG_FORMAT_RGB;
  std::vector<std::uint8_t> samples(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, samples.data(), 0, nullptr)) {
    std::string msg = image.message;
    png_image_free(&image);
    throw Error(ErrorCode::kIo, "png '" + path.string() + "': " + msg);
  }
  return Raster(static_cast<int>(image.width), static_cast<int>(image.height), std::move(samples));
}

struct JpegError {
  jpeg_error_mgr mgr;
  std::jmp_buf jump;
  char message[JMSG_LENGTH_MAX];
};

void jpeg_error_exit(j_common_ptr cinfo) {
  auto* err = reinterpret_cast<JpegError*>(cinfo->err);
  (*cinfo->err->format_message)(cinfo, err->message);
  std::longjmp(err->jump, 1);
}

// Decodes the header and, when `decode` is set, the pixels.
Raster read_jpeg(const std::filesystem::path& path, bool decode, int* width, int* height) {
  File f = open_file(path, "rb");
  jpeg_decompress_struct cinfo;
  JpegError err;
  cinfo.err = jpeg_std_error(&err.mgr);
  err.mgr.error_exit = jpeg_error_exit;
  std::vector<std::uint8_t> samples;
  if (setjmp(err.jump)) {
    jpeg_destroy_decompress(&cinfo);
    throw Error(ErrorCode::kIo, "jpeg '" + path.string() + "': " + err.message);
  }
  jpeg_create_decompress(&cinfo);
  jpeg_stdio_src(&cinfo, f.get());
  jpeg_read_header(&cinfo, TRUE);
  *width = static_cast<int>(cinfo.image_width);
  *height = static_cast<int>(cinfo.image_height);
  if (!decode) {
    jpeg_destroy_decompress(&cinfo);
    return {};
  }
  cinfo.out_color_space = JCS_RGB;
  jpeg_start_decompress(&cinfo);
  const std::size_t stride = static_cast<std::size_t>(cinfo.output_width) * 3;
  samples.resize(stride * cinfo.output_height);
  while (cinfo.output_scanline < cinfo.output_height) {
    JSAMPROW row = samples.data() + stride * cinfo.output_scanline;
    jpeg_read_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_decompress(&cinfo);
  jpeg_destroy_decompress(&cinfo);
  return Raster(*width, *height, std::move(samples));
}

}  // namespace

Raster read_image(const std::filesystem::path& path) {
  switch (sniff(path)) {
    case Format::kPng:
      return read_png(path);
    case Format::kJpeg: {
      int w = 0, h = 0;
      return read_jpeg(path, true, &w, &h);
    }
    case Format::kUnknown:
      break;
  }
  throw Error(ErrorCode::kIo, "unsupported image format: '" + path.string() + "'");
}

std::pair<int, int> read_image_size(const std::filesystem::path& path) {
  switch (sniff(path)) {
    case Format::kPng: {
      png_image image;
      std::memset(&image, 0, sizeof(image));
      image.version = PNG_IMAGE_VERSION;
      if (!png_image_begin_read_from_file(&image, path.c_str())) {
        throw Error(ErrorCode::kIo, "png '" + path.string() + "': " + image.message);
      }
      std::pair<int, int> size{static_cast<int>(image.width), static_cast<int>(image.height)};
      png_image_free(&image);
      return size;
    }
    case Format::kJpeg: {
      int w = 0, h = 0;
      read_jpeg(path, false, &w, &h);
      return {w, h};
    }
    case Format::kUnknown:
      break;
  }
  throw Error(ErrorCode::kIo, "unsupported image format: '" + path.string() + "'");
}

void write_png(const std::filesystem::path& path, const Raster& img) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(img.width());
  image.height = static_cast<png_uint_32>(img.height());
  image.format = PNG_FORMAT_RGB;
  if (!png_image_write_to_file(&image, path.c_str(), 0, img.samples().data(), 0, nullptr)) {
    throw Error(ErrorCode::kIo, "png write '" + path.string() + "': " + image.message);
  }
}

}  // namespace plantres

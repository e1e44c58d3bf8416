#pragma once

#include <csetjmp>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include <jpeglib.h>
#include <png.h>

#include "wheatfx/error.hpp"
#include "wheatfx/imaging.hpp"

namespace wheatfx {

namespace io_detail {

inline std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec)) {
    throw Error(ErrorCode::kFileNotFound, path.string());
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kFileNotFound, path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline bool has_png_signature(const std::vector<std::uint8_t>& bytes) {
  return bytes.size() >= 8 && png_sig_cmp(bytes.data(), 0, 8) == 0;
}

inline bool has_jpeg_signature(const std::vector<std::uint8_t>& bytes) {
  return bytes.size() >= 3 && bytes[0] == 0xFF && bytes[1] == 0xD8 && bytes[2] == 0xFF;
}

struct PngSource {
  const std::vector<std::uint8_t>* bytes;
  std::size_t offset;
};

extern "C" inline void wheatfx_png_read_buffer(png_structp png, png_bytep out, png_size_t count) {
  auto* src = static_cast<PngSource*>(png_get_io_ptr(png));
  if (src->offset + count > src->bytes->size()) {
    png_error(png, "unexpected end of data");
  }
  std::memcpy(out, src->bytes->data() + src->offset, count);
  src->offset += count;
}

extern "C" inline void wheatfx_png_warning(png_structp, png_const_charp) {}

// Decodes into `pixels`; returns false on any libpng error. Kept free of
// objects with non-trivial destructors between setjmp and longjmp.
inline bool decode_png(const std::vector<std::uint8_t>& bytes, std::vector<std::uint8_t>& pixels,
                       int& width, int& height, int& channels) {
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, wheatfx_png_warning);
  if (png == nullptr) return false;
  png_infop info = png_create_info_struct(png);
  if (info == nullptr) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    return false;
  }
  PngSource source{&bytes, 0};
  std::vector<png_bytep> rows;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    return false;
  }
  png_set_read_fn(png, &source, wheatfx_png_read_buffer);
  png_read_info(png, info);

  const png_byte color_type = png_get_color_type(png, info);
  const png_byte bit_depth = png_get_bit_depth(png, info);
  if (bit_depth == 16) png_set_scale_16(png);
  if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (bit_depth < 8) png_set_packing(png);
  png_set_strip_alpha(png);
  png_read_update_info(png, info);

  width = static_cast<int>(png_get_image_width(png, info));
  height = static_cast<int>(png_get_image_height(png, info));
  channels = static_cast<int>(png_get_channels(png, info));
  if (channels != 1 && channels != 3) {
    png_destroy_read_struct(&png, &info, nullptr);
    return false;
  }
  const std::size_t stride = png_get_rowbytes(png, info);
  pixels.resize(stride * static_cast<std::size_t>(height));
  rows.resize(static_cast<std::size_t>(height));
  for (int y = 0; y < height; ++y) rows[y] = pixels.data() + stride * y;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return true;
}

struct JpegErrorManager {
  jpeg_error_mgr base;
  std::jmp_buf jump;
};

extern "C" inline void wheatfx_jpeg_error_exit(j_common_ptr cinfo) {
  auto* mgr = reinterpret_cast<JpegErrorManager*>(cinfo->err);
  std::longjmp(mgr->jump, 1);
}

extern "C" inline void wheatfx_jpeg_message(j_common_ptr) {}

inline bool decode_jpeg(const std::vector<std::uint8_t>& bytes, std::vector<std::uint8_t>& pixels,
                        int& width, int& height, int& channels) {
  jpeg_decompress_struct cinfo{};
  JpegErrorManager err{};
  cinfo.err = jpeg_std_error(&err.base);
  err.base.error_exit = wheatfx_jpeg_error_exit;
  err.base.output_message = wheatfx_jpeg_message;
  if (setjmp(err.jump)) {
    jpeg_destroy_decompress(&cinfo);
    return false;
  }
  jpeg_create_decompress(&cinfo);
  jpeg_mem_src(&cinfo, bytes.data(), static_cast<unsigned long>(bytes.size()));
  jpeg_read_header(&cinfo, TRUE);
  cinfo.out_color_space = cinfo.num_components == 1 ? JCS_GRAYSCALE : JCS_RGB;
  jpeg_start_decompress(&cinfo);
  width = static_cast<int>(cinfo.output_width);
  height = static_cast<int>(cinfo.output_height);
  channels = cinfo.output_components;
  const std::size_t stride = static_cast<std::size_t>(width) * channels;
  pixels.resize(stride * static_cast<std::size_t>(height));
  while (cinfo.output_scanline < cinfo.output_height) {
    JSAMPROW row = pixels.data() + stride * cinfo.output_scanline;
    jpeg_read_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_decompress(&cinfo);
  // Truncated streams decode with warnings (padding the missing rows); treat
  // them as corrupt.
  const bool clean = err.base.num_warnings == 0;
  jpeg_destroy_decompress(&cinfo);
  return clean;
}

}  // namespace io_detail

/// Loads an 8-bit (or 16-bit, rescaled) PNG or a baseline/progressive JPEG.
/// Format is detected from the file signature, not the extension.
[[nodiscard]] inline RasterImage load_image(const std::filesystem::path& path) {
  const auto bytes = io_detail::read_file(path);
  std::vector<std::uint8_t> pixels;
  int width = 0;
  int height = 0;
  int channels = 0;
  bool ok = false;
  if (io_detail::has_png_signature(bytes)) {
    ok = io_detail::decode_png(bytes, pixels, width, height, channels);
  } else if (io_detail::has_jpeg_signature(bytes)) {
    ok = io_detail::decode_jpeg(bytes, pixels, width, height, channels);
  } else {
    throw Error(ErrorCode::kUnsupportedFormat, path.string());
  }
  if (!ok || width <= 0 || height <= 0) throw Error(ErrorCode::kCorruptImage, path.string());
  return RasterImage(width, height, channels == 1 ? ChannelOrder::kGray : ChannelOrder::kRgb,
                     std::move(pixels));
}

namespace io_detail {

inline void write_png(const std::filesystem::path& path, int width, int height, bool color,
                      const std::uint8_t* data) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(width);
  image.height = static_cast<png_uint_32>(height);
  image.format = color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  if (png_image_write_to_file(&image, path.string().c_str(), 0, data, 0, nullptr) == 0) {
    const std::string message = image.message;
    png_image_free(&image);
    throw Error(ErrorCode::kIo, path.string() + ": " + message);
  }
}

}  // namespace io_detail

inline void save_png(const std::filesystem::path& path, const GrayImage& img) {
  io_detail::write_png(path, img.width(), img.height(), false, img.samples().data());
}

/// Writes RGB order regardless of the raster's channel order.
inline void save_png(const std::filesystem::path& path, const RasterImage& img) {
  if (img.channel_order() == ChannelOrder::kGray) {
    io_detail::write_png(path, img.width(), img.height(), false, img.samples().data());
    return;
  }
  std::vector<std::uint8_t> rgb(img.samples().begin(), img.samples().end());
  if (img.channel_order() == ChannelOrder::kBgr) {
    for (std::size_t i = 0; i + 2 < rgb.size(); i += 3) std::swap(rgb[i], rgb[i + 2]);
  }
  io_detail::write_png(path, img.width(), img.height(), true, rgb.data());
}

inline void save_jpeg(const std::filesystem::path& path, const GrayImage& img, int quality = 95) {
  std::FILE* file = std::fopen(path.string().c_str(), "wb");
  if (file == nullptr) throw Error(ErrorCode::kIo, path.string());
  jpeg_compress_struct cinfo{};
  jpeg_error_mgr err{};
  cinfo.err = jpeg_std_error(&err);
  jpeg_create_compress(&cinfo);
  jpeg_stdio_dest(&cinfo, file);
  cinfo.image_width = static_cast<JDIMENSION>(img.width());
  cinfo.image_height = static_cast<JDIMENSION>(img.height());
  cinfo.input_components = 1;
  cinfo.in_color_space = JCS_GRAYSCALE;
  jpeg_set_defaults(&cinfo);
  jpeg_set_quality(&cinfo, quality, TRUE);
  jpeg_start_compress(&cinfo, TRUE);
  while (cinfo.next_scanline < cinfo.image_height) {
    auto* row = const_cast<JSAMPLE*>(img.samples().data() +
                                     static_cast<std::size_t>(cinfo.next_scanline) * img.width());
    jpeg_write_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_compress(&cinfo);
  jpeg_destroy_compress(&cinfo);
  std::fclose(file);
}

}  // namespace wheatfx

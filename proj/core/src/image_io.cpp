#include "gspose/image_io.hpp"

#include <png.h>

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <stdexcept>

namespace gspose {
namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

}  // namespace

Image load_png(const std::string& path) {
  FilePtr fp(std::fopen(path.c_str(), "rb"));
  if (!fp) throw std::runtime_error("cannot open " + path);

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw std::runtime_error("png init failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw std::runtime_error("png init failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw std::runtime_error("malformed PNG: " + path);
  }

  png_init_io(png, fp.get());
  png_read_info(png, info);

  // normalize any input to 8-bit RGB
  png_set_strip_16(png);
  png_set_packing(png);
  if (png_get_color_type(png, info) == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (png_get_color_type(png, info) == PNG_COLOR_TYPE_GRAY &&
      png_get_bit_depth(png, info) < 8)
    png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  png_set_strip_alpha(png);
  if (png_get_color_type(png, info) == PNG_COLOR_TYPE_GRAY ||
      png_get_color_type(png, info) == PNG_COLOR_TYPE_GRAY_ALPHA)
    png_set_gray_to_rgb(png);
  png_read_update_info(png, info);

  const int w = static_cast<int>(png_get_image_width(png, info));
  const int h = static_cast<int>(png_get_image_height(png, info));
  const std::size_t rowbytes = png_get_rowbytes(png, info);
  if (rowbytes != static_cast<std::size_t>(w) * 3) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw std::runtime_error("unexpected PNG row size");
  }

  std::vector<std::uint8_t> raw(static_cast<std::size_t>(h) * rowbytes);
  std::vector<png_bytep> rows(h);
  for (int y = 0; y < h; ++y) rows[y] = raw.data() + static_cast<std::size_t>(y) * rowbytes;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  Image img(h, w, 3);
  for (std::size_t i = 0; i < raw.size(); ++i) img.data[i] = raw[i] / 255.0;
  return img;
}

void save_png(const Image& image, const std::string& path) {
  if (image.channels != 1 && image.channels != 3)
    throw std::invalid_argument("save_png: 1 or 3 channels required");
  FilePtr fp(std::fopen(path.c_str(), "wb"));
  if (!fp) throw std::runtime_error("cannot write " + path);

  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw std::runtime_error("png init failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw std::runtime_error("png init failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw std::runtime_error("I/O error writing " + path);
  }

  png_init_io(png, fp.get());
  png_set_IHDR(png, info, image.width, image.height, 8,
               image.channels == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);

  std::vector<std::uint8_t> row(static_cast<std::size_t>(image.width) * image.channels);
  for (int y = 0; y < image.height; ++y) {
    for (int x = 0; x < image.width; ++x)
      for (int c = 0; c < image.channels; ++c) {
        const double v = std::min(1.0, std::max(0.0, image.at(y, x, c)));
        row[static_cast<std::size_t>(x) * image.channels + c] =
            static_cast<std::uint8_t>(std::lround(v * 255.0));
      }
    png_write_row(png, row.data());
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

BinaryMask load_mask_png(const std::string& path) {
  const Image img = load_png(path);
  BinaryMask m(img.height, img.width);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x)
      m.at(y, x) = img.at(y, x, 0) >= 128.0 / 255.0 ? 1 : 0;
  return m;
}

void save_mask_png(const BinaryMask& mask, const std::string& path) {
  Image img(mask.height, mask.width, 1);
  for (std::size_t i = 0; i < mask.grid.size(); ++i) img.data[i] = mask.grid[i] ? 1.0 : 0.0;
  save_png(img, path);
}

void save_float_pfm(const Image& image, const std::string& path) {
  if (image.channels != 1) throw std::invalid_argument("save_float_pfm: 1 channel required");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  // negative scale marks little-endian; rows written top-down
  out << "Pf\n" << image.width << " " << image.height << "\n-1.0\n";
  std::vector<float> row(image.width);
  for (int y = 0; y < image.height; ++y) {
    for (int x = 0; x < image.width; ++x) row[x] = static_cast<float>(image.at(y, x, 0));
    out.write(reinterpret_cast<const char*>(row.data()),
              static_cast<std::streamsize>(row.size() * sizeof(float)));
  }
  if (!out) throw std::runtime_error("I/O error writing " + path);
}

std::vector<std::vector<double>> load_f32_matrix(const std::string& path, int dim) {
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  if (!in) throw std::runtime_error("cannot open " + path);
  const std::streamsize bytes = in.tellg();
  in.seekg(0);
  const std::size_t per_row = static_cast<std::size_t>(dim) * sizeof(float);
  if (bytes < 0 || static_cast<std::size_t>(bytes) % per_row != 0)
    throw std::runtime_error("embedding shape mismatch");
  const std::size_t n = static_cast<std::size_t>(bytes) / per_row;

  std::vector<std::vector<double>> rows(n, std::vector<double>(dim));
  std::vector<float> buf(dim);
  for (std::size_t i = 0; i < n; ++i) {
    in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(per_row));
    if (!in) throw std::runtime_error("embedding shape mismatch");
    for (int j = 0; j < dim; ++j) rows[i][j] = buf[j];
  }
  return rows;
}

void save_f32_matrix(const std::vector<std::vector<double>>& rows, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  for (const auto& r : rows) {
    std::vector<float> buf(r.size());
    for (std::size_t j = 0; j < r.size(); ++j) buf[j] = static_cast<float>(r[j]);
    out.write(reinterpret_cast<const char*>(buf.data()),
              static_cast<std::streamsize>(buf.size() * sizeof(float)));
  }
  if (!out) throw std::runtime_error("I/O error writing " + path);
}

}  // namespace gspose

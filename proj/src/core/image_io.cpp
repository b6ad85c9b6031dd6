// SPDX-License-Identifier: Apache-2.0
#include "pnprl/core/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace pnprl {

namespace {

double clamp01(double v) { return std::min(1.0, std::max(0.0, v)); }

Tensor load_pgm(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("load_gray: cannot open " + path);
  std::string magic;
  f >> magic;
  if (magic != "P2" && magic != "P5")
    throw std::runtime_error("load_gray: unsupported PGM magic " + magic);
  auto next_int = [&f]() {
    // skip whitespace and '#' comment lines
    for (;;) {
      int c = f.peek();
      if (c == '#') {
        std::string line;
        std::getline(f, line);
      } else if (std::isspace(c)) {
        f.get();
      } else {
        break;
      }
    }
    long v = 0;
    f >> v;
    return v;
  };
  const int w = static_cast<int>(next_int());
  const int h = static_cast<int>(next_int());
  const long maxval = next_int();
  if (w <= 0 || h <= 0 || maxval <= 0 || maxval > 65535)
    throw std::runtime_error("load_gray: bad PGM header in " + path);
  Tensor img({h, w});
  if (magic == "P2") {
    for (std::size_t i = 0; i < img.numel(); ++i)
      img[i] = static_cast<double>(next_int()) / maxval;
  } else {
    f.get();  // single whitespace after maxval
    const int bytes = maxval > 255 ? 2 : 1;
    std::vector<unsigned char> raw(img.numel() * bytes);
    f.read(reinterpret_cast<char*>(raw.data()),
           static_cast<std::streamsize>(raw.size()));
    if (!f) throw std::runtime_error("load_gray: truncated PGM " + path);
    for (std::size_t i = 0; i < img.numel(); ++i) {
      const unsigned v = bytes == 1
                             ? raw[i]
                             : (static_cast<unsigned>(raw[2 * i]) << 8 | raw[2 * i + 1]);
      img[i] = static_cast<double>(v) / maxval;
    }
  }
  return img;
}

Tensor load_png_file(const std::string& path) {
  FILE* fp = std::fopen(path.c_str(), "rb");
  if (!fp) throw std::runtime_error("load_gray: cannot open " + path);
  png_structp png =
      png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png_create_info_struct(png);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    std::fclose(fp);
    throw std::runtime_error("load_gray: libpng failure on " + path);
  }
  png_init_io(png, fp);
  png_read_info(png, info);
  const int w = static_cast<int>(png_get_image_width(png, info));
  const int h = static_cast<int>(png_get_image_height(png, info));
  const int ctype = png_get_color_type(png, info);
  const int depth = png_get_bit_depth(png, info);

  if (ctype == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (ctype == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  png_set_strip_alpha(png);
  if (depth == 16) png_set_swap(png);  // to little-endian u16
  png_read_update_info(png, info);

  const int channels = png_get_channels(png, info);
  const int outdepth = png_get_bit_depth(png, info);
  const std::size_t rowbytes = png_get_rowbytes(png, info);
  std::vector<unsigned char> data(rowbytes * h);
  std::vector<png_bytep> rows(h);
  for (int i = 0; i < h; ++i) rows[i] = data.data() + rowbytes * i;
  png_read_image(png, rows.data());
  png_destroy_read_struct(&png, &info, nullptr);
  std::fclose(fp);

  Tensor img({h, w});
  const double maxv = outdepth == 16 ? 65535.0 : 255.0;
  for (int i = 0; i < h; ++i) {
    for (int j = 0; j < w; ++j) {
      double px = 0.0;
      if (channels >= 3) {
        double rgb[3];
        for (int c = 0; c < 3; ++c) {
          const std::size_t idx = (static_cast<std::size_t>(i) * w + j) * channels + c;
          rgb[c] = outdepth == 16
                       ? reinterpret_cast<const std::uint16_t*>(data.data())[idx]
                       : data[idx];
        }
        px = 0.299 * rgb[0] + 0.587 * rgb[1] + 0.114 * rgb[2];
      } else {
        const std::size_t idx = (static_cast<std::size_t>(i) * w + j) * channels;
        px = outdepth == 16
                 ? reinterpret_cast<const std::uint16_t*>(data.data())[idx]
                 : data[idx];
      }
      img.at(i, j) = px / maxv;
    }
  }
  return img;
}

}  // namespace

Tensor load_gray(const std::string& path) {
  const auto dot = path.rfind('.');
  std::string ext = dot == std::string::npos ? "" : path.substr(dot + 1);
  std::transform(ext.begin(), ext.end(), ext.begin(), ::tolower);
  if (ext == "pgm" || ext == "pnm") return load_pgm(path);
  if (ext == "png") return load_png_file(path);
  throw std::runtime_error("load_gray: unsupported extension ." + ext);
}

void save_pgm(const std::string& path, const Tensor& img) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("save_pgm: cannot open " + path);
  f << "P5\n" << img.dim(1) << " " << img.dim(0) << "\n255\n";
  for (std::size_t i = 0; i < img.numel(); ++i)
    f.put(static_cast<char>(std::lround(clamp01(img[i]) * 255.0)));
}

void save_pgm16(const std::string& path, const Tensor& img) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("save_pgm16: cannot open " + path);
  f << "P5\n" << img.dim(1) << " " << img.dim(0) << "\n65535\n";
  for (std::size_t i = 0; i < img.numel(); ++i) {
    const unsigned v = static_cast<unsigned>(std::lround(clamp01(img[i]) * 65535.0));
    f.put(static_cast<char>(v >> 8));
    f.put(static_cast<char>(v & 0xff));
  }
}

void save_png(const std::string& path, const Tensor& img) {
  FILE* fp = std::fopen(path.c_str(), "wb");
  if (!fp) throw std::runtime_error("save_png: cannot open " + path);
  png_structp png =
      png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png_create_info_struct(png);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    std::fclose(fp);
    throw std::runtime_error("save_png: libpng failure on " + path);
  }
  png_init_io(png, fp);
  const int h = img.dim(0), w = img.dim(1);
  png_set_IHDR(png, info, w, h, 8, PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  std::vector<unsigned char> row(static_cast<std::size_t>(w));
  for (int i = 0; i < h; ++i) {
    for (int j = 0; j < w; ++j)
      row[j] = static_cast<unsigned char>(std::lround(clamp01(img.at(i, j)) * 255.0));
    png_write_row(png, row.data());
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  std::fclose(fp);
}

Tensor resize_bilinear(const Tensor& img, int oh, int ow) {
  const int h = img.dim(0), w = img.dim(1);
  Tensor out({oh, ow});
  for (int i = 0; i < oh; ++i) {
    const double fy = oh == 1 ? 0.0 : static_cast<double>(i) * (h - 1) / (oh - 1);
    const int y0 = static_cast<int>(fy);
    const int y1 = std::min(y0 + 1, h - 1);
    const double wy = fy - y0;
    for (int j = 0; j < ow; ++j) {
      const double fx = ow == 1 ? 0.0 : static_cast<double>(j) * (w - 1) / (ow - 1);
      const int x0 = static_cast<int>(fx);
      const int x1 = std::min(x0 + 1, w - 1);
      const double wx = fx - x0;
      out.at(i, j) = (1 - wy) * ((1 - wx) * img.at(y0, x0) + wx * img.at(y0, x1)) +
                     wy * ((1 - wx) * img.at(y1, x0) + wx * img.at(y1, x1));
    }
  }
  return out;
}

Tensor center_crop(const Tensor& img, int oh, int ow) {
  const int h = img.dim(0), w = img.dim(1);
  if (oh > h || ow > w)
    throw std::invalid_argument("center_crop: crop larger than image");
  const int i0 = (h - oh) / 2, j0 = (w - ow) / 2;
  Tensor out({oh, ow});
  for (int i = 0; i < oh; ++i)
    for (int j = 0; j < ow; ++j) out.at(i, j) = img.at(i0 + i, j0 + j);
  return out;
}

}  // namespace pnprl

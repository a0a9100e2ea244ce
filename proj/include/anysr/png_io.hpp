// png_io.hpp : PNG load/save for planar float images (the only on-disk format)
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "anysr/common.hpp"
#include "anysr/image.hpp"

namespace anysr {

// Sorted .png filenames (case-insensitive extension) in a directory.
inline std::vector<std::string> list_png_files(const std::string& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir))
    throw IoError(IoErrorKind::kMissingFile, dir + " is not a readable directory");
  std::vector<std::string> names;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    std::string ext = e.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (ext == ".png") names.push_back(e.path().filename().string());
  }
  std::sort(names.begin(), names.end());
  return names;
}

namespace detail {

struct FileCloser {
  std::FILE* f;
  ~FileCloser() {
    if (f) std::fclose(f);
  }
};

struct PngReadGuard {
  png_structp png = nullptr;
  png_infop info = nullptr;
  ~PngReadGuard() {
    if (png) png_destroy_read_struct(&png, info ? &info : nullptr, nullptr);
  }
};

struct PngWriteGuard {
  png_structp png = nullptr;
  png_infop info = nullptr;
  ~PngWriteGuard() {
    if (png) png_destroy_write_struct(&png, info ? &info : nullptr);
  }
};

}  // namespace detail

// Loads an 8- or 16-bit PNG (gray or RGB; palettes expanded, alpha stripped)
// as a 3-channel float image with values v/255 or v/65535.
inline Image load_image(const std::string& path) {
  std::FILE* fp = std::fopen(path.c_str(), "rb");
  if (!fp) throw IoError(IoErrorKind::kMissingFile, "cannot open " + path);
  detail::FileCloser closer{fp};

  unsigned char sig[8];
  if (std::fread(sig, 1, 8, fp) != 8 || png_sig_cmp(sig, 0, 8) != 0)
    throw IoError(IoErrorKind::kUnsupportedFormat, path + " is not a PNG file");

  detail::PngReadGuard g;
  g.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!g.png) throw IoError(IoErrorKind::kCorruptData, "libpng init failed");
  g.info = png_create_info_struct(g.png);
  if (!g.info) throw IoError(IoErrorKind::kCorruptData, "libpng init failed");

  std::vector<unsigned char> raw;
  std::vector<png_bytep> rows;
  png_uint_32 w = 0, h = 0;
  int depth = 0, channels = 0;

  if (setjmp(png_jmpbuf(g.png)))
    throw IoError(IoErrorKind::kCorruptData, path + ": corrupt PNG data");

  png_init_io(g.png, fp);
  png_set_sig_bytes(g.png, 8);
  png_read_info(g.png, g.info);

  int color_type = png_get_color_type(g.png, g.info);
  depth = png_get_bit_depth(g.png, g.info);
  if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(g.png);
  if (color_type == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(g.png);
  if (png_get_valid(g.png, g.info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(g.png);
  if (color_type & PNG_COLOR_MASK_ALPHA || png_get_valid(g.png, g.info, PNG_INFO_tRNS))
    png_set_strip_alpha(g.png);
  png_set_interlace_handling(g.png);
  png_read_update_info(g.png, g.info);

  w = png_get_image_width(g.png, g.info);
  h = png_get_image_height(g.png, g.info);
  depth = png_get_bit_depth(g.png, g.info);
  channels = png_get_channels(g.png, g.info);
  if ((depth != 8 && depth != 16) || (channels != 1 && channels != 3))
    throw IoError(IoErrorKind::kUnsupportedFormat,
                  path + ": unsupported PNG layout (need 8/16-bit gray or RGB)");

  const std::size_t rowbytes = png_get_rowbytes(g.png, g.info);
  raw.resize(rowbytes * h);
  rows.resize(h);
  for (png_uint_32 y = 0; y < h; ++y) rows[y] = raw.data() + y * rowbytes;
  png_read_image(g.png, rows.data());
  png_read_end(g.png, nullptr);

  Image out(3, static_cast<int>(h), static_cast<int>(w));
  const float norm = depth == 8 ? 1.0f / 255.0f : 1.0f / 65535.0f;
  for (png_uint_32 y = 0; y < h; ++y) {
    const unsigned char* row = raw.data() + y * rowbytes;
    for (png_uint_32 x = 0; x < w; ++x) {
      for (int c = 0; c < 3; ++c) {
        const int src_c = channels == 1 ? 0 : c;
        unsigned v;
        if (depth == 8) {
          v = row[x * channels + src_c];
        } else {  // 16-bit PNG samples are big-endian
          const unsigned char* p = row + 2 * (x * channels + src_c);
          v = (static_cast<unsigned>(p[0]) << 8) | p[1];
        }
        out.at(c, static_cast<int>(y), static_cast<int>(x)) = static_cast<float>(v) * norm;
      }
    }
  }
  return out;
}

inline unsigned char quantize_u8(float v) {
  float c = v < 0.0f ? 0.0f : (v > 1.0f ? 1.0f : v);
  return static_cast<unsigned char>(std::floor(c * 255.0f + 0.5f));
}

// Saves as 8-bit PNG (gray for 1 channel, RGB for 3). Values are clamped to
// [0,1] and quantized round-half-up.
inline void save_image(const Image& img, const std::string& path) {
  if (img.channels() != 1 && img.channels() != 3)
    throw InvalidArgument("save_image: image must have 1 or 3 channels");

  std::FILE* fp = std::fopen(path.c_str(), "wb");
  if (!fp) throw IoError(IoErrorKind::kWriteFailed, "cannot write " + path);
  detail::FileCloser closer{fp};

  detail::PngWriteGuard g;
  g.png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!g.png) throw IoError(IoErrorKind::kWriteFailed, "libpng init failed");
  g.info = png_create_info_struct(g.png);
  if (!g.info) throw IoError(IoErrorKind::kWriteFailed, "libpng init failed");

  const int h = img.height(), w = img.width(), ch = img.channels();
  std::vector<unsigned char> raw(static_cast<std::size_t>(h) * w * ch);
  std::vector<png_bytep> rows(h);
  for (int y = 0; y < h; ++y) rows[y] = raw.data() + static_cast<std::size_t>(y) * w * ch;
  for (int c = 0; c < ch; ++c)
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x)
        raw[(static_cast<std::size_t>(y) * w + x) * ch + c] = quantize_u8(img.at(c, y, x));

  if (setjmp(png_jmpbuf(g.png)))
    throw IoError(IoErrorKind::kWriteFailed, path + ": PNG write failed");

  png_init_io(g.png, fp);
  png_set_IHDR(g.png, g.info, w, h, 8,
               ch == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(g.png, g.info);
  png_write_image(g.png, rows.data());
  png_write_end(g.png, nullptr);
}

}  // namespace anysr

// Copyright 2026 The bosal Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "bosal/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace bosal {

namespace {

std::uint8_t to_byte(double v) {
  const double clamped = std::clamp(v, 0.0, 1.0);
  return static_cast<std::uint8_t>(std::lround(clamped * 255.0));
}

std::string lower_extension(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return ext;
}

std::vector<std::uint8_t> quantize(const Image& image) {
  std::vector<std::uint8_t> bytes(image.size());
  const auto& data = image.data();
  for (std::size_t i = 0; i < data.size(); ++i) {
    bytes[i] = to_byte(data[i]);
  }
  return bytes;
}

Image from_bytes(int width, int height, int channels,
                 const std::vector<std::uint8_t>& bytes) {
  std::vector<double> data(bytes.size());
  for (std::size_t i = 0; i < bytes.size(); ++i) {
    data[i] = bytes[i] / 255.0;
  }
  return Image(width, height, channels, std::move(data));
}

// ---- PNM (P5 grayscale / P6 RGB, 8-bit binary) ----

void skip_pnm_whitespace(std::istream& in) {
  for (;;) {
    const int c = in.peek();
    if (c == '#') {
      std::string comment;
      std::getline(in, comment);
    } else if (std::isspace(c)) {
      in.get();
    } else {
      return;
    }
  }
}

int read_pnm_int(std::istream& in) {
  skip_pnm_whitespace(in);
  int value = 0;
  if (!(in >> value)) {
    throw IoError("malformed PNM header");
  }
  return value;
}

Image load_pnm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open " + path.string());
  }
  std::array<char, 2> magic{};
  in.read(magic.data(), 2);
  const bool gray = magic[0] == 'P' && magic[1] == '5';
  const bool rgb = magic[0] == 'P' && magic[1] == '6';
  if (!gray && !rgb) {
    throw IoError("unsupported PNM magic in " + path.string());
  }
  const int width = read_pnm_int(in);
  const int height = read_pnm_int(in);
  const int maxval = read_pnm_int(in);
  if (maxval != 255) {
    throw IoError("only 8-bit PNM supported, maxval=" +
                  std::to_string(maxval));
  }
  in.get();  // single whitespace byte after the header
  const int channels = gray ? 1 : 3;
  std::vector<std::uint8_t> bytes(static_cast<std::size_t>(width) * height *
                                  channels);
  in.read(reinterpret_cast<char*>(bytes.data()),
          static_cast<std::streamsize>(bytes.size()));
  if (in.gcount() != static_cast<std::streamsize>(bytes.size())) {
    throw IoError("truncated PNM payload in " + path.string());
  }
  return from_bytes(width, height, channels, bytes);
}

void save_pnm(const Image& image, const std::filesystem::path& path,
              bool force_gray) {
  if (force_gray && image.channels() != 1) {
    throw IoError("PGM holds single-channel images only");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw IoError("cannot write " + path.string());
  }
  out << (image.channels() == 1 ? "P5" : "P6") << '\n'
      << image.width() << ' ' << image.height() << '\n'
      << "255\n";
  const auto bytes = quantize(image);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) {
    throw IoError("failed writing " + path.string());
  }
}

// ---- PNG via libpng's simplified API ----

Image load_png(const std::filesystem::path& path) {
  png_image png{};
  png.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&png, path.string().c_str())) {
    throw IoError("libpng: " + std::string(png.message));
  }
  const bool color = (png.format & PNG_FORMAT_FLAG_COLOR) != 0 ||
                     (png.format & PNG_FORMAT_FLAG_COLORMAP) != 0;
  png.format = color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  const int channels = color ? 3 : 1;
  std::vector<std::uint8_t> bytes(PNG_IMAGE_SIZE(png));
  if (!png_image_finish_read(&png, nullptr, bytes.data(), 0, nullptr)) {
    throw IoError("libpng: " + std::string(png.message));
  }
  return from_bytes(static_cast<int>(png.width), static_cast<int>(png.height),
                    channels, bytes);
}

void save_png(const Image& image, const std::filesystem::path& path) {
  png_image png{};
  png.version = PNG_IMAGE_VERSION;
  png.width = static_cast<png_uint_32>(image.width());
  png.height = static_cast<png_uint_32>(image.height());
  png.format = image.channels() == 1 ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;
  const auto bytes = quantize(image);
  if (!png_image_write_to_file(&png, path.string().c_str(), 0, bytes.data(),
                               0, nullptr)) {
    throw IoError("libpng: " + std::string(png.message));
  }
}

std::array<double, 3> viridis_color(double t) {
  // Compact anchor table for the familiar dark-violet-to-yellow ramp.
  static constexpr std::array<std::array<double, 3>, 9> anchors = {{
      {0.267, 0.005, 0.329},
      {0.283, 0.141, 0.458},
      {0.254, 0.265, 0.530},
      {0.207, 0.372, 0.553},
      {0.164, 0.471, 0.558},
      {0.128, 0.567, 0.551},
      {0.135, 0.659, 0.518},
      {0.478, 0.821, 0.318},
      {0.993, 0.906, 0.144},
  }};
  t = std::clamp(t, 0.0, 1.0);
  const double pos = t * (anchors.size() - 1);
  const std::size_t i0 = static_cast<std::size_t>(pos);
  const std::size_t i1 = std::min(i0 + 1, anchors.size() - 1);
  const double f = pos - i0;
  std::array<double, 3> rgb{};
  for (int c = 0; c < 3; ++c) {
    rgb[c] = (1.0 - f) * anchors[i0][c] + f * anchors[i1][c];
  }
  return rgb;
}

}  // namespace

Image load_image(const std::filesystem::path& path) {
  std::ifstream probe(path, std::ios::binary);
  if (!probe) {
    throw IoError("cannot open " + path.string());
  }
  std::array<unsigned char, 2> magic{};
  probe.read(reinterpret_cast<char*>(magic.data()), 2);
  probe.close();
  if (magic[0] == 0x89 && magic[1] == 'P') {
    return load_png(path);
  }
  if (magic[0] == 'P' && (magic[1] == '5' || magic[1] == '6')) {
    return load_pnm(path);
  }
  throw IoError("unrecognized raster format in " + path.string());
}

void save_image(const Image& image, const std::filesystem::path& path) {
  const std::string ext = lower_extension(path);
  if (ext == ".png") {
    save_png(image, path);
  } else if (ext == ".ppm") {
    save_pnm(image, path, /*force_gray=*/false);
  } else if (ext == ".pgm") {
    save_pnm(image, path, /*force_gray=*/true);
  } else {
    throw IoError("unsupported image extension: " + path.string());
  }
}

void save_heatmap(const SaliencyMap& map, const std::filesystem::path& path,
                  Colormap colormap) {
  const SaliencyMap norm = normalize_map(map);
  if (colormap == Colormap::gray) {
    std::vector<double> data(norm.values());
    save_image(Image(norm.width(), norm.height(), 1, std::move(data)), path);
    return;
  }
  Image rgb(norm.width(), norm.height(), 3);
  for (int y = 0; y < norm.height(); ++y) {
    for (int x = 0; x < norm.width(); ++x) {
      const auto color = viridis_color(norm.at(x, y));
      for (int c = 0; c < 3; ++c) {
        rgb.at(x, y, c) = color[c];
      }
    }
  }
  save_image(rgb, path);
}

void save_map_csv(const SaliencyMap& map, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) {
    throw IoError("cannot write " + path.string());
  }
  std::array<char, 64> buf{};
  for (int y = 0; y < map.height(); ++y) {
    for (int x = 0; x < map.width(); ++x) {
      const auto res =
          std::to_chars(buf.data(), buf.data() + buf.size(), map.at(x, y));
      out.write(buf.data(), res.ptr - buf.data());
      out.put(x + 1 == map.width() ? '\n' : ',');
    }
  }
  if (!out) {
    throw IoError("failed writing " + path.string());
  }
}

SaliencyMap load_map_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open " + path.string());
  }
  std::vector<double> values;
  int width = -1;
  int height = 0;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) {
      continue;
    }
    int row_width = 0;
    const char* p = line.data();
    const char* end = line.data() + line.size();
    while (p < end) {
      double v = 0.0;
      const auto res = std::from_chars(p, end, v);
      if (res.ec != std::errc{}) {
        throw IoError("malformed CSV value in " + path.string());
      }
      values.push_back(v);
      ++row_width;
      p = res.ptr;
      if (p < end && *p == ',') {
        ++p;
      }
    }
    if (width == -1) {
      width = row_width;
    } else if (width != row_width) {
      throw IoError("ragged CSV rows in " + path.string());
    }
    ++height;
  }
  if (width < 1 || height < 1) {
    throw IoError("empty CSV map in " + path.string());
  }
  return SaliencyMap(width, height, std::move(values));
}

}  // namespace bosal

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

#ifndef BOSAL_IMAGE_IO_HPP
#define BOSAL_IMAGE_IO_HPP

#include <filesystem>
#include <stdexcept>

#include "bosal/image.hpp"

namespace bosal {

class IoError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Reads an 8-bit grayscale or RGB raster (PNG, PPM or PGM, detected from the
/// file's magic bytes). Pixel values are mapped to [0, 1] as byte/255, which
/// round-trips losslessly with save_image. Throws IoError on unreadable files
/// or unsupported formats.
Image load_image(const std::filesystem::path& path);

/// Writes an image as an 8-bit raster; the format follows the extension
/// (.png, .ppm, .pgm). PGM accepts only single-channel images.
void save_image(const Image& image, const std::filesystem::path& path);

enum class Colormap { gray, viridis };

/// Normalizes the map and writes it as an 8-bit raster. The gray colormap
/// produces a single-channel raster (value 1 -> 255); viridis produces RGB.
void save_heatmap(const SaliencyMap& map, const std::filesystem::path& path,
                  Colormap colormap = Colormap::gray);

/// CSV exchange format for saliency maps: one line per image row, values
/// comma-separated, shortest round-trip decimal form (bit-exact reload).
void save_map_csv(const SaliencyMap& map, const std::filesystem::path& path);
SaliencyMap load_map_csv(const std::filesystem::path& path);

}  // namespace bosal

#endif  // BOSAL_IMAGE_IO_HPP

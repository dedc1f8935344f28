// Copyright 2026 The ProSA Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#pragma once

#include <filesystem>
#include <string>

#include <opencv2/core.hpp>

#include "prosa/raster.hpp"

namespace prosa {

/// Loads a page as 8-bit BGR. Throws prosa::Error when unreadable.
cv::Mat read_page_image(const std::filesystem::path& path);
/// Lossless PNG.
void write_png(const cv::Mat& image, const std::filesystem::path& path);

/// 1-bit PNG export of a mask (set pixels white).
void write_mask_png(const Mask& mask, const std::filesystem::path& path);
/// Any nonzero pixel is set.
Mask read_mask_png(const std::filesystem::path& path);

/// Long edge resized to at most long_edge pixels, JPEG encoded.
std::string encode_jpeg(const cv::Mat& image, int long_edge, int quality);

}  // namespace prosa

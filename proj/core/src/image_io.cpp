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
#include "prosa/image_io.hpp"

#include <algorithm>
#include <vector>

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "prosa/document.hpp"

namespace prosa {

cv::Mat read_page_image(const std::filesystem::path& path) {
  cv::Mat img = cv::imread(path.string(), cv::IMREAD_COLOR);
  if (img.empty()) throw Error("cannot read image " + path.string());
  return img;
}

void write_png(const cv::Mat& image, const std::filesystem::path& path) {
  const std::vector<int> params = {cv::IMWRITE_PNG_COMPRESSION, 3};
  if (!cv::imwrite(path.string(), image, params)) {
    throw Error("cannot write " + path.string());
  }
}

void write_mask_png(const Mask& mask, const std::filesystem::path& path) {
  cv::Mat img(mask.height(), mask.width(), CV_8UC1);
  for (int y = 0; y < mask.height(); ++y) {
    const std::uint8_t* src = mask.row(y);
    auto* dst = img.ptr<std::uint8_t>(y);
    for (int x = 0; x < mask.width(); ++x) dst[x] = src[x] ? 255 : 0;
  }
  const std::vector<int> params = {cv::IMWRITE_PNG_BILEVEL, 1};
  if (!cv::imwrite(path.string(), img, params)) {
    throw Error("cannot write " + path.string());
  }
}

Mask read_mask_png(const std::filesystem::path& path) {
  cv::Mat img = cv::imread(path.string(), cv::IMREAD_GRAYSCALE);
  if (img.empty()) throw Error("cannot read mask " + path.string());
  Mask mask(img.cols, img.rows);
  for (int y = 0; y < img.rows; ++y) {
    const auto* src = img.ptr<std::uint8_t>(y);
    std::uint8_t* dst = mask.row(y);
    for (int x = 0; x < img.cols; ++x) dst[x] = src[x] ? 1 : 0;
  }
  return mask;
}

std::string encode_jpeg(const cv::Mat& image, int long_edge, int quality) {
  cv::Mat scaled = image;
  const int edge = std::max(image.cols, image.rows);
  if (edge > long_edge && edge > 0) {
    const double f = static_cast<double>(long_edge) / edge;
    cv::resize(image, scaled, cv::Size(), f, f, cv::INTER_AREA);
  }
  std::vector<uchar> buf;
  const std::vector<int> params = {cv::IMWRITE_JPEG_QUALITY, quality};
  if (!cv::imencode(".jpg", scaled, buf, params)) throw Error("jpeg encode failed");
  return std::string(buf.begin(), buf.end());
}

}  // namespace prosa

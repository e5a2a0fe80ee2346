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

#ifndef BOSAL_SRC_SCORER_HPP
#define BOSAL_SRC_SCORER_HPP

#include <atomic>
#include <cstdint>
#include <mutex>
#include <string>
#include <unordered_map>

#include "bosal/model.hpp"

namespace bosal::detail {

// Internal scorer interface behind ModelHandle. score() centralizes the
// declared-size check, the evaluation counter and the finiteness check;
// cached_base_score() memoizes per image identity (data address).
class Scorer {
public:
  Scorer(ModelKind kind, std::string target, int width, int height)
      : kind_(kind), target_(std::move(target)), width_(width),
        height_(height) {}
  virtual ~Scorer() = default;

  ModelKind kind() const { return kind_; }
  const std::string& target() const { return target_; }
  int input_width() const { return width_; }
  int input_height() const { return height_; }
  std::uint64_t query_count() const { return queries_.load(); }

  double score(const Image& image);
  double cached_base_score(const Image& base);

protected:
  virtual double evaluate(const Image& image) = 0;

private:
  ModelKind kind_;
  std::string target_;
  int width_;
  int height_;
  std::atomic<std::uint64_t> queries_{0};
  std::mutex cache_mutex_;
  std::unordered_map<const void*, double> base_cache_;
};

std::shared_ptr<Scorer> make_subprocess_scorer(std::vector<std::string> argv,
                                               std::string target,
                                               std::chrono::seconds timeout);
std::shared_ptr<Scorer> make_http_scorer(std::string url, std::string target,
                                         std::chrono::seconds timeout);

// 8-bit wire payload shared by the subprocess and HTTP adapters: one JSON
// line with the image as base64 of round(v*255) bytes.
std::string build_request_json(std::uint64_t id, const Image& image,
                               const std::string& target);
double parse_response_json(const std::string& line, std::uint64_t expected_id);

}  // namespace bosal::detail

#endif  // BOSAL_SRC_SCORER_HPP

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

#ifndef BOSAL_MODEL_HPP
#define BOSAL_MODEL_HPP

#include <chrono>
#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "bosal/image.hpp"

namespace bosal {

/// Raised when a model query fails: adapter I/O failure, malformed response,
/// or a non-finite score. payload() carries the raw response (or transport
/// diagnostic) for debugging.
class QueryError : public std::runtime_error {
public:
  QueryError(const std::string& message, std::string payload = {})
      : std::runtime_error(message), payload_(std::move(payload)) {}
  const std::string& payload() const { return payload_; }

private:
  std::string payload_;
};

enum class ModelKind { synthetic_box, synthetic_two_box, subprocess, http };

/// One occlusion observation: base and occluded scores plus their difference
/// y = f(X) - f(X_hat).
struct ScoreDelta {
  double base_score = 0.0;
  double occluded_score = 0.0;
  double y = 0.0;
};

namespace detail {
class Scorer;
}

/// Uniform handle on a black-box scorer f. Synthetic kinds are deterministic
/// and reentrant; subprocess/HTTP adapters serialize their requests (one in
/// flight). Copies share the underlying scorer and its caches/counters.
class ModelHandle {
public:
  ModelKind kind() const;
  const std::string& target() const;

  /// Declared input size; -1 when the adapter accepts any size.
  int input_width() const;
  int input_height() const;

  /// Number of scorer evaluations issued so far (cache hits excluded).
  std::uint64_t query_count() const;

  explicit ModelHandle(std::shared_ptr<detail::Scorer> impl);

private:
  std::shared_ptr<detail::Scorer> impl_;

  friend double score(const ModelHandle&, const Image&);
  friend ScoreDelta delta(const ModelHandle&, const Image&, const Image&);
};

/// Target-class score of `image` under `model`. Deterministic for synthetic
/// kinds; external kinds return the adapter's scalar verbatim. Throws
/// QueryError on adapter failure or non-finite scores, std::invalid_argument
/// when the image does not match the model's declared input size.
double score(const ModelHandle& model, const Image& image);

/// Scores both images and forms y = f(base) - f(occluded). The base score is
/// cached per (model, image) identity (the image's data address), so a loop
/// reusing one base image pays a single base query.
ScoreDelta delta(const ModelHandle& model, const Image& base,
                 const Image& occluded);

/// Synthetic verification oracle: score = fraction of box pixels whose value
/// differs from `fill` on at least one channel (i.e. not currently blanked).
/// Clean non-fill content scores 1.0; a fully blanked box scores 0.0.
ModelHandle make_synthetic_box(int width, int height, const BoundingBox& box,
                               double fill = kDefaultFill,
                               std::string target = "box");

/// Two-region variant: score = w1 * visible_fraction(box1) +
/// w2 * visible_fraction(box2), with disjoint boxes and w1 + w2 = 1.
ModelHandle make_synthetic_two_box(int width, int height,
                                   const BoundingBox& box1, double w1,
                                   const BoundingBox& box2, double w2,
                                   double fill = kDefaultFill,
                                   std::string target = "two-box");

/// External model over line-delimited JSON on the child's stdin/stdout.
/// Request: {"id": int, "image": base64 of 8-bit row-major HxWxC bytes,
/// "width": int, "height": int, "channels": int, "target": string}.
/// Response: {"id": int, "score": float}. The child is spawned lazily on the
/// first query and terminated when the last handle copy is destroyed.
ModelHandle make_subprocess_model(std::vector<std::string> argv,
                                  std::string target,
                                  std::chrono::seconds timeout =
                                      std::chrono::seconds(30));

/// External model over HTTP: POSTs the same JSON body to `url` and expects
/// the same response schema.
ModelHandle make_http_model(std::string url, std::string target,
                            std::chrono::seconds timeout =
                                std::chrono::seconds(30));

/// Parses a CLI model spec:
///   synthetic:box:x0,y0,w,h
///   synthetic:two-box:x0,y0,w,h,w1;x0,y0,w,h,w2
///   cmd:<argv, whitespace separated>
///   url:<http URL>
/// width/height give the image dimensions synthetic kinds are bound to.
/// Throws std::invalid_argument on malformed specs.
ModelHandle parse_model_spec(const std::string& spec, int width, int height,
                             const std::string& target, double fill,
                             std::chrono::seconds timeout);

}  // namespace bosal

#endif  // BOSAL_MODEL_HPP

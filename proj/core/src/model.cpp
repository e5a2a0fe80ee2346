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

#include "bosal/model.hpp"

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "scorer.hpp"

namespace bosal {

namespace detail {

double Scorer::score(const Image& image) {
  if (input_width() > 0 &&
      (image.width() != input_width() || image.height() != input_height())) {
    throw std::invalid_argument(
        "image " + std::to_string(image.width()) + "x" +
        std::to_string(image.height()) + " does not match model input " +
        std::to_string(input_width()) + "x" + std::to_string(input_height()));
  }
  queries_.fetch_add(1);
  const double value = evaluate(image);
  if (!std::isfinite(value)) {
    throw QueryError("model returned non-finite score",
                     std::to_string(value));
  }
  return value;
}

double Scorer::cached_base_score(const Image& base) {
  const void* key = base.data().data();
  {
    std::lock_guard<std::mutex> lock(cache_mutex_);
    const auto it = base_cache_.find(key);
    if (it != base_cache_.end()) {
      return it->second;
    }
  }
  const double value = score(base);
  std::lock_guard<std::mutex> lock(cache_mutex_);
  base_cache_.emplace(key, value);
  return value;
}

namespace {

// Visible fraction of a box: pixels whose value differs from the fill on at
// least one channel, over the box area. Exact equality is the blanking test;
// callers must occlude with the same canonical fill.
double visible_fraction(const Image& image, const BoundingBox& box,
                        double fill) {
  long long visible = 0;
  for (int y = box.y0; y < box.y0 + box.h; ++y) {
    for (int x = box.x0; x < box.x0 + box.w; ++x) {
      bool blanked = true;
      for (int c = 0; c < image.channels(); ++c) {
        if (image.at(x, y, c) != fill) {
          blanked = false;
          break;
        }
      }
      if (!blanked) {
        ++visible;
      }
    }
  }
  return static_cast<double>(visible) / static_cast<double>(box.area());
}

class SyntheticBoxScorer final : public Scorer {
public:
  SyntheticBoxScorer(int width, int height, const BoundingBox& box,
                     double fill, std::string target)
      : Scorer(ModelKind::synthetic_box, std::move(target), width, height),
        box_(box), fill_(fill) {
    box.validate_within(width, height);
  }

protected:
  double evaluate(const Image& image) override {
    return visible_fraction(image, box_, fill_);
  }

private:
  BoundingBox box_;
  double fill_;
};

class SyntheticTwoBoxScorer final : public Scorer {
public:
  SyntheticTwoBoxScorer(int width, int height, const BoundingBox& box1,
                        double w1, const BoundingBox& box2, double w2,
                        double fill, std::string target)
      : Scorer(ModelKind::synthetic_two_box, std::move(target), width,
               height),
        box1_(box1), box2_(box2), w1_(w1), w2_(w2), fill_(fill) {
    box1.validate_within(width, height);
    box2.validate_within(width, height);
    const bool overlap = box1.x0 < box2.x0 + box2.w &&
                         box2.x0 < box1.x0 + box1.w &&
                         box1.y0 < box2.y0 + box2.h &&
                         box2.y0 < box1.y0 + box1.h;
    if (overlap) {
      throw std::invalid_argument("two-box regions must be disjoint");
    }
    if (w1 < 0.0 || w2 < 0.0 || std::abs(w1 + w2 - 1.0) > 1e-12) {
      throw std::invalid_argument("two-box weights must be >= 0 and sum to 1");
    }
  }

protected:
  double evaluate(const Image& image) override {
    return w1_ * visible_fraction(image, box1_, fill_) +
           w2_ * visible_fraction(image, box2_, fill_);
  }

private:
  BoundingBox box1_;
  BoundingBox box2_;
  double w1_;
  double w2_;
  double fill_;
};

}  // namespace
}  // namespace detail

ModelHandle::ModelHandle(std::shared_ptr<detail::Scorer> impl)
    : impl_(std::move(impl)) {}

ModelKind ModelHandle::kind() const { return impl_->kind(); }
const std::string& ModelHandle::target() const { return impl_->target(); }
int ModelHandle::input_width() const { return impl_->input_width(); }
int ModelHandle::input_height() const { return impl_->input_height(); }
std::uint64_t ModelHandle::query_count() const {
  return impl_->query_count();
}

double score(const ModelHandle& model, const Image& image) {
  return model.impl_->score(image);
}

ScoreDelta delta(const ModelHandle& model, const Image& base,
                 const Image& occluded) {
  if (base.width() != occluded.width() ||
      base.height() != occluded.height() ||
      base.channels() != occluded.channels()) {
    throw std::invalid_argument("base and occluded dimensions differ");
  }
  ScoreDelta d;
  d.base_score = model.impl_->cached_base_score(base);
  d.occluded_score = model.impl_->score(occluded);
  d.y = d.base_score - d.occluded_score;
  return d;
}

ModelHandle make_synthetic_box(int width, int height, const BoundingBox& box,
                               double fill, std::string target) {
  return ModelHandle(std::make_shared<detail::SyntheticBoxScorer>(
      width, height, box, fill, std::move(target)));
}

ModelHandle make_synthetic_two_box(int width, int height,
                                   const BoundingBox& box1, double w1,
                                   const BoundingBox& box2, double w2,
                                   double fill, std::string target) {
  return ModelHandle(std::make_shared<detail::SyntheticTwoBoxScorer>(
      width, height, box1, w1, box2, w2, fill, std::move(target)));
}

ModelHandle make_subprocess_model(std::vector<std::string> argv,
                                  std::string target,
                                  std::chrono::seconds timeout) {
  return ModelHandle(detail::make_subprocess_scorer(std::move(argv),
                                                    std::move(target),
                                                    timeout));
}

ModelHandle make_http_model(std::string url, std::string target,
                            std::chrono::seconds timeout) {
  return ModelHandle(
      detail::make_http_scorer(std::move(url), std::move(target), timeout));
}

namespace {

std::vector<int> parse_int_list(const std::string& text, char sep) {
  std::vector<int> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, sep)) {
    if (item.empty()) {
      continue;
    }
    std::size_t pos = 0;
    const int v = std::stoi(item, &pos);
    if (pos != item.size()) {
      throw std::invalid_argument("malformed integer '" + item + "'");
    }
    values.push_back(v);
  }
  return values;
}

BoundingBox parse_box(const std::string& text) {
  const auto v = parse_int_list(text, ',');
  if (v.size() != 4) {
    throw std::invalid_argument("box spec needs x0,y0,w,h: '" + text + "'");
  }
  return BoundingBox{v[0], v[1], v[2], v[3]};
}

}  // namespace

ModelHandle parse_model_spec(const std::string& spec, int width, int height,
                             const std::string& target, double fill,
                             std::chrono::seconds timeout) {
  if (spec.rfind("synthetic:box:", 0) == 0) {
    return make_synthetic_box(width, height,
                              parse_box(spec.substr(14)), fill, target);
  }
  if (spec.rfind("synthetic:two-box:", 0) == 0) {
    const std::string body = spec.substr(18);
    const auto sep = body.find(';');
    if (sep == std::string::npos) {
      throw std::invalid_argument(
          "two-box spec needs 'x0,y0,w,h,w1;x0,y0,w,h,w2'");
    }
    auto parse_weighted = [](const std::string& part) {
      const auto last = part.rfind(',');
      if (last == std::string::npos) {
        throw std::invalid_argument("weighted box needs x0,y0,w,h,weight");
      }
      return std::make_pair(parse_box(part.substr(0, last)),
                            std::stod(part.substr(last + 1)));
    };
    const auto [box1, w1] = parse_weighted(body.substr(0, sep));
    const auto [box2, w2] = parse_weighted(body.substr(sep + 1));
    return make_synthetic_two_box(width, height, box1, w1, box2, w2, fill,
                                  target);
  }
  if (spec.rfind("cmd:", 0) == 0) {
    std::vector<std::string> argv;
    std::stringstream ss(spec.substr(4));
    std::string word;
    while (ss >> word) {
      argv.push_back(word);
    }
    if (argv.empty()) {
      throw std::invalid_argument("empty command in model spec");
    }
    return make_subprocess_model(std::move(argv), target, timeout);
  }
  if (spec.rfind("url:", 0) == 0) {
    return make_http_model(spec.substr(4), target, timeout);
  }
  throw std::invalid_argument(
      "model spec must start with synthetic:, cmd: or url:, got '" + spec +
      "'");
}

}  // namespace bosal

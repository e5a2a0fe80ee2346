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

#ifndef BOSAL_BO_HPP
#define BOSAL_BO_HPP

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "bosal/acquisition.hpp"
#include "bosal/gp.hpp"
#include "bosal/image.hpp"
#include "bosal/model.hpp"

namespace bosal {

/// How the 3-D posterior over (u, v, s) collapses to a 2-D map.
enum class Reduction { mean_over_s, max_over_s };

struct BoConfig {
  int iterations = 200;  // N: sequential acquisition steps after init
  int n_init = 5;        // random initial samples
  std::vector<int> sizes = {50, 64, 78, 92, 107, 121, 135, 150};
  double fill = kDefaultFill;

  /// Stride of the (u, v) candidate grid used for acquisition and for the
  /// final posterior render (the render is bilinearly upsampled to full
  /// resolution).
  int prediction_stride = 4;

  Reduction reduction = Reduction::mean_over_s;
  std::uint64_t seed = 0;
  GpHyperparams hp{};
  AcquisitionConfig acquisition{};

  /// Optional early stop: no y_best improvement above 1e-4 over the last 50
  /// iterations once at least 100 have run. Off by default.
  bool stop_on_convergence = false;

  void validate() const;
};

/// One sampling event. fit_seconds is kept for cost analysis only and is not
/// serialized (trace files must be reproducible byte for byte).
struct BoRecord {
  int index = 0;  // 0-based over all records, init included
  bool is_init = false;
  OcclusionPoint point;
  double y = 0.0;
  double y_best = 0.0;            // running max of observed y, raw units
  double acquisition_value = 0.0;  // 0 for init records
  double response_scale = 1.0;     // rescale factor of the fit behind this pick
  double fit_seconds = 0.0;        // not serialized
};

struct BoTrace {
  std::vector<BoRecord> records;
  std::uint64_t model_queries = 0;  // occlusion queries + the one base score
  double base_score = 0.0;
  double response_scale = 1.0;  // factor used for the final extraction fit
  bool exhausted_candidates = false;
  bool converged_early = false;
};

/// Raised when a model query fails mid-run; carries the partial trace.
class BoRunError : public QueryError {
public:
  BoRunError(const QueryError& cause, BoTrace partial)
      : QueryError(cause.what(), cause.payload()),
        partial_trace(std::move(partial)) {}
  BoTrace partial_trace;
};

struct RescaledResponses {
  std::vector<double> values;
  double scale = 1.0;
};

/// Divides responses by scale = max(max_i |y_i|, 1e-8) so the unit kernel
/// variance stays meaningful whatever the model's score magnitudes.
RescaledResponses rescale_responses(std::span<const double> y);

/// Runs the full sampling loop: seeds the RNG, draws n_init uniform
/// candidates (without replacement), then for each of the N iterations fits
/// the GP on rescaled responses, predicts over the candidate grid, selects
/// the next point by EI, blanks, queries the model and augments the data.
/// The map is the posterior mean of a final fit over all observations,
/// reduced over s, upsampled and normalized. Deterministic given the seed
/// and a deterministic model. Model evaluations = n_init + N + 1 exactly,
/// fewer only on candidate exhaustion or early convergence. Query failures
/// raise BoRunError with the partial trace.
std::pair<SaliencyMap, BoTrace> run(const ModelHandle& model,
                                    const Image& image,
                                    const BoConfig& config);

/// Renders the posterior mean of a fitted model over the strided (u, v)
/// grid crossed with all sizes, reduces over s, bilinearly upsamples to
/// width x height and normalizes. response_scale un-scales the posterior
/// back to raw units before normalization.
SaliencyMap extract_saliency(const GpModel& gp, int width, int height,
                             const std::vector<int>& sizes,
                             int prediction_stride, Reduction reduction,
                             double response_scale = 1.0);

/// One JSON object per record, '\n' separated, deterministic key order and
/// shortest round-trip number formatting.
std::string trace_to_jsonl(const BoTrace& trace);
void save_trace_jsonl(const BoTrace& trace, const std::filesystem::path& path);

}  // namespace bosal

#endif  // BOSAL_BO_HPP

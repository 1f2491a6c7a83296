#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "evsim/core.hpp"
#include "evsim/events.hpp"

namespace evsim {

struct RegionScores {
  double spatial_score = 0.0;
  std::int64_t mismatch_count = 0;

  friend bool operator==(const RegionScores&, const RegionScores&) = default;
};

struct RelevanceBits {
  std::uint8_t srs = 0;
  std::uint8_t trs = 0;

  [[nodiscard]] bool active() const { return srs == 1 && trs == 1; }
  friend bool operator==(const RelevanceBits&, const RelevanceBits&) = default;
};

struct RegionRelevance {
  RelevanceBits bits;
  RegionScores scores;

  friend bool operator==(const RegionRelevance&, const RegionRelevance&) = default;
};

/// Relevance of every region of one frame, indexed by region id.
struct RelevanceMap {
  std::int64_t t = 0;
  std::vector<RegionRelevance> regions;

  friend bool operator==(const RelevanceMap&, const RelevanceMap&) = default;
};

/// Denoised reference frame used for temporal comparison.
struct RcmState {
  Frame reference;
  bool initialized = false;
};

struct RcmOutput {
  RelevanceMap relevance;
  std::vector<RegionEvent> events;  // sorted by rid, one per region
};

/// 3x3 median with edge-replicated borders.
Frame median3(const Frame& frame);

/// Mean absolute deviation about the region mean.
double mad(std::span<const Pixel> region);
double mad(const RegionView& region);
/// Population variance.
double variance(std::span<const Pixel> region);
double variance(const RegionView& region);

/// Horizontal and vertical 3x3 Sobel responses, edge-replicated borders.
struct Gradients {
  int width = 0;
  int height = 0;
  std::vector<int> gx;
  std::vector<int> gy;
};
Gradients sobel(const Frame& frame);

/// Per-region count of pixels with |Gx| + |Gy| >= gradient_threshold.
std::vector<std::int64_t> edge_counts(const Frame& frame, const RegionGrid& grid,
                                      int gradient_threshold);

/// Harris response det(A) - k trace(A)^2 with A summed over a 3x3 window.
std::vector<double> harris_response(const Frame& frame, double k);
/// Per-region count of pixels whose Harris response is >= response_threshold.
std::vector<std::int64_t> corner_counts(const Frame& frame, const RegionGrid& grid, double k,
                                        double response_threshold);

/// Number of pixels with |cur - ref| >= delta.
std::int64_t temporal_mismatch(std::span<const Pixel> cur, std::span<const Pixel> ref,
                               int delta);

RelevanceBits classify(const RegionScores& scores, const SimConfig& config);

/// Spatial score of every region of an already denoised, padded frame.
std::vector<double> spatial_scores(const Frame& filtered, const RegionGrid& grid,
                                   const SimConfig& config, unsigned workers = 1);

/// Applies the configured noise filter.
Frame denoise(const Frame& frame, const SimConfig& config);

/// One RCM step over a padded frame. The first call on an uninitialized state
/// marks every region Active (both bits set) and seeds the reference.
RcmOutput rcm_step(const Frame& frame, RcmState& state, const RegionGrid& grid,
                   const SimConfig& config, unsigned workers = 1);

/// Pads incoming frames, enforces increasing frame indices and drives rcm_step.
class Simulator {
 public:
  Simulator(SimConfig config, int width, int height, unsigned workers = 1);

  RcmOutput step(const Frame& raw);

  [[nodiscard]] const RegionGrid& grid() const { return grid_; }
  [[nodiscard]] const SimConfig& config() const { return config_; }
  [[nodiscard]] int width() const { return width_; }
  [[nodiscard]] int height() const { return height_; }

 private:
  SimConfig config_;
  int width_;
  int height_;
  unsigned workers_;
  RegionGrid grid_;
  RcmState state_;
  std::int64_t last_t_ = -1;
};

}  // namespace evsim

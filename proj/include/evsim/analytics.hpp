#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "evsim/core.hpp"
#include "evsim/events.hpp"
#include "evsim/io.hpp"

namespace evsim {

struct RoiPoint {
  std::int64_t t = 0;
  std::int64_t active = 0;
  std::int64_t srs1 = 0;
  std::int64_t trs1 = 0;
  double roi_fraction = 0.0;
};

struct RoiSeries {
  std::size_t regions = 0;  // M
  std::vector<RoiPoint> points;
  double mean_roi = 0.0;
  /// 1 - mean_roi.
  double mean_non_relevant = 0.0;
};

/// Incremental ROI accounting; feed one complete frame of events at a time.
class RoiAccumulator {
 public:
  explicit RoiAccumulator(std::size_t regions) : regions_(regions) {}

  const RoiPoint& add_frame(std::span<const RegionEvent> frame_events);
  [[nodiscard]] RoiSeries finish() const;

 private:
  std::size_t regions_;
  std::vector<RoiPoint> points_;
};

/// Requires exactly M events per frame; throws StreamError otherwise.
RoiSeries roi_series(const EventStream& stream);
RoiSeries roi_series(std::span<const RegionEvent> events, std::size_t regions);

struct RedundancyReport {
  std::vector<double> per_image;  // fraction of srs=0 regions
  double mean = 0.0;
};

/// Spatial path only: each image is scored independently.
RedundancyReport spatial_redundancy(std::span<const Frame> images, const SimConfig& config,
                                    unsigned workers = 1);

/// Per-region relevance bits (srs only) of one independent image, padded.
std::vector<std::uint8_t> spatial_bits(const Frame& image, const SimConfig& config);

enum class SweepParameter { spatial_threshold, region_size };
SweepParameter parse_sweep_parameter(std::string_view s);
std::string_view to_string(SweepParameter p);

struct SweepCurve {
  std::string parameter;
  std::vector<std::pair<double, double>> points;  // (value, mean roi fraction)
};

/// Mean ROI fraction over independent images (srs=1 fraction) per value.
SweepCurve sweep(std::span<const Frame> images, const SimConfig& config,
                 SweepParameter parameter, std::span<const double> values,
                 unsigned workers = 1);
/// Mean ROI fraction (Active/M averaged over frames) of a sequence per value.
SweepCurve sweep_sequence(std::span<const Frame> frames, const SimConfig& config,
                          SweepParameter parameter, std::span<const double> values,
                          unsigned workers = 1);

struct MadHistogram {
  double bin_width = 1.0;
  std::vector<std::int64_t> counts;  // bin k covers [k*w, (k+1)*w)
  std::int64_t total = 0;
};

/// Histogram of per-region MAD (on denoised pixels) over all images.
MadHistogram mad_histogram(std::span<const Frame> images, const SimConfig& config,
                           double bin_width, unsigned workers = 1);

/// Zeroes srs=0 regions of every image, writes PGMs plus manifest.csv.
/// Returns the masked images (original dimensions).
std::vector<Frame> export_roi_dataset(const Dataset& dataset, const SimConfig& config,
                                      const std::filesystem::path& output_dir,
                                      unsigned workers = 1);
/// The masking step of export_roi_dataset without file output.
Frame mask_redundant_regions(const Frame& image, const SimConfig& config);

// CSV writers, LF line endings.
void write_roi_csv(std::ostream& out, const RoiSeries& series);
void write_sweep_csv(std::ostream& out, const SweepCurve& curve);
void write_histogram_csv(std::ostream& out, const MadHistogram& hist);

}  // namespace evsim

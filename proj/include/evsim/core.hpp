#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace evsim {

using Pixel = std::uint8_t;
using RegionId = std::uint32_t;

/// Grayscale image, row-major, with a frame index.
struct Frame {
  int width = 0;
  int height = 0;
  std::int64_t t = 0;
  std::vector<Pixel> pixels;

  Frame() = default;
  Frame(int w, int h, std::int64_t index = 0, Pixel fill = 0);
  Frame(int w, int h, std::int64_t index, std::vector<Pixel> data);

  [[nodiscard]] bool empty() const { return width <= 0 || height <= 0; }
  [[nodiscard]] Pixel at(int row, int col) const {
    return pixels[static_cast<std::size_t>(row) * width + col];
  }
  Pixel& at(int row, int col) {
    return pixels[static_cast<std::size_t>(row) * width + col];
  }
  /// Pixel lookup with coordinates clamped to the frame (edge replication).
  [[nodiscard]] Pixel clamped(int row, int col) const;

  friend bool operator==(const Frame&, const Frame&) = default;
};

/// Interleaved 8-bit RGB image.
struct RgbFrame {
  int width = 0;
  int height = 0;
  std::vector<Pixel> rgb;  // 3 * width * height
};

/// Partition of a padded frame into grid_rows x grid_cols square regions.
struct RegionGrid {
  int region_size = 1;
  int grid_rows = 0;
  int grid_cols = 0;
  int padded_width = 0;
  int padded_height = 0;

  [[nodiscard]] std::size_t count() const {
    return static_cast<std::size_t>(grid_rows) * grid_cols;
  }
  [[nodiscard]] std::size_t region_pixels() const {
    return static_cast<std::size_t>(region_size) * region_size;
  }
  [[nodiscard]] int origin_row(RegionId rid) const {
    return static_cast<int>(rid / grid_cols) * region_size;
  }
  [[nodiscard]] int origin_col(RegionId rid) const {
    return static_cast<int>(rid % grid_cols) * region_size;
  }
  /// Region owning padded pixel (row, col).
  [[nodiscard]] RegionId owner(int row, int col) const {
    return static_cast<RegionId>((row / region_size) * grid_cols + col / region_size);
  }

  friend bool operator==(const RegionGrid&, const RegionGrid&) = default;
};

/// Copy of one region's pixels, row-major.
struct RegionView {
  RegionId rid = 0;
  int origin_row = 0;
  int origin_col = 0;
  std::vector<Pixel> pixels;
};

enum class SpatialFeature { edge, corner, mad, variance };
enum class NoiseFilter { none, median3 };
enum class SrsZeroPolicy { zero, hold };
enum class ReferenceUpdate { every_frame, on_event };

/// Every tunable of the simulator. Defaults are tuned for MNIST-scale input.
struct SimConfig {
  int region_size = 8;
  SpatialFeature spatial_feature = SpatialFeature::mad;
  double spatial_threshold = 3.0;
  int temporal_pixel_delta = 2;
  int temporal_threshold = 1;
  NoiseFilter noise_filter = NoiseFilter::median3;
  SrsZeroPolicy srs_zero_policy = SrsZeroPolicy::zero;
  ReferenceUpdate reference_update = ReferenceUpdate::every_frame;
  int edge_gradient_threshold = 100;
  double corner_k = 0.04;
  double corner_response_threshold = 1e6;

  /// Throws ConfigError on out-of-range values.
  void validate() const;

  /// Applies one `key=value` setting using the field names above.
  void set(std::string_view key, std::string_view value);

  friend bool operator==(const SimConfig&, const SimConfig&) = default;
};

std::string_view to_string(SpatialFeature v);
std::string_view to_string(NoiseFilter v);
std::string_view to_string(SrsZeroPolicy v);
std::string_view to_string(ReferenceUpdate v);
SpatialFeature parse_spatial_feature(std::string_view s);
NoiseFilter parse_noise_filter(std::string_view s);
SrsZeroPolicy parse_srs_zero_policy(std::string_view s);
ReferenceUpdate parse_reference_update(std::string_view s);

/// Reads a key=value config file; '#' starts a comment. Unknown keys throw.
SimConfig load_config_file(const std::string& path, SimConfig base = {});

/// Rec.601 luma, rounded half-up.
Pixel luma(Pixel r, Pixel g, Pixel b);
Frame to_grayscale(const RgbFrame& rgb, std::int64_t t = 0);

/// Rounds both dimensions up to multiples of n, replicating edge pixels.
Frame pad_replicate(const Frame& frame, int n);
/// Top-left width x height window of a frame.
Frame crop(const Frame& frame, int width, int height);

RegionGrid build_grid(int width, int height, int n);
RegionView region_view(const Frame& padded, const RegionGrid& grid, RegionId rid);
/// Writes a region's row-major pixels into a padded frame.
void write_region(Frame& padded, const RegionGrid& grid, RegionId rid,
                  std::span<const Pixel> pixels);
void fill_region(Frame& padded, const RegionGrid& grid, RegionId rid, Pixel value);
void copy_region(Frame& dst, const Frame& src, const RegionGrid& grid, RegionId rid);

}  // namespace evsim

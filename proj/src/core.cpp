#include "evsim/core.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <string>

#include "evsim/error.hpp"

namespace evsim {

Frame::Frame(int w, int h, std::int64_t index, Pixel fill)
    : width(w), height(h), t(index),
      pixels(static_cast<std::size_t>(std::max(w, 0)) * std::max(h, 0), fill) {}

Frame::Frame(int w, int h, std::int64_t index, std::vector<Pixel> data)
    : width(w), height(h), t(index), pixels(std::move(data)) {
  if (w < 0 || h < 0 || pixels.size() != static_cast<std::size_t>(w) * h) {
    throw DataError("frame buffer size does not match " + std::to_string(w) + "x" +
                    std::to_string(h));
  }
}

Pixel Frame::clamped(int row, int col) const {
  row = std::clamp(row, 0, height - 1);
  col = std::clamp(col, 0, width - 1);
  return at(row, col);
}

namespace {

template <typename Enum, std::size_t K>
Enum parse_enum(std::string_view s, const std::pair<std::string_view, Enum> (&table)[K],
                std::string_view what) {
  for (const auto& [name, value] : table) {
    if (name == s) return value;
  }
  throw ConfigError("unknown " + std::string(what) + " '" + std::string(s) + "'");
}

constexpr std::pair<std::string_view, SpatialFeature> kFeatures[] = {
    {"edge", SpatialFeature::edge},
    {"corner", SpatialFeature::corner},
    {"mad", SpatialFeature::mad},
    {"variance", SpatialFeature::variance}};
constexpr std::pair<std::string_view, NoiseFilter> kFilters[] = {
    {"none", NoiseFilter::none}, {"median3", NoiseFilter::median3}};
constexpr std::pair<std::string_view, SrsZeroPolicy> kPolicies[] = {
    {"zero", SrsZeroPolicy::zero}, {"hold", SrsZeroPolicy::hold}};
constexpr std::pair<std::string_view, ReferenceUpdate> kReferences[] = {
    {"every_frame", ReferenceUpdate::every_frame}, {"on_event", ReferenceUpdate::on_event}};

template <typename Enum, std::size_t K>
std::string_view enum_name(Enum v, const std::pair<std::string_view, Enum> (&table)[K]) {
  for (const auto& [name, value] : table) {
    if (value == v) return name;
  }
  return "?";
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

int parse_int(std::string_view key, std::string_view s) {
  int value = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw ConfigError(std::string(key) + ": expected an integer, got '" + std::string(s) + "'");
  }
  return value;
}

double parse_double(std::string_view key, std::string_view s) {
  const std::string copy(s);
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(copy, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != copy.size()) {
    throw ConfigError(std::string(key) + ": expected a number, got '" + copy + "'");
  }
  return value;
}

}  // namespace

std::string_view to_string(SpatialFeature v) { return enum_name(v, kFeatures); }
std::string_view to_string(NoiseFilter v) { return enum_name(v, kFilters); }
std::string_view to_string(SrsZeroPolicy v) { return enum_name(v, kPolicies); }
std::string_view to_string(ReferenceUpdate v) { return enum_name(v, kReferences); }

SpatialFeature parse_spatial_feature(std::string_view s) {
  return parse_enum(s, kFeatures, "spatial feature");
}
NoiseFilter parse_noise_filter(std::string_view s) {
  return parse_enum(s, kFilters, "noise filter");
}
SrsZeroPolicy parse_srs_zero_policy(std::string_view s) {
  return parse_enum(s, kPolicies, "srs zero policy");
}
ReferenceUpdate parse_reference_update(std::string_view s) {
  return parse_enum(s, kReferences, "reference update");
}

void SimConfig::validate() const {
  if (region_size < 1) throw ConfigError("region_size must be >= 1");
  if (!(spatial_threshold >= 0.0)) throw ConfigError("spatial_threshold must be >= 0");
  if (temporal_pixel_delta < 0) throw ConfigError("temporal_pixel_delta must be >= 0");
  if (temporal_threshold < 0) throw ConfigError("temporal_threshold must be >= 0");
  if (edge_gradient_threshold < 0) throw ConfigError("edge_gradient_threshold must be >= 0");
}

void SimConfig::set(std::string_view key, std::string_view value) {
  value = trim(value);
  if (key == "region_size") {
    region_size = parse_int(key, value);
  } else if (key == "spatial_feature") {
    spatial_feature = parse_spatial_feature(value);
  } else if (key == "spatial_threshold") {
    spatial_threshold = parse_double(key, value);
  } else if (key == "temporal_pixel_delta") {
    temporal_pixel_delta = parse_int(key, value);
  } else if (key == "temporal_threshold") {
    temporal_threshold = parse_int(key, value);
  } else if (key == "noise_filter") {
    noise_filter = parse_noise_filter(value);
  } else if (key == "srs_zero_policy") {
    srs_zero_policy = parse_srs_zero_policy(value);
  } else if (key == "reference_update") {
    reference_update = parse_reference_update(value);
  } else if (key == "edge_gradient_threshold") {
    edge_gradient_threshold = parse_int(key, value);
  } else if (key == "corner_k") {
    corner_k = parse_double(key, value);
  } else if (key == "corner_response_threshold") {
    corner_response_threshold = parse_double(key, value);
  } else {
    throw ConfigError("unknown config key '" + std::string(key) + "'");
  }
}

SimConfig load_config_file(const std::string& path, SimConfig base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view view(line);
    if (const auto hash = view.find('#'); hash != std::string_view::npos) {
      view = view.substr(0, hash);
    }
    view = trim(view);
    if (view.empty()) continue;
    const auto eq = view.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError(path + ":" + std::to_string(lineno) + ": expected key=value");
    }
    try {
      base.set(trim(view.substr(0, eq)), view.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return base;
}

Pixel luma(Pixel r, Pixel g, Pixel b) {
  // Fixed-point Rec.601: 299/587/114 per mille, +500 rounds half up.
  const int y = (299 * r + 587 * g + 114 * b + 500) / 1000;
  return static_cast<Pixel>(std::clamp(y, 0, 255));
}

Frame to_grayscale(const RgbFrame& rgb, std::int64_t t) {
  const std::size_t n = static_cast<std::size_t>(rgb.width) * rgb.height;
  if (rgb.width < 0 || rgb.height < 0 || rgb.rgb.size() != 3 * n) {
    throw DataError("RGB buffer size does not match dimensions");
  }
  Frame out(rgb.width, rgb.height, t);
  for (std::size_t i = 0; i < n; ++i) {
    out.pixels[i] = luma(rgb.rgb[3 * i], rgb.rgb[3 * i + 1], rgb.rgb[3 * i + 2]);
  }
  return out;
}

Frame pad_replicate(const Frame& frame, int n) {
  if (frame.empty()) throw DataError("cannot pad an empty frame");
  if (n < 1) throw ConfigError("region size must be >= 1");
  const int w = (frame.width + n - 1) / n * n;
  const int h = (frame.height + n - 1) / n * n;
  if (w == frame.width && h == frame.height) return frame;
  Frame out(w, h, frame.t);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) out.at(r, c) = frame.clamped(r, c);
  }
  return out;
}

Frame crop(const Frame& frame, int width, int height) {
  if (width > frame.width || height > frame.height || width < 0 || height < 0) {
    throw ConfigError("crop window exceeds frame");
  }
  if (width == frame.width && height == frame.height) return frame;
  Frame out(width, height, frame.t);
  for (int r = 0; r < height; ++r) {
    std::copy_n(frame.pixels.begin() + static_cast<std::ptrdiff_t>(r) * frame.width, width,
                out.pixels.begin() + static_cast<std::ptrdiff_t>(r) * width);
  }
  return out;
}

RegionGrid build_grid(int width, int height, int n) {
  if (width < 1 || height < 1) throw ConfigError("grid needs a non-empty frame");
  if (n < 1) throw ConfigError("region size must be >= 1");
  RegionGrid g;
  g.region_size = n;
  g.grid_cols = (width + n - 1) / n;
  g.grid_rows = (height + n - 1) / n;
  g.padded_width = g.grid_cols * n;
  g.padded_height = g.grid_rows * n;
  return g;
}

RegionView region_view(const Frame& padded, const RegionGrid& grid, RegionId rid) {
  RegionView v;
  v.rid = rid;
  v.origin_row = grid.origin_row(rid);
  v.origin_col = grid.origin_col(rid);
  const int n = grid.region_size;
  v.pixels.resize(grid.region_pixels());
  for (int r = 0; r < n; ++r) {
    const auto* src = padded.pixels.data() +
                      static_cast<std::size_t>(v.origin_row + r) * padded.width + v.origin_col;
    std::copy_n(src, n, v.pixels.begin() + static_cast<std::ptrdiff_t>(r) * n);
  }
  return v;
}

void write_region(Frame& padded, const RegionGrid& grid, RegionId rid,
                  std::span<const Pixel> pixels) {
  const int n = grid.region_size;
  const int r0 = grid.origin_row(rid);
  const int c0 = grid.origin_col(rid);
  for (int r = 0; r < n; ++r) {
    std::copy_n(pixels.begin() + static_cast<std::ptrdiff_t>(r) * n, n,
                padded.pixels.begin() +
                    static_cast<std::ptrdiff_t>(r0 + r) * padded.width + c0);
  }
}

void fill_region(Frame& padded, const RegionGrid& grid, RegionId rid, Pixel value) {
  const int n = grid.region_size;
  const int r0 = grid.origin_row(rid);
  const int c0 = grid.origin_col(rid);
  for (int r = 0; r < n; ++r) {
    std::fill_n(padded.pixels.begin() + static_cast<std::ptrdiff_t>(r0 + r) * padded.width + c0,
                n, value);
  }
}

void copy_region(Frame& dst, const Frame& src, const RegionGrid& grid, RegionId rid) {
  const int n = grid.region_size;
  const int r0 = grid.origin_row(rid);
  const int c0 = grid.origin_col(rid);
  for (int r = 0; r < n; ++r) {
    const auto offset = static_cast<std::ptrdiff_t>(r0 + r) * src.width + c0;
    std::copy_n(src.pixels.begin() + offset, n, dst.pixels.begin() + offset);
  }
}

}  // namespace evsim

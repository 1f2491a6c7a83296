#include "evsim/rcm.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdlib>
#include <numeric>
#include <string>

#include "evsim/error.hpp"
#include "evsim/parallel.hpp"

namespace evsim {

namespace {

std::string dims(int w, int h) { return std::to_string(w) + "x" + std::to_string(h); }

double mean_of(std::span<const Pixel> region) {
  const std::int64_t sum = std::accumulate(region.begin(), region.end(), std::int64_t{0});
  return static_cast<double>(sum) / static_cast<double>(region.size());
}

template <typename T>
std::vector<std::int64_t> count_per_region(const std::vector<T>& values, int width,
                                           const RegionGrid& grid, auto&& predicate) {
  std::vector<std::int64_t> counts(grid.count(), 0);
  const int height = static_cast<int>(values.size() / static_cast<std::size_t>(width));
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) {
      if (predicate(values[static_cast<std::size_t>(r) * width + c])) {
        ++counts[grid.owner(r, c)];
      }
    }
  }
  return counts;
}

void require_grid_dims(const Frame& frame, const RegionGrid& grid) {
  if (frame.width != grid.padded_width || frame.height != grid.padded_height) {
    throw ConfigError("frame " + dims(frame.width, frame.height) +
                      " does not match padded grid " +
                      dims(grid.padded_width, grid.padded_height));
  }
}

}  // namespace

Frame median3(const Frame& frame) {
  if (frame.empty()) throw DataError("median3: empty frame");
  Frame out(frame.width, frame.height, frame.t);
  std::array<Pixel, 9> window{};
  for (int r = 0; r < frame.height; ++r) {
    for (int c = 0; c < frame.width; ++c) {
      std::size_t k = 0;
      for (int dr = -1; dr <= 1; ++dr) {
        for (int dc = -1; dc <= 1; ++dc) window[k++] = frame.clamped(r + dr, c + dc);
      }
      std::nth_element(window.begin(), window.begin() + 4, window.end());
      out.at(r, c) = window[4];
    }
  }
  return out;
}

double mad(std::span<const Pixel> region) {
  if (region.empty()) throw DataError("mad: empty region");
  const double mu = mean_of(region);
  double total = 0.0;
  for (const Pixel x : region) total += std::abs(static_cast<double>(x) - mu);
  return total / static_cast<double>(region.size());
}

double mad(const RegionView& region) { return mad(std::span<const Pixel>(region.pixels)); }

double variance(std::span<const Pixel> region) {
  if (region.empty()) throw DataError("variance: empty region");
  const double mu = mean_of(region);
  double total = 0.0;
  for (const Pixel x : region) {
    const double d = static_cast<double>(x) - mu;
    total += d * d;
  }
  return total / static_cast<double>(region.size());
}

double variance(const RegionView& region) {
  return variance(std::span<const Pixel>(region.pixels));
}

Gradients sobel(const Frame& frame) {
  Gradients g;
  g.width = frame.width;
  g.height = frame.height;
  const std::size_t n = frame.pixels.size();
  g.gx.assign(n, 0);
  g.gy.assign(n, 0);
  for (int r = 0; r < frame.height; ++r) {
    for (int c = 0; c < frame.width; ++c) {
      auto p = [&](int dr, int dc) { return static_cast<int>(frame.clamped(r + dr, c + dc)); };
      const int gx = (p(-1, 1) + 2 * p(0, 1) + p(1, 1)) - (p(-1, -1) + 2 * p(0, -1) + p(1, -1));
      const int gy = (p(1, -1) + 2 * p(1, 0) + p(1, 1)) - (p(-1, -1) + 2 * p(-1, 0) + p(-1, 1));
      const auto i = static_cast<std::size_t>(r) * frame.width + c;
      g.gx[i] = gx;
      g.gy[i] = gy;
    }
  }
  return g;
}

std::vector<std::int64_t> edge_counts(const Frame& frame, const RegionGrid& grid,
                                      int gradient_threshold) {
  require_grid_dims(frame, grid);
  const Gradients g = sobel(frame);
  std::vector<int> magnitude(g.gx.size());
  for (std::size_t i = 0; i < magnitude.size(); ++i) {
    magnitude[i] = std::abs(g.gx[i]) + std::abs(g.gy[i]);
  }
  return count_per_region(magnitude, frame.width, grid,
                          [&](int m) { return m >= gradient_threshold; });
}

std::vector<double> harris_response(const Frame& frame, double k) {
  const Gradients g = sobel(frame);
  const int w = frame.width;
  const int h = frame.height;
  std::vector<double> response(g.gx.size(), 0.0);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      std::int64_t sxx = 0;
      std::int64_t syy = 0;
      std::int64_t sxy = 0;
      for (int dr = -1; dr <= 1; ++dr) {
        for (int dc = -1; dc <= 1; ++dc) {
          const int rr = std::clamp(r + dr, 0, h - 1);
          const int cc = std::clamp(c + dc, 0, w - 1);
          const auto i = static_cast<std::size_t>(rr) * w + cc;
          const std::int64_t ix = g.gx[i];
          const std::int64_t iy = g.gy[i];
          sxx += ix * ix;
          syy += iy * iy;
          sxy += ix * iy;
        }
      }
      const double det = static_cast<double>(sxx * syy - sxy * sxy);
      const double trace = static_cast<double>(sxx + syy);
      response[static_cast<std::size_t>(r) * w + c] = det - k * trace * trace;
    }
  }
  return response;
}

std::vector<std::int64_t> corner_counts(const Frame& frame, const RegionGrid& grid, double k,
                                        double response_threshold) {
  require_grid_dims(frame, grid);
  const std::vector<double> response = harris_response(frame, k);
  return count_per_region(response, frame.width, grid,
                          [&](double v) { return v >= response_threshold; });
}

std::int64_t temporal_mismatch(std::span<const Pixel> cur, std::span<const Pixel> ref,
                               int delta) {
  if (cur.size() != ref.size()) throw ConfigError("temporal_mismatch: region size differs");
  std::int64_t count = 0;
  for (std::size_t i = 0; i < cur.size(); ++i) {
    if (std::abs(static_cast<int>(cur[i]) - static_cast<int>(ref[i])) >= delta) ++count;
  }
  return count;
}

RelevanceBits classify(const RegionScores& scores, const SimConfig& config) {
  RelevanceBits bits;
  bits.srs = scores.spatial_score >= config.spatial_threshold ? 1 : 0;
  bits.trs = scores.mismatch_count >= config.temporal_threshold ? 1 : 0;
  return bits;
}

Frame denoise(const Frame& frame, const SimConfig& config) {
  switch (config.noise_filter) {
    case NoiseFilter::median3:
      return median3(frame);
    case NoiseFilter::none:
      break;
  }
  return frame;
}

std::vector<double> spatial_scores(const Frame& filtered, const RegionGrid& grid,
                                   const SimConfig& config, unsigned workers) {
  require_grid_dims(filtered, grid);
  std::vector<double> scores(grid.count(), 0.0);
  auto from_counts = [&](const std::vector<std::int64_t>& counts) {
    std::transform(counts.begin(), counts.end(), scores.begin(),
                   [](std::int64_t c) { return static_cast<double>(c); });
  };
  switch (config.spatial_feature) {
    case SpatialFeature::edge:
      from_counts(edge_counts(filtered, grid, config.edge_gradient_threshold));
      break;
    case SpatialFeature::corner:
      from_counts(corner_counts(filtered, grid, config.corner_k,
                                config.corner_response_threshold));
      break;
    case SpatialFeature::mad:
      parallel_for(grid.count(), workers, [&](std::size_t rid) {
        scores[rid] = mad(region_view(filtered, grid, static_cast<RegionId>(rid)));
      });
      break;
    case SpatialFeature::variance:
      parallel_for(grid.count(), workers, [&](std::size_t rid) {
        scores[rid] = variance(region_view(filtered, grid, static_cast<RegionId>(rid)));
      });
      break;
  }
  return scores;
}

RcmOutput rcm_step(const Frame& frame, RcmState& state, const RegionGrid& grid,
                   const SimConfig& config, unsigned workers) {
  require_grid_dims(frame, grid);
  if (state.initialized &&
      (state.reference.width != frame.width || state.reference.height != frame.height)) {
    throw ConfigError("reference frame " + dims(state.reference.width, state.reference.height) +
                      " does not match frame " + dims(frame.width, frame.height));
  }

  const Frame filtered = denoise(frame, config);
  const std::vector<double> spatial = spatial_scores(filtered, grid, config, workers);
  const bool bootstrap = !state.initialized;
  const auto m = grid.count();

  RcmOutput out;
  out.relevance.t = frame.t;
  out.relevance.regions.resize(m);
  out.events.resize(m);
  parallel_for(m, workers, [&](std::size_t i) {
    const auto rid = static_cast<RegionId>(i);
    RegionRelevance& rel = out.relevance.regions[i];
    rel.scores.spatial_score = spatial[i];
    if (bootstrap) {
      rel.scores.mismatch_count = static_cast<std::int64_t>(grid.region_pixels());
      rel.bits = {1, 1};
    } else {
      const RegionView cur = region_view(filtered, grid, rid);
      const RegionView ref = region_view(state.reference, grid, rid);
      rel.scores.mismatch_count =
          temporal_mismatch(cur.pixels, ref.pixels, config.temporal_pixel_delta);
      rel.bits = classify(rel.scores, config);
    }

    RegionEvent& ev = out.events[i];
    ev.t = frame.t;
    ev.rid = rid;
    ev.srs = rel.bits.srs;
    ev.trs = rel.bits.trs;
    ev.spatial_score = rel.scores.spatial_score;
    ev.mismatch_count = rel.scores.mismatch_count;
    if (rel.bits.active()) ev.payload = region_view(frame, grid, rid).pixels;
  });

  if (bootstrap || config.reference_update == ReferenceUpdate::every_frame) {
    state.reference = filtered;
  } else {
    for (std::size_t i = 0; i < m; ++i) {
      if (out.relevance.regions[i].bits.active()) {
        copy_region(state.reference, filtered, grid, static_cast<RegionId>(i));
      }
    }
  }
  state.reference.t = frame.t;
  state.initialized = true;
  return out;
}

Simulator::Simulator(SimConfig config, int width, int height, unsigned workers)
    : config_(config), width_(width), height_(height), workers_(std::max(workers, 1u)) {
  config_.validate();
  grid_ = build_grid(width, height, config_.region_size);
}

RcmOutput Simulator::step(const Frame& raw) {
  if (raw.width != width_ || raw.height != height_) {
    throw ConfigError("frame " + dims(raw.width, raw.height) + " does not match sequence " +
                      dims(width_, height_));
  }
  if (raw.t <= last_t_) {
    throw DataError("frame index " + std::to_string(raw.t) + " is not after " +
                    std::to_string(last_t_));
  }
  last_t_ = raw.t;
  return rcm_step(pad_replicate(raw, config_.region_size), state_, grid_, config_, workers_);
}

}  // namespace evsim

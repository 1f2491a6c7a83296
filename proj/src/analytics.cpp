#include "evsim/analytics.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>

#include "evsim/error.hpp"
#include "evsim/parallel.hpp"
#include "evsim/rcm.hpp"

namespace evsim {

namespace fs = std::filesystem;

namespace {

std::string fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::string compact(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

void require_nonempty(std::span<const Frame> images, std::string_view what) {
  if (images.empty()) throw DataError(std::string(what) + ": empty dataset");
}

void require_increasing(std::span<const double> values) {
  if (values.empty()) throw ConfigError("sweep needs at least one value");
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (!(values[i] > values[i - 1])) {
      throw ConfigError("sweep values must be strictly increasing");
    }
  }
}

SimConfig with_value(SimConfig config, SweepParameter parameter, double value) {
  switch (parameter) {
    case SweepParameter::spatial_threshold:
      config.spatial_threshold = value;
      break;
    case SweepParameter::region_size:
      if (value < 1 || value != std::floor(value)) {
        throw ConfigError("region_size sweep values must be positive integers");
      }
      config.region_size = static_cast<int>(value);
      break;
  }
  config.validate();
  return config;
}

}  // namespace

const RoiPoint& RoiAccumulator::add_frame(std::span<const RegionEvent> frame_events) {
  if (frame_events.size() != regions_) {
    throw StreamError("incomplete frame: " + std::to_string(frame_events.size()) + " of " +
                      std::to_string(regions_) + " region events");
  }
  RoiPoint p;
  p.t = frame_events.front().t;
  for (std::size_t i = 0; i < frame_events.size(); ++i) {
    const RegionEvent& ev = frame_events[i];
    if (ev.t != p.t || ev.rid != i) {
      throw StreamError("incomplete frame at t=" + std::to_string(p.t));
    }
    p.srs1 += ev.srs;
    p.trs1 += ev.trs;
    p.active += ev.active() ? 1 : 0;
  }
  p.roi_fraction = static_cast<double>(p.active) / static_cast<double>(regions_);
  points_.push_back(p);
  return points_.back();
}

RoiSeries RoiAccumulator::finish() const {
  RoiSeries s;
  s.regions = regions_;
  s.points = points_;
  if (!points_.empty()) {
    double total = 0.0;
    for (const RoiPoint& p : points_) total += p.roi_fraction;
    s.mean_roi = total / static_cast<double>(points_.size());
  }
  s.mean_non_relevant = 1.0 - s.mean_roi;
  return s;
}

RoiSeries roi_series(std::span<const RegionEvent> events, std::size_t regions) {
  if (regions == 0) throw ConfigError("roi_series needs a non-empty grid");
  RoiAccumulator acc(regions);
  std::size_t begin = 0;
  while (begin < events.size()) {
    std::size_t end = begin;
    while (end < events.size() && events[end].t == events[begin].t) ++end;
    acc.add_frame(events.subspan(begin, end - begin));
    begin = end;
  }
  return acc.finish();
}

RoiSeries roi_series(const EventStream& stream) {
  return roi_series(stream.events, stream.header.grid.count());
}

std::vector<std::uint8_t> spatial_bits(const Frame& image, const SimConfig& config) {
  const Frame padded = pad_replicate(image, config.region_size);
  const RegionGrid grid = build_grid(image.width, image.height, config.region_size);
  const std::vector<double> scores = spatial_scores(denoise(padded, config), grid, config);
  std::vector<std::uint8_t> bits(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) {
    bits[i] = classify({scores[i], 0}, config).srs;
  }
  return bits;
}

RedundancyReport spatial_redundancy(std::span<const Frame> images, const SimConfig& config,
                                    unsigned workers) {
  require_nonempty(images, "spatial_redundancy");
  config.validate();
  RedundancyReport report;
  report.per_image.resize(images.size());
  parallel_for(images.size(), workers, [&](std::size_t i) {
    const auto bits = spatial_bits(images[i], config);
    const auto zeros = std::count(bits.begin(), bits.end(), std::uint8_t{0});
    report.per_image[i] = static_cast<double>(zeros) / static_cast<double>(bits.size());
  });
  double total = 0.0;
  for (const double f : report.per_image) total += f;
  report.mean = total / static_cast<double>(images.size());
  return report;
}

SweepParameter parse_sweep_parameter(std::string_view s) {
  if (s == "spatial_threshold") return SweepParameter::spatial_threshold;
  if (s == "region_size") return SweepParameter::region_size;
  throw ConfigError("unknown sweep parameter '" + std::string(s) + "'");
}

std::string_view to_string(SweepParameter p) {
  return p == SweepParameter::spatial_threshold ? "spatial_threshold" : "region_size";
}

SweepCurve sweep(std::span<const Frame> images, const SimConfig& config,
                 SweepParameter parameter, std::span<const double> values, unsigned workers) {
  require_nonempty(images, "sweep");
  require_increasing(values);
  SweepCurve curve;
  curve.parameter = std::string(to_string(parameter));
  for (const double v : values) {
    const RedundancyReport r = spatial_redundancy(images, with_value(config, parameter, v), workers);
    curve.points.emplace_back(v, 1.0 - r.mean);
  }
  return curve;
}

SweepCurve sweep_sequence(std::span<const Frame> frames, const SimConfig& config,
                          SweepParameter parameter, std::span<const double> values,
                          unsigned workers) {
  require_nonempty(frames, "sweep");
  require_increasing(values);
  SweepCurve curve;
  curve.parameter = std::string(to_string(parameter));
  for (const double v : values) {
    const SimConfig c = with_value(config, parameter, v);
    Simulator sim(c, frames.front().width, frames.front().height, workers);
    RoiAccumulator acc(sim.grid().count());
    for (const Frame& f : frames) acc.add_frame(sim.step(f).events);
    curve.points.emplace_back(v, acc.finish().mean_roi);
  }
  return curve;
}

MadHistogram mad_histogram(std::span<const Frame> images, const SimConfig& config,
                           double bin_width, unsigned workers) {
  require_nonempty(images, "mad_histogram");
  if (!(bin_width > 0.0)) throw ConfigError("bin width must be > 0");
  config.validate();
  std::vector<std::vector<double>> per_image(images.size());
  parallel_for(images.size(), workers, [&](std::size_t i) {
    const Frame padded = denoise(pad_replicate(images[i], config.region_size), config);
    const RegionGrid grid = build_grid(images[i].width, images[i].height, config.region_size);
    auto& out = per_image[i];
    out.reserve(grid.count());
    for (RegionId rid = 0; rid < grid.count(); ++rid) {
      out.push_back(mad(region_view(padded, grid, rid)));
    }
  });

  MadHistogram hist;
  hist.bin_width = bin_width;
  for (const auto& values : per_image) {
    for (const double v : values) {
      const auto bin = static_cast<std::size_t>(std::floor(v / bin_width));
      if (bin >= hist.counts.size()) hist.counts.resize(bin + 1, 0);
      ++hist.counts[bin];
      ++hist.total;
    }
  }
  return hist;
}

Frame mask_redundant_regions(const Frame& image, const SimConfig& config) {
  const auto bits = spatial_bits(image, config);
  const RegionGrid grid = build_grid(image.width, image.height, config.region_size);
  Frame padded = pad_replicate(image, config.region_size);
  for (RegionId rid = 0; rid < bits.size(); ++rid) {
    if (bits[rid] == 0) fill_region(padded, grid, rid, 0);
  }
  return crop(padded, image.width, image.height);
}

std::vector<Frame> export_roi_dataset(const Dataset& dataset, const SimConfig& config,
                                      const fs::path& output_dir, unsigned workers) {
  require_nonempty(dataset.images, "export_roi_dataset");
  config.validate();
  std::error_code ec;
  fs::create_directories(output_dir, ec);
  if (ec || !fs::is_directory(output_dir)) {
    throw DataError("cannot create output directory " + output_dir.string());
  }

  std::vector<Frame> masked(dataset.size());
  parallel_for(dataset.size(), workers,
               [&](std::size_t i) { masked[i] = mask_redundant_regions(dataset.images[i], config); });

  std::ofstream manifest(output_dir / "manifest.csv", std::ios::binary | std::ios::trunc);
  if (!manifest) throw DataError("cannot write " + (output_dir / "manifest.csv").string());
  manifest << "file,source,label\n";
  for (std::size_t i = 0; i < masked.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "img_%06zu.pgm", i);
    write_pgm(masked[i], output_dir / name);
    manifest << name << ',' << (i < dataset.sources.size() ? dataset.sources[i] : "") << ',';
    if (i < dataset.labels.size()) manifest << dataset.labels[i];
    manifest << '\n';
  }
  if (!manifest) throw DataError("failed writing manifest");
  return masked;
}

void write_roi_csv(std::ostream& out, const RoiSeries& series) {
  out << "t,active,srs1,trs1,roi_fraction\n";
  for (const RoiPoint& p : series.points) {
    out << p.t << ',' << p.active << ',' << p.srs1 << ',' << p.trs1 << ','
        << fixed6(p.roi_fraction) << '\n';
  }
}

void write_sweep_csv(std::ostream& out, const SweepCurve& curve) {
  out << "param,mean_roi\n";
  for (const auto& [value, roi] : curve.points) {
    out << compact(value) << ',' << fixed6(roi) << '\n';
  }
}

void write_histogram_csv(std::ostream& out, const MadHistogram& hist) {
  out << "bin_lo,count\n";
  for (std::size_t k = 0; k < hist.counts.size(); ++k) {
    out << compact(static_cast<double>(k) * hist.bin_width) << ',' << hist.counts[k] << '\n';
  }
}

}  // namespace evsim

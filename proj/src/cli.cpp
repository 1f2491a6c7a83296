#include "evsim/cli.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "evsim/analytics.hpp"
#include "evsim/error.hpp"
#include "evsim/io.hpp"
#include "evsim/rcm.hpp"
#include "evsim/renderer.hpp"

namespace evsim::cli {

namespace fs = std::filesystem;

namespace {

bool verbose() {
  const char* v = std::getenv("EVSIM_VERBOSE");
  return v != nullptr && *v != '\0' && std::string(v) != "0";
}

// SimConfig overrides collected from flags; applied after the config file.
struct ConfigFlags {
  std::string config_file;
  std::map<std::string, std::string> values;

  SimConfig resolve() const {
    SimConfig c = config_file.empty() ? SimConfig{} : load_config_file(config_file);
    for (const auto& [key, value] : values) c.set(key, value);
    c.validate();
    return c;
  }
};

void add_config_flags(CLI::App& cmd, ConfigFlags& flags) {
  cmd.add_option("--config", flags.config_file, "key=value config file")->check(CLI::ExistingFile);
  struct Flag {
    const char* names;
    const char* key;
    const char* help;
  };
  static constexpr Flag kFlags[] = {
      {"--region-size", "region_size", "region side N in pixels"},
      {"--spatial-feature,--feature", "spatial_feature", "edge | corner | mad | variance"},
      {"--spatial-threshold,--theta-s", "spatial_threshold", "spatial threshold"},
      {"--temporal-pixel-delta,--delta", "temporal_pixel_delta", "per-pixel change threshold"},
      {"--temporal-threshold,--theta-t", "temporal_threshold", "changed-pixel count threshold"},
      {"--noise-filter", "noise_filter", "none | median3"},
      {"--srs-zero-policy", "srs_zero_policy", "zero | hold"},
      {"--reference-update", "reference_update", "every_frame | on_event"},
      {"--edge-gradient-threshold", "edge_gradient_threshold", "Sobel L1 magnitude threshold"},
      {"--corner-k", "corner_k", "Harris k"},
      {"--corner-response-threshold", "corner_response_threshold", "Harris response threshold"},
  };
  for (const Flag& f : kFlags) {
    const std::string key = f.key;
    cmd.add_option_function<std::string>(
        f.names, [&flags, key](const std::string& v) { flags.values[key] = v; }, f.help);
  }
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw DataError("cannot create directory " + dir.string());
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  return out;
}

std::string fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

// ---------------------------------------------------------------------------

struct SimulateArgs {
  std::string input;
  std::string out;
  unsigned workers = 1;
  ConfigFlags flags;
};

int do_simulate(const SimulateArgs& a, std::ostream& out, std::ostream& err) {
  const SimConfig config = a.flags.resolve();
  const ImageSequence seq(a.input);
  ensure_dir(a.out);

  Simulator sim(config, seq.width(), seq.height(), a.workers);
  const EventStreamHeader header = make_header(config, seq.width(), seq.height());
  std::ofstream events_file = open_out(fs::path(a.out) / "events.jsonl");
  EventStreamWriter writer(events_file, header);
  RoiAccumulator roi(sim.grid().count());

  for (std::size_t i = 0; i < seq.size(); ++i) {
    const RcmOutput step = sim.step(seq.load(i));
    for (const RegionEvent& ev : step.events) writer.write(ev);
    const RoiPoint& p = roi.add_frame(step.events);
    if (verbose()) {
      err << "t=" << p.t << " active=" << p.active << "/" << sim.grid().count() << '\n';
    }
  }
  events_file.flush();
  if (!events_file) throw DataError("failed writing events.jsonl");

  const RoiSeries series = roi.finish();
  std::ofstream csv = open_out(fs::path(a.out) / "roi.csv");
  write_roi_csv(csv, series);
  out << "frames=" << series.points.size() << " regions=" << series.regions
      << " mean_roi=" << fixed6(series.mean_roi)
      << " mean_non_relevant=" << fixed6(series.mean_non_relevant) << '\n';
  return kExitOk;
}

struct RenderArgs {
  std::string events;
  std::string out;
};

int do_render(const RenderArgs& a, std::ostream& out, std::ostream& err) {
  const EventStream stream = read_event_stream(fs::path(a.events));
  const EventStreamHeader& h = stream.header;
  const std::size_t m = h.grid.count();
  ensure_dir(a.out);

  std::span<const RegionEvent> all(stream.events);
  if (all.size() % m != 0) throw StreamError("event count is not a multiple of the region count");
  RendererState state;
  std::size_t frames = 0;
  for (std::size_t begin = 0; begin < all.size(); begin += m) {
    const auto frame_events = all.subspan(begin, m);
    Frame rendered;
    if (!state.initialized) {
      state = bootstrap(frame_events, h.grid);
      rendered = state.rendered;
    } else {
      rendered = render_step(state, frame_events, h.grid, h.config.srs_zero_policy);
    }
    char name[40];
    std::snprintf(name, sizeof name, "frame_%06lld.pgm", static_cast<long long>(rendered.t));
    write_pgm(crop(rendered, h.width, h.height), fs::path(a.out) / name);
    if (verbose()) err << "rendered " << name << '\n';
    ++frames;
  }
  out << "frames=" << frames << '\n';
  return kExitOk;
}

struct DatasetArgs {
  std::string input;
  std::string labels;
  std::size_t limit = 0;
  unsigned workers = 1;
  ConfigFlags flags;

  Dataset load() const {
    std::optional<fs::path> lp;
    if (!labels.empty()) lp = labels;
    return load_dataset(input, lp, limit);
  }
};

void add_dataset_options(CLI::App& cmd, DatasetArgs& a) {
  cmd.add_option("--input", a.input, "IDX image file or image directory")->required();
  cmd.add_option("--limit", a.limit, "use only the first N images");
  cmd.add_option("--workers", a.workers, "worker threads")->check(CLI::PositiveNumber);
  add_config_flags(cmd, a.flags);
}

int do_redundancy(const DatasetArgs& a, std::ostream& out) {
  const SimConfig config = a.flags.resolve();
  const Dataset ds = a.load();
  const RedundancyReport r = spatial_redundancy(ds.images, config, a.workers);
  out << "images=" << ds.size() << " mean_redundancy=" << fixed6(r.mean)
      << " mean_roi=" << fixed6(1.0 - r.mean) << '\n';
  return kExitOk;
}

struct SweepArgs {
  DatasetArgs data;
  std::string param;
  std::vector<double> values;
  bool sequence = false;
  std::string out;
};

int do_sweep(const SweepArgs& a, std::ostream& out) {
  const SimConfig config = a.data.flags.resolve();
  const SweepParameter param = parse_sweep_parameter(a.param);
  const Dataset ds = a.data.load();
  const SweepCurve curve = a.sequence
                               ? sweep_sequence(ds.images, config, param, a.values, a.data.workers)
                               : sweep(ds.images, config, param, a.values, a.data.workers);
  if (a.out.empty()) {
    write_sweep_csv(out, curve);
  } else {
    std::ofstream f = open_out(a.out);
    write_sweep_csv(f, curve);
  }
  return kExitOk;
}

struct HistArgs {
  DatasetArgs data;
  double bin_width = 1.0;
  std::string out;
};

int do_hist(const HistArgs& a, std::ostream& out) {
  const SimConfig config = a.data.flags.resolve();
  const Dataset ds = a.data.load();
  const MadHistogram hist = mad_histogram(ds.images, config, a.bin_width, a.data.workers);
  if (a.out.empty()) {
    write_histogram_csv(out, hist);
  } else {
    std::ofstream f = open_out(a.out);
    write_histogram_csv(f, hist);
  }
  return kExitOk;
}

struct ExportArgs {
  DatasetArgs data;
  std::string out;
};

int do_export(const ExportArgs& a, std::ostream& out) {
  const SimConfig config = a.data.flags.resolve();
  const Dataset ds = a.data.load();
  export_roi_dataset(ds, config, a.out, a.data.workers);
  out << "images=" << ds.size() << " out=" << a.out << '\n';
  return kExitOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Region-level event camera simulator", "evsim"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "frame sequence -> events.jsonl + roi.csv");
  simulate->add_option("--input", sim.input, "directory of PGM/PPM frames")->required();
  simulate->add_option("--out", sim.out, "output directory")->required();
  simulate->add_option("--workers", sim.workers, "worker threads")->check(CLI::PositiveNumber);
  add_config_flags(*simulate, sim.flags);

  RenderArgs ren;
  auto* render = app.add_subcommand("render", "events.jsonl -> reconstructed PGM frames");
  render->add_option("--events", ren.events, "event stream")->required();
  render->add_option("--out", ren.out, "output directory")->required();

  DatasetArgs red;
  auto* redundancy = app.add_subcommand("redundancy", "mean spatial redundancy of a dataset");
  add_dataset_options(*redundancy, red);

  SweepArgs sw;
  auto* sweep_cmd = app.add_subcommand("sweep", "ROI fraction across parameter values");
  add_dataset_options(*sweep_cmd, sw.data);
  sweep_cmd->add_option("--param", sw.param, "spatial_threshold | region_size")->required();
  sweep_cmd->add_option("--values", sw.values, "comma-separated increasing values")
      ->required()
      ->delimiter(',');
  sweep_cmd->add_flag("--sequence", sw.sequence, "treat the input as a temporal sequence");
  sweep_cmd->add_option("--out", sw.out, "CSV output (stdout when omitted)");

  HistArgs hs;
  auto* hist = app.add_subcommand("hist", "histogram of per-region MAD");
  add_dataset_options(*hist, hs.data);
  hist->add_option("--bin-width", hs.bin_width, "bin width in intensity units");
  hist->add_option("--out", hs.out, "CSV output (stdout when omitted)");

  ExportArgs ex;
  auto* export_cmd = app.add_subcommand("export", "write the dataset with redundant regions zeroed");
  add_dataset_options(*export_cmd, ex.data);
  export_cmd->add_option("--labels", ex.data.labels, "IDX label file");
  export_cmd->add_option("--out", ex.out, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "evsim: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (simulate->parsed()) return do_simulate(sim, out, err);
    if (render->parsed()) return do_render(ren, out, err);
    if (redundancy->parsed()) return do_redundancy(red, out);
    if (sweep_cmd->parsed()) return do_sweep(sw, out);
    if (hist->parsed()) return do_hist(hs, out);
    if (export_cmd->parsed()) return do_export(ex, out);
  } catch (const ConfigError& e) {
    err << "evsim: configuration error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "evsim: " << e.what() << '\n';
    return kExitData;
  }
  err << "evsim: no subcommand\n";
  return kExitUsage;
}

}  // namespace evsim::cli

#include "evsim/io.hpp"

#include <algorithm>
#include <cctype>
#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <istream>
#include <iterator>
#include <ostream>
#include <sstream>

#include "evsim/error.hpp"
#include "json.hpp"

namespace evsim {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace {

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Cursor over a PNM header: whitespace-separated tokens with '#' comments.
class PnmHeader {
 public:
  explicit PnmHeader(const std::string& bytes) : bytes_(bytes) {}

  std::string token() {
    skip_space();
    std::string out;
    while (pos_ < bytes_.size() && !std::isspace(static_cast<unsigned char>(bytes_[pos_]))) {
      out.push_back(bytes_[pos_++]);
    }
    if (out.empty()) throw DataError("truncated PNM header");
    return out;
  }

  int number() {
    const std::string t = token();
    if (!std::all_of(t.begin(), t.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); }) ||
        t.size() > 9) {
      throw DataError("bad PNM header field '" + t + "'");
    }
    return std::stoi(t);
  }

  // Exactly one whitespace byte separates the header from the raster.
  std::size_t raster_offset() {
    if (pos_ >= bytes_.size() || !std::isspace(static_cast<unsigned char>(bytes_[pos_]))) {
      throw DataError("truncated PNM header");
    }
    return pos_ + 1;
  }

 private:
  void skip_space() {
    while (pos_ < bytes_.size()) {
      const char c = bytes_[pos_];
      if (c == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  const std::string& bytes_;
  std::size_t pos_ = 0;
};

bool is_image_file(const fs::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext == ".pgm" || ext == ".ppm" || ext == ".pnm";
}

std::uint32_t read_be32(const std::string& bytes, std::size_t offset) {
  return (static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[offset])) << 24) |
         (static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[offset + 1])) << 16) |
         (static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[offset + 2])) << 8) |
         static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[offset + 3]));
}

ordered_json config_to_json(const SimConfig& c) {
  ordered_json j;
  j["region_size"] = c.region_size;
  j["spatial_feature"] = std::string(to_string(c.spatial_feature));
  j["spatial_threshold"] = c.spatial_threshold;
  j["temporal_pixel_delta"] = c.temporal_pixel_delta;
  j["temporal_threshold"] = c.temporal_threshold;
  j["noise_filter"] = std::string(to_string(c.noise_filter));
  j["srs_zero_policy"] = std::string(to_string(c.srs_zero_policy));
  j["reference_update"] = std::string(to_string(c.reference_update));
  j["edge_gradient_threshold"] = c.edge_gradient_threshold;
  j["corner_k"] = c.corner_k;
  j["corner_response_threshold"] = c.corner_response_threshold;
  return j;
}

SimConfig config_from_json(const ordered_json& j) {
  SimConfig c;
  c.region_size = j.at("region_size").get<int>();
  c.spatial_feature = parse_spatial_feature(j.at("spatial_feature").get<std::string>());
  c.spatial_threshold = j.at("spatial_threshold").get<double>();
  c.temporal_pixel_delta = j.at("temporal_pixel_delta").get<int>();
  c.temporal_threshold = j.at("temporal_threshold").get<int>();
  c.noise_filter = parse_noise_filter(j.at("noise_filter").get<std::string>());
  c.srs_zero_policy = parse_srs_zero_policy(j.at("srs_zero_policy").get<std::string>());
  c.reference_update = parse_reference_update(j.at("reference_update").get<std::string>());
  c.edge_gradient_threshold = j.at("edge_gradient_threshold").get<int>();
  c.corner_k = j.at("corner_k").get<double>();
  c.corner_response_threshold = j.at("corner_response_threshold").get<double>();
  return c;
}

void check_event(const RegionEvent& ev, std::size_t region_count, std::size_t region_pixels) {
  if (ev.rid >= region_count) {
    throw StreamError("rid " + std::to_string(ev.rid) + " outside grid of " +
                      std::to_string(region_count) + " regions");
  }
  if (ev.srs > 1 || ev.trs > 1) throw StreamError("relevance bits must be 0 or 1");
  if (ev.payload.has_value() != ev.active()) {
    throw StreamError("payload must be present exactly for active regions (rid " +
                      std::to_string(ev.rid) + ")");
  }
  if (ev.payload && ev.payload->size() != region_pixels) {
    throw StreamError("payload of rid " + std::to_string(ev.rid) + " has " +
                      std::to_string(ev.payload->size()) + " pixels, expected " +
                      std::to_string(region_pixels));
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Images

Frame decode_pnm(const std::string& bytes, std::int64_t t) {
  PnmHeader header(bytes);
  const std::string magic = header.token();
  if (magic != "P5" && magic != "P6") {
    throw DataError("unsupported PNM type '" + magic + "' (expected P5 or P6)");
  }
  const int width = header.number();
  const int height = header.number();
  const int maxval = header.number();
  if (width < 1 || height < 1) throw DataError("PNM image has zero size");
  if (maxval < 1 || maxval > 255) throw DataError("PNM maxval must be in 1..255");
  const std::size_t offset = header.raster_offset();
  const std::size_t channels = magic == "P6" ? 3 : 1;
  const std::size_t needed = static_cast<std::size_t>(width) * height * channels;
  if (bytes.size() - std::min(offset, bytes.size()) < needed) {
    throw DataError("truncated PNM raster");
  }
  std::vector<Pixel> raster(needed);
  for (std::size_t i = 0; i < needed; ++i) {
    unsigned v = static_cast<unsigned char>(bytes[offset + i]);
    if (v > static_cast<unsigned>(maxval)) throw DataError("PNM sample exceeds maxval");
    if (maxval != 255) v = (v * 255 + static_cast<unsigned>(maxval) / 2) / maxval;
    raster[i] = static_cast<Pixel>(v);
  }
  if (channels == 3) return to_grayscale(RgbFrame{width, height, std::move(raster)}, t);
  return Frame(width, height, t, std::move(raster));
}

Frame read_pnm(const fs::path& path, std::int64_t t) {
  try {
    return decode_pnm(read_file(path), t);
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

std::string encode_pgm(const Frame& frame) {
  if (frame.empty()) throw DataError("cannot encode an empty frame as PGM");
  if (frame.pixels.size() != static_cast<std::size_t>(frame.width) * frame.height) {
    throw DataError("frame buffer size does not match dimensions");
  }
  std::string out = "P5\n" + std::to_string(frame.width) + " " + std::to_string(frame.height) +
                    "\n255\n";
  out.append(frame.pixels.begin(), frame.pixels.end());
  return out;
}

void write_pgm(const Frame& frame, const fs::path& path) {
  const std::string bytes = encode_pgm(frame);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError("failed writing " + path.string());
}

ImageSequence::ImageSequence(const fs::path& directory) {
  std::error_code ec;
  if (!fs::is_directory(directory, ec)) {
    throw DataError(directory.string() + " is not a directory");
  }
  for (const auto& entry : fs::directory_iterator(directory)) {
    if (entry.is_regular_file() && is_image_file(entry.path())) files_.push_back(entry.path());
  }
  if (files_.empty()) throw DataError("no PGM/PPM images in " + directory.string());
  std::sort(files_.begin(), files_.end(),
            [](const fs::path& a, const fs::path& b) { return a.filename() < b.filename(); });
  const Frame first = read_pnm(files_.front());
  width_ = first.width;
  height_ = first.height;
}

Frame ImageSequence::load(std::size_t i) const {
  Frame f = read_pnm(files_.at(i), static_cast<std::int64_t>(i));
  if (f.width != width_ || f.height != height_) {
    throw DataError(files_[i].string() + ": dimensions " + std::to_string(f.width) + "x" +
                    std::to_string(f.height) + " differ from " + std::to_string(width_) + "x" +
                    std::to_string(height_));
  }
  return f;
}

std::vector<Frame> load_image_sequence(const fs::path& directory) {
  const ImageSequence seq(directory);
  std::vector<Frame> frames;
  frames.reserve(seq.size());
  for (std::size_t i = 0; i < seq.size(); ++i) frames.push_back(seq.load(i));
  return frames;
}

Dataset load_idx(const fs::path& images, const std::optional<fs::path>& labels,
                 std::size_t limit) {
  const std::string bytes = read_file(images);
  if (bytes.size() < 16) throw DataError(images.string() + ": truncated IDX header");
  const std::uint32_t magic = read_be32(bytes, 0);
  if (magic != 2051) {
    throw DataError(images.string() + ": bad IDX image magic " + std::to_string(magic) +
                    " (expected 2051)");
  }
  const std::uint32_t count = read_be32(bytes, 4);
  const std::uint32_t rows = read_be32(bytes, 8);
  const std::uint32_t cols = read_be32(bytes, 12);
  if (rows == 0 || cols == 0 || rows > 65535 || cols > 65535) {
    throw DataError(images.string() + ": invalid IDX image dimensions");
  }
  const std::size_t plane = static_cast<std::size_t>(rows) * cols;
  if ((bytes.size() - 16) / plane < count) {
    throw DataError(images.string() + ": truncated IDX payload (" + std::to_string(count) +
                    " images declared)");
  }

  Dataset ds;
  const std::size_t n = limit > 0 ? std::min<std::size_t>(limit, count) : count;
  ds.images.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto* begin = reinterpret_cast<const Pixel*>(bytes.data() + 16 + i * plane);
    ds.images.emplace_back(static_cast<int>(cols), static_cast<int>(rows),
                           static_cast<std::int64_t>(i), std::vector<Pixel>(begin, begin + plane));
    ds.sources.push_back(images.filename().string() + "#" + std::to_string(i));
  }

  if (labels) {
    const std::string lb = read_file(*labels);
    if (lb.size() < 8) throw DataError(labels->string() + ": truncated IDX header");
    const std::uint32_t lmagic = read_be32(lb, 0);
    if (lmagic != 2049) {
      throw DataError(labels->string() + ": bad IDX label magic " + std::to_string(lmagic) +
                      " (expected 2049)");
    }
    const std::uint32_t lcount = read_be32(lb, 4);
    if (lcount != count) {
      throw DataError(labels->string() + ": " + std::to_string(lcount) + " labels for " +
                      std::to_string(count) + " images");
    }
    if (lb.size() - 8 < lcount) throw DataError(labels->string() + ": truncated IDX payload");
    ds.labels.reserve(n);
    for (std::size_t i = 0; i < n; ++i) ds.labels.push_back(static_cast<unsigned char>(lb[8 + i]));
  }
  return ds;
}

Dataset load_dataset(const fs::path& input, const std::optional<fs::path>& labels,
                     std::size_t limit) {
  std::error_code ec;
  if (fs::is_directory(input, ec)) {
    if (labels) throw ConfigError("labels are only supported for IDX inputs");
    const ImageSequence seq(input);
    Dataset ds;
    const std::size_t n = limit > 0 ? std::min(limit, seq.size()) : seq.size();
    for (std::size_t i = 0; i < n; ++i) {
      ds.images.push_back(seq.load(i));
      ds.sources.push_back(seq.files()[i].filename().string());
    }
    return ds;
  }
  return load_idx(input, labels, limit);
}

// ---------------------------------------------------------------------------
// Event streams

EventStreamHeader make_header(const SimConfig& config, int width, int height) {
  EventStreamHeader h;
  h.width = width;
  h.height = height;
  h.grid = build_grid(width, height, config.region_size);
  h.config = config;
  return h;
}

std::string encode_header(const EventStreamHeader& header) {
  ordered_json j;
  j["format"] = "evsim-events";
  j["version"] = header.version;
  j["width"] = header.width;
  j["height"] = header.height;
  j["region_size"] = header.grid.region_size;
  j["grid_rows"] = header.grid.grid_rows;
  j["grid_cols"] = header.grid.grid_cols;
  j["config"] = config_to_json(header.config);
  return j.dump();
}

EventStreamHeader decode_header(const std::string& line) {
  try {
    const auto j = ordered_json::parse(line);
    if (j.at("format").get<std::string>() != "evsim-events") {
      throw StreamError("not an evsim event stream");
    }
    EventStreamHeader h;
    h.version = j.at("version").get<int>();
    if (h.version != kEventFormatVersion) {
      throw StreamError("unsupported event stream version " + std::to_string(h.version));
    }
    h.width = j.at("width").get<int>();
    h.height = j.at("height").get<int>();
    h.config = config_from_json(j.at("config"));
    h.config.validate();
    const int n = j.at("region_size").get<int>();
    if (n != h.config.region_size) throw StreamError("region_size disagrees with config echo");
    h.grid = build_grid(h.width, h.height, n);
    if (h.grid.grid_rows != j.at("grid_rows").get<int>() ||
        h.grid.grid_cols != j.at("grid_cols").get<int>()) {
      throw StreamError("grid dimensions disagree with frame size");
    }
    return h;
  } catch (const nlohmann::json::exception& e) {
    throw StreamError(std::string("malformed header: ") + e.what());
  } catch (const ConfigError& e) {
    throw StreamError(std::string("invalid header: ") + e.what());
  }
}

std::string encode_event(const RegionEvent& ev) {
  char head[160];
  std::snprintf(head, sizeof head,
                "{\"t\":%" PRId64 ",\"rid\":%" PRIu32 ",\"srs\":%u,\"trs\":%u,\"ss\":%.6f,"
                "\"mc\":%" PRId64,
                ev.t, ev.rid, static_cast<unsigned>(ev.srs), static_cast<unsigned>(ev.trs),
                ev.spatial_score, ev.mismatch_count);
  std::string out(head);
  if (ev.payload) {
    out += ",\"px\":[";
    for (std::size_t i = 0; i < ev.payload->size(); ++i) {
      if (i != 0) out.push_back(',');
      out += std::to_string((*ev.payload)[i]);
    }
    out.push_back(']');
  }
  out.push_back('}');
  return out;
}

RegionEvent decode_event(const std::string& line) {
  try {
    const auto j = nlohmann::json::parse(line);
    if (!j.is_object()) throw StreamError("event is not a JSON object");
    for (const auto& [key, _] : j.items()) {
      if (key != "t" && key != "rid" && key != "srs" && key != "trs" && key != "ss" &&
          key != "mc" && key != "px") {
        throw StreamError("unknown event key '" + key + "'");
      }
    }
    RegionEvent ev;
    ev.t = j.at("t").get<std::int64_t>();
    ev.rid = j.at("rid").get<RegionId>();
    const int srs = j.at("srs").get<int>();
    const int trs = j.at("trs").get<int>();
    if ((srs != 0 && srs != 1) || (trs != 0 && trs != 1)) {
      throw StreamError("relevance bits must be 0 or 1");
    }
    ev.srs = static_cast<std::uint8_t>(srs);
    ev.trs = static_cast<std::uint8_t>(trs);
    ev.spatial_score = j.at("ss").get<double>();
    ev.mismatch_count = j.at("mc").get<std::int64_t>();
    if (ev.t < 0 || ev.spatial_score < 0.0 || ev.mismatch_count < 0) {
      throw StreamError("negative field in event");
    }
    if (const auto it = j.find("px"); it != j.end()) {
      std::vector<Pixel> px;
      px.reserve(it->size());
      for (const auto& v : *it) {
        const int p = v.get<int>();
        if (p < 0 || p > 255) throw StreamError("payload intensity out of range");
        px.push_back(static_cast<Pixel>(p));
      }
      ev.payload = std::move(px);
    }
    return ev;
  } catch (const nlohmann::json::exception& e) {
    throw StreamError(std::string("malformed event: ") + e.what());
  }
}

EventStreamWriter::EventStreamWriter(std::ostream& out, const EventStreamHeader& header)
    : out_(out), region_pixels_(header.grid.region_pixels()) {
  out_ << encode_header(header) << '\n';
}

void EventStreamWriter::write(const RegionEvent& ev) {
  const auto rid = static_cast<std::int64_t>(ev.rid);
  if (ev.t < last_t_ || (ev.t == last_t_ && rid <= last_rid_)) {
    throw StreamError("events must be written in (t, rid) order");
  }
  if (ev.payload && ev.payload->size() != region_pixels_) {
    throw StreamError("payload size does not match region size");
  }
  last_t_ = ev.t;
  last_rid_ = rid;
  out_ << encode_event(ev) << '\n';
}

void write_event_stream(std::ostream& out, const EventStreamHeader& header,
                        const std::vector<RegionEvent>& events) {
  EventStreamWriter writer(out, header);
  for (const RegionEvent& ev : events) writer.write(ev);
}

void write_event_stream(const fs::path& path, const EventStreamHeader& header,
                        const std::vector<RegionEvent>& events) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  write_event_stream(out, header, events);
  out.flush();
  if (!out) throw DataError("failed writing " + path.string());
}

EventStream read_event_stream(std::istream& in) {
  EventStream stream;
  std::string line;
  std::size_t lineno = 1;
  if (!std::getline(in, line)) throw StreamError("line 1: missing header");
  try {
    stream.header = decode_header(line);
  } catch (const StreamError& e) {
    throw StreamError("line 1: " + std::string(e.what()));
  }
  const std::size_t regions = stream.header.grid.count();
  const std::size_t pixels = stream.header.grid.region_pixels();
  std::int64_t last_t = -1;
  std::int64_t last_rid = -1;
  while (std::getline(in, line)) {
    ++lineno;
    try {
      RegionEvent ev = decode_event(line);
      check_event(ev, regions, pixels);
      const auto rid = static_cast<std::int64_t>(ev.rid);
      if (ev.t < last_t || (ev.t == last_t && rid <= last_rid)) {
        throw StreamError("event out of (t, rid) order");
      }
      last_t = ev.t;
      last_rid = rid;
      stream.events.push_back(std::move(ev));
    } catch (const StreamError& e) {
      throw StreamError("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return stream;
}

EventStream read_event_stream(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  try {
    return read_event_stream(in);
  } catch (const StreamError& e) {
    throw StreamError(path.string() + ": " + e.what());
  }
}

}  // namespace evsim

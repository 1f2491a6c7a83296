#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "evsim/core.hpp"
#include "evsim/events.hpp"

namespace evsim {

// ---------------------------------------------------------------------------
// Images

/// Decodes a binary PGM (P5) or PPM (P6) file; colour is converted to luma.
Frame read_pnm(const std::filesystem::path& path, std::int64_t t = 0);
Frame decode_pnm(const std::string& bytes, std::int64_t t = 0);

/// Binary PGM, maxval 255, header "P5\n<w> <h>\n255\n".
std::string encode_pgm(const Frame& frame);
void write_pgm(const Frame& frame, const std::filesystem::path& path);

/// Lexicographically ordered image files of a directory, decoded on demand.
class ImageSequence {
 public:
  explicit ImageSequence(const std::filesystem::path& directory);

  [[nodiscard]] std::size_t size() const { return files_.size(); }
  [[nodiscard]] int width() const { return width_; }
  [[nodiscard]] int height() const { return height_; }
  [[nodiscard]] const std::vector<std::filesystem::path>& files() const { return files_; }

  /// Frame i with t = i. Throws DataError on a dimension mismatch.
  [[nodiscard]] Frame load(std::size_t i) const;

 private:
  std::vector<std::filesystem::path> files_;
  int width_ = 0;
  int height_ = 0;
};

std::vector<Frame> load_image_sequence(const std::filesystem::path& directory);

/// Independent images plus optional labels and a source name per image.
struct Dataset {
  std::vector<Frame> images;
  std::vector<int> labels;  // empty when unlabeled
  std::vector<std::string> sources;

  [[nodiscard]] std::size_t size() const { return images.size(); }
};

/// IDX image archive (magic 2051) and optional IDX label file (magic 2049).
Dataset load_idx(const std::filesystem::path& images,
                 const std::optional<std::filesystem::path>& labels = std::nullopt,
                 std::size_t limit = 0);

/// A regular file is read as IDX, a directory as an image sequence.
/// `limit` > 0 keeps only the first `limit` images.
Dataset load_dataset(const std::filesystem::path& input,
                     const std::optional<std::filesystem::path>& labels = std::nullopt,
                     std::size_t limit = 0);

// ---------------------------------------------------------------------------
// Event streams

inline constexpr int kEventFormatVersion = 1;

struct EventStreamHeader {
  int version = kEventFormatVersion;
  int width = 0;   // original, pre-padding
  int height = 0;
  RegionGrid grid;
  SimConfig config;

  friend bool operator==(const EventStreamHeader&, const EventStreamHeader&) = default;
};

EventStreamHeader make_header(const SimConfig& config, int width, int height);

std::string encode_header(const EventStreamHeader& header);
EventStreamHeader decode_header(const std::string& line);
/// One event line without the trailing newline; "ss" uses exactly six decimals.
std::string encode_event(const RegionEvent& event);
RegionEvent decode_event(const std::string& line);

/// Incremental JSON-lines writer. Enforces (t, rid) ordering.
class EventStreamWriter {
 public:
  EventStreamWriter(std::ostream& out, const EventStreamHeader& header);

  void write(const RegionEvent& event);

 private:
  std::ostream& out_;
  std::size_t region_pixels_;
  std::int64_t last_t_ = -1;
  std::int64_t last_rid_ = -1;
};

struct EventStream {
  EventStreamHeader header;
  std::vector<RegionEvent> events;
};

void write_event_stream(std::ostream& out, const EventStreamHeader& header,
                        const std::vector<RegionEvent>& events);
void write_event_stream(const std::filesystem::path& path, const EventStreamHeader& header,
                        const std::vector<RegionEvent>& events);
EventStream read_event_stream(std::istream& in);
EventStream read_event_stream(const std::filesystem::path& path);

}  // namespace evsim

#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "evsim/core.hpp"

namespace evsim {

/// Per-region output of one RCM step. The payload carries raw (unfiltered)
/// pixels and is present exactly when the region is Active.
struct RegionEvent {
  std::int64_t t = 0;
  RegionId rid = 0;
  std::uint8_t srs = 0;
  std::uint8_t trs = 0;
  double spatial_score = 0.0;
  std::int64_t mismatch_count = 0;
  std::optional<std::vector<Pixel>> payload;

  [[nodiscard]] bool active() const { return srs == 1 && trs == 1; }

  friend bool operator==(const RegionEvent&, const RegionEvent&) = default;
};

}  // namespace evsim

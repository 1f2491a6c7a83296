#pragma once

#include <span>

#include "evsim/core.hpp"
#include "evsim/events.hpp"

namespace evsim {

/// The previously rendered frame R(t-1), at padded dimensions.
struct RendererState {
  Frame rendered;
  bool initialized = false;
};

/// Assembles the first frame from a complete set of payload-carrying events.
RendererState bootstrap(std::span<const RegionEvent> events, const RegionGrid& grid);

/// Region-wise reconstruction of R(t):
///   srs=1, trs=1  -> current payload
///   srs=1, trs=0  -> region of R(t-1)
///   srs=0         -> zeros (policy zero) or region of R(t-1) (policy hold)
/// `events` must hold exactly one event per region, sorted by rid.
/// Updates `state` and returns the new frame.
Frame render_step(RendererState& state, std::span<const RegionEvent> events,
                  const RegionGrid& grid, SrsZeroPolicy policy);

}  // namespace evsim

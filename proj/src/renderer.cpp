#include "evsim/renderer.hpp"

#include <string>

#include "evsim/error.hpp"

namespace evsim {

namespace {

void check_frame_events(std::span<const RegionEvent> events, const RegionGrid& grid) {
  if (events.size() != grid.count()) {
    throw StreamError("expected " + std::to_string(grid.count()) + " region events, got " +
                      std::to_string(events.size()));
  }
  for (std::size_t i = 0; i < events.size(); ++i) {
    const RegionEvent& ev = events[i];
    if (ev.rid != i) {
      throw StreamError("region events out of order at position " + std::to_string(i) +
                        " (rid " + std::to_string(ev.rid) + ")");
    }
    if (ev.t != events.front().t) throw StreamError("region events span several frames");
    if (ev.payload && ev.payload->size() != grid.region_pixels()) {
      throw StreamError("payload of region " + std::to_string(ev.rid) + " has " +
                        std::to_string(ev.payload->size()) + " pixels");
    }
  }
}

}  // namespace

RendererState bootstrap(std::span<const RegionEvent> events, const RegionGrid& grid) {
  check_frame_events(events, grid);
  RendererState state;
  state.rendered = Frame(grid.padded_width, grid.padded_height, events.front().t);
  for (const RegionEvent& ev : events) {
    if (!ev.payload) {
      throw StreamError("bootstrap frame lacks a payload for region " + std::to_string(ev.rid));
    }
    write_region(state.rendered, grid, ev.rid, *ev.payload);
  }
  state.initialized = true;
  return state;
}

Frame render_step(RendererState& state, std::span<const RegionEvent> events,
                  const RegionGrid& grid, SrsZeroPolicy policy) {
  if (!state.initialized) throw StreamError("renderer used before bootstrap");
  if (state.rendered.width != grid.padded_width || state.rendered.height != grid.padded_height) {
    throw ConfigError("renderer state does not match the region grid");
  }
  check_frame_events(events, grid);

  Frame next = state.rendered;
  next.t = events.front().t;
  for (const RegionEvent& ev : events) {
    if (ev.active()) {
      if (!ev.payload) {
        throw StreamError("active region " + std::to_string(ev.rid) + " at t=" +
                          std::to_string(ev.t) + " has no payload");
      }
      write_region(next, grid, ev.rid, *ev.payload);
    } else if (ev.srs == 0 && policy == SrsZeroPolicy::zero) {
      fill_region(next, grid, ev.rid, 0);
    }
    // Otherwise the region keeps R(t-1).
  }
  state.rendered = next;
  return next;
}

}  // namespace evsim

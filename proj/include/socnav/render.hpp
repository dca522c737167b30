#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "socnav/core.hpp"
#include "socnav/sim.hpp"

namespace socnav {

struct Rgb {
  std::uint8_t r = 0, g = 0, b = 0;
  friend bool operator==(const Rgb&, const Rgb&) = default;
};

struct Image {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;  // row-major RGB, row 0 at the top

  Rgb at(int x, int y) const;
  void set(int x, int y, Rgb c);
  friend bool operator==(const Image&, const Image&) = default;
};

struct ColorMap {
  Rgb free{255, 255, 255};
  Rgb obstacle{60, 60, 60};
  Rgb robot{30, 90, 220};
  Rgb heading{10, 20, 70};
  Rgb pedestrian{220, 50, 40};
  Rgb goal{20, 160, 60};
  Rgb trail{150, 185, 245};
};

struct FrameSpec {
  double pixels_per_meter = 20.0;
  /// Camera window in world coordinates; the whole map when unset.
  std::optional<Vec2> view_min;
  std::optional<Vec2> view_size;
  ColorMap colors;
  int trail_length = 50;  // ticks of robot history drawn behind it
};

struct FrameOverlay {
  std::optional<Vec2> goal;
  double goal_radius = 0.3;
  std::vector<Vec2> trail;
};

/// Top-down schematic of one state. Throws UsageError for a bad scale or a window that does not
/// lie inside the map.
Image render_frame(const SimState& state, const EnvironmentMap& env, const FrameSpec& spec,
                   const FrameOverlay& overlay = {});

void write_png(const std::filesystem::path& path, const Image& image);
Image read_png(const std::filesystem::path& path);

/// Renders every tick of `log` to `<dir>/%06d.png` using up to `threads` workers.
void render_episode_frames(const EpisodeLog& log, const EnvironmentMap& env, const FrameSpec& spec,
                           const std::filesystem::path& dir, unsigned threads = 0);

}  // namespace socnav

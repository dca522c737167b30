#include "socnav/render.hpp"

#include <png.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <memory>
#include <mutex>
#include <thread>

namespace socnav {

namespace fs = std::filesystem;

Rgb Image::at(int x, int y) const {
  const std::size_t i = (static_cast<std::size_t>(y) * width + x) * 3;
  return {pixels[i], pixels[i + 1], pixels[i + 2]};
}

void Image::set(int x, int y, Rgb c) {
  if (x < 0 || y < 0 || x >= width || y >= height) return;
  const std::size_t i = (static_cast<std::size_t>(y) * width + x) * 3;
  pixels[i] = c.r;
  pixels[i + 1] = c.g;
  pixels[i + 2] = c.b;
}

namespace {

struct Camera {
  Vec2 min;
  double ppm;
  int width;
  int height;

  Vec2 world(int px, int py) const {
    return {min.x + (px + 0.5) / ppm, min.y + (height - py - 0.5) / ppm};
  }
  double px(double x) const { return (x - min.x) * ppm - 0.5; }
  double py(double y) const { return height - (y - min.y) * ppm - 0.5; }
};

template <class Inside>
void fill_region(Image& img, const Camera& cam, Vec2 center, double reach, Rgb color, Inside inside) {
  const int x0 = std::max(0, static_cast<int>(std::floor(cam.px(center.x - reach))));
  const int x1 = std::min(img.width - 1, static_cast<int>(std::ceil(cam.px(center.x + reach))));
  const int y0 = std::max(0, static_cast<int>(std::floor(cam.py(center.y + reach))));
  const int y1 = std::min(img.height - 1, static_cast<int>(std::ceil(cam.py(center.y - reach))));
  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) {
      if (inside(cam.world(x, y) - center)) img.set(x, y, color);
    }
  }
}

void disc(Image& img, const Camera& cam, Vec2 c, double r, Rgb color) {
  fill_region(img, cam, c, r, color, [r](Vec2 d) { return norm_sq(d) <= r * r; });
}

}  // namespace

Image render_frame(const SimState& state, const EnvironmentMap& env, const FrameSpec& spec,
                   const FrameOverlay& overlay) {
  if (!(spec.pixels_per_meter > 0.0)) throw UsageError("pixels per meter must be positive");
  const Vec2 map_min = env.origin();
  const Vec2 map_size{env.width() * env.resolution(), env.height() * env.resolution()};
  const Vec2 vmin = spec.view_min.value_or(map_min);
  const Vec2 vsize = spec.view_size.value_or(map_size);
  constexpr double eps = 1e-9;
  if (!(vsize.x > 0.0 && vsize.y > 0.0) || vmin.x < map_min.x - eps || vmin.y < map_min.y - eps ||
      vmin.x + vsize.x > map_min.x + map_size.x + eps || vmin.y + vsize.y > map_min.y + map_size.y + eps) {
    throw UsageError("camera window lies outside the map");
  }

  Camera cam{vmin, spec.pixels_per_meter,
             std::max(1, static_cast<int>(std::lround(vsize.x * spec.pixels_per_meter))),
             std::max(1, static_cast<int>(std::lround(vsize.y * spec.pixels_per_meter)))};
  Image img;
  img.width = cam.width;
  img.height = cam.height;
  img.pixels.resize(static_cast<std::size_t>(img.width) * img.height * 3);
  const auto& c = spec.colors;

  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      img.set(x, y, env.is_free_at(cam.world(x, y)) ? c.free : c.obstacle);
    }
  }

  const double dot_r = 1.0 / spec.pixels_per_meter;
  const std::size_t keep = static_cast<std::size_t>(std::max(0, spec.trail_length));
  const std::size_t first = overlay.trail.size() > keep ? overlay.trail.size() - keep : 0;
  for (std::size_t i = first; i < overlay.trail.size(); ++i) disc(img, cam, overlay.trail[i], dot_r, c.trail);

  if (overlay.goal) {
    const double outer = overlay.goal_radius;
    const double inner = std::max(0.0, outer - 2.0 / spec.pixels_per_meter);
    fill_region(img, cam, *overlay.goal, outer, c.goal, [&](Vec2 d) {
      const double s = norm_sq(d);
      return s <= outer * outer && s >= inner * inner;
    });
  }

  for (const auto& p : state.pedestrians) disc(img, cam, p.position(), p.radius, c.pedestrian);

  const auto& robot = state.robot;
  disc(img, cam, robot.position(), robot.radius, c.robot);
  const Vec2 facing = unit_from_angle(robot.pose.heading);
  const double half_angle = 0.4;
  const double cos_half = std::cos(half_angle);
  fill_region(img, cam, robot.position(), robot.radius, c.heading, [&](Vec2 d) {
    const double n = norm(d);
    return n <= robot.radius && n > 0.0 && dot(d, facing) >= cos_half * n;
  });
  return img;
}

namespace {

struct FileCloser {
  void operator()(FILE* f) const {
    if (f) std::fclose(f);
  }
};

}  // namespace

void write_png(const fs::path& path, const Image& image) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::unique_ptr<FILE, FileCloser> f(std::fopen(path.c_str(), "wb"));
  if (!f) throw std::runtime_error("cannot write " + path.string());
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw std::runtime_error("libpng initialisation failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw std::runtime_error("cannot encode " + path.string());
  }
  png_init_io(png, f.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(image.width), static_cast<png_uint_32>(image.height), 8,
               PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int y = 0; y < image.height; ++y) {
    png_write_row(png, image.pixels.data() + static_cast<std::size_t>(y) * image.width * 3);
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

Image read_png(const fs::path& path) {
  png_image img{};
  img.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&img, path.c_str())) throw ParseError("cannot read " + path.string());
  img.format = PNG_FORMAT_RGB;
  Image out;
  out.width = static_cast<int>(img.width);
  out.height = static_cast<int>(img.height);
  out.pixels.resize(PNG_IMAGE_SIZE(img));
  if (!png_image_finish_read(&img, nullptr, out.pixels.data(), 0, nullptr)) {
    png_image_free(&img);
    throw ParseError("cannot decode " + path.string());
  }
  return out;
}

void render_episode_frames(const EpisodeLog& log, const EnvironmentMap& env, const FrameSpec& spec,
                           const fs::path& dir, unsigned threads) {
  fs::create_directories(dir);
  std::vector<Vec2> path;
  path.reserve(log.records.size());
  for (const auto& r : log.records) path.push_back(r.state.robot.position());

  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(1, log.records.size())));
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto work = [&] {
    try {
      for (std::size_t i = next++; i < log.records.size(); i = next++) {
        FrameOverlay overlay;
        overlay.goal = log.goal;
        overlay.goal_radius = log.goal_radius;
        overlay.trail.assign(path.begin(), path.begin() + static_cast<std::ptrdiff_t>(i));
        char name[32];
        std::snprintf(name, sizeof(name), "%06zu.png", i);
        write_png(dir / name, render_frame(log.records[i].state, env, spec, overlay));
      }
    } catch (...) {
      std::lock_guard lock(failure_mutex);
      if (!failure) failure = std::current_exception();
      next = log.records.size();
    }
  };
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace socnav

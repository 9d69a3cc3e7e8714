#pragma once

// Grayscale frames, portable-anymap I/O and the scanline polygon fill shared
// by rendering and histogram extraction.
//
// Boundary rule: pixel (ix, iy) belongs to a polygon iff its center
// (ix + 0.5, iy + 0.5) is inside by the even-odd crossing rule, where an
// edge counts for a row when y_lo <= yc < y_hi and a span is [x_in, x_out).
// Integer translations of a polygon therefore never change its pixel count.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include "crtrack/error.hpp"

namespace crtrack {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

struct Image {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;  // row-major, width * height

  Image() = default;
  Image(int w, int h, std::uint8_t fill = 0)
      : width(w), height(h), pixels(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), fill) {}

  std::uint8_t& at(int x, int y) { return pixels[static_cast<std::size_t>(y) * width + x]; }
  std::uint8_t at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }

  bool operator==(const Image&) const = default;
};

/// x where edge a->b crosses the horizontal line at `yc`. Callers must have
/// checked that the edge straddles `yc` under the half-open rule.
inline double edge_crossing_x(const Point& a, const Point& b, double yc) {
  return a.x + (yc - a.y) * (b.x - a.x) / (b.y - a.y);
}

/// Calls `emit(iy, ix_begin, ix_end)` for every nonempty run of pixels of a
/// `width` x `height` canvas whose centers lie inside `poly`.
template <class Emit>
void scan_polygon(std::span<const Point> poly, int width, int height, Emit&& emit) {
  if (poly.size() < 3 || width <= 0 || height <= 0) return;
  double min_y = poly[0].y, max_y = poly[0].y;
  for (const auto& p : poly) {
    min_y = std::min(min_y, p.y);
    max_y = std::max(max_y, p.y);
  }
  if (!std::isfinite(min_y) || !std::isfinite(max_y)) return;
  const double h = static_cast<double>(height);
  const int row_begin = static_cast<int>(std::clamp(std::floor(min_y - 0.5), 0.0, h));
  const int row_end = static_cast<int>(std::clamp(std::ceil(max_y + 0.5) + 1.0, 0.0, h));

  std::vector<double> xs;
  xs.reserve(poly.size());
  for (int iy = row_begin; iy < row_end; ++iy) {
    const double yc = iy + 0.5;
    xs.clear();
    for (std::size_t e = 0; e < poly.size(); ++e) {
      const Point& a = poly[e];
      const Point& b = poly[(e + 1) % poly.size()];
      if ((a.y <= yc && yc < b.y) || (b.y <= yc && yc < a.y)) xs.push_back(edge_crossing_x(a, b, yc));
    }
    std::sort(xs.begin(), xs.end());
    for (std::size_t m = 0; m + 1 < xs.size(); m += 2) {
      const double lo = xs[m], hi = xs[m + 1];
      if (!(lo < hi)) continue;
      // Smallest ix with ix + 0.5 >= lo, and smallest ix with ix + 0.5 >= hi.
      auto first_at_or_after = [](double v) {
        double c = std::ceil(v - 0.5);
        if (c < -1.0) return -1.0;
        while (c + 0.5 < v) c += 1.0;
        while (c - 0.5 >= v) c -= 1.0;
        return c;
      };
      const double fb = first_at_or_after(lo);
      const double fe = first_at_or_after(hi);
      const int ib = static_cast<int>(std::clamp(fb, 0.0, static_cast<double>(width)));
      const int ie = static_cast<int>(std::clamp(fe, 0.0, static_cast<double>(width)));
      if (ib < ie) emit(iy, ib, ie);
    }
  }
}

/// Sets every pixel covered by `poly` to `value`.
inline void fill_polygon(Image& image, std::span<const Point> poly, std::uint8_t value) {
  scan_polygon(poly, image.width, image.height, [&](int iy, int ib, int ie) {
    auto row = image.pixels.begin() + static_cast<std::ptrdiff_t>(iy) * image.width;
    std::fill(row + ib, row + ie, value);
  });
}

namespace detail {

inline void skip_pnm_whitespace(std::istream& in) {
  for (;;) {
    int c = in.peek();
    if (c == '#') {
      std::string line;
      std::getline(in, line);
    } else if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
      in.get();
    } else {
      return;
    }
  }
}

inline int read_pnm_int(std::istream& in, const std::string& path) {
  skip_pnm_whitespace(in);
  int v = -1;
  if (!(in >> v) || v < 0) throw Error(Errc::io_error, "malformed header in " + path);
  return v;
}

}  // namespace detail

/// Writes a binary (P5) graymap.
inline void write_pgm(const std::filesystem::path& path, const Image& image) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::io_error, "cannot open " + path.string() + " for writing");
  out << "P5\n" << image.width << ' ' << image.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(image.pixels.data()),
            static_cast<std::streamsize>(image.pixels.size()));
  if (!out) throw Error(Errc::io_error, "write failed for " + path.string());
}

/// Reads a binary graymap (P5) or pixmap (P6, converted to Rec. 601 luma).
/// Only 8-bit maxval is accepted.
inline Image read_pnm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io_error, "cannot open " + path.string());
  char magic[2] = {0, 0};
  in.read(magic, 2);
  if (!in || magic[0] != 'P' || (magic[1] != '5' && magic[1] != '6'))
    throw Error(Errc::io_error, path.string() + " is not a binary PGM/PPM file");
  const bool color = magic[1] == '6';
  const int w = detail::read_pnm_int(in, path.string());
  const int h = detail::read_pnm_int(in, path.string());
  const int maxval = detail::read_pnm_int(in, path.string());
  if (w <= 0 || h <= 0 || maxval != 255)
    throw Error(Errc::io_error, path.string() + ": unsupported dimensions or maxval");
  in.get();  // single whitespace byte before the raster

  Image image(w, h);
  const std::size_t n = image.pixels.size();
  if (!color) {
    in.read(reinterpret_cast<char*>(image.pixels.data()), static_cast<std::streamsize>(n));
  } else {
    std::vector<std::uint8_t> rgb(3 * n);
    in.read(reinterpret_cast<char*>(rgb.data()), static_cast<std::streamsize>(rgb.size()));
    for (std::size_t i = 0; i < n; ++i) {
      const double y = 0.299 * rgb[3 * i] + 0.587 * rgb[3 * i + 1] + 0.114 * rgb[3 * i + 2];
      image.pixels[i] = static_cast<std::uint8_t>(std::clamp(std::lround(y), 0L, 255L));
    }
  }
  if (!in) throw Error(Errc::io_error, path.string() + ": truncated raster");
  return image;
}

}  // namespace crtrack

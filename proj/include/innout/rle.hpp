#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "innout/error.hpp"

namespace innout {

// Run-length encoded binary mask, column-major, first run counts zeros
// (COCO convention).
struct MaskRLE {
  int width = 0;
  int height = 0;
  std::vector<std::uint32_t> counts;

  void validate() const {
    if (width <= 0 || height <= 0)
      throw CodecError("MaskRLE: non-positive dimensions");
    std::uint64_t total = 0;
    for (std::size_t i = 0; i < counts.size(); ++i) {
      total += counts[i];
      if (i > 0 && counts[i] == 0 && counts[i - 1] == 0)
        throw CodecError("MaskRLE: consecutive zero-length runs");
    }
    if (total != static_cast<std::uint64_t>(width) * height)
      throw CodecError("MaskRLE: counts sum " + std::to_string(total) +
                       " != " + std::to_string(std::uint64_t(width) * height));
  }
};

// Axis-aligned integer box, half-open [x0,x1) x [y0,y1), origin top-left.
struct CanvasBox {
  int x0 = 0, y0 = 0, x1 = 0, y1 = 0;

  int width() const { return x1 - x0; }
  int height() const { return y1 - y0; }
  std::int64_t area() const { return std::int64_t(width()) * height(); }
  bool contains(double x, double y) const {
    return x >= x0 && x < x1 && y >= y0 && y < y1;
  }
};

inline double box_iou(const CanvasBox& a, const CanvasBox& b) {
  const int ix0 = std::max(a.x0, b.x0), iy0 = std::max(a.y0, b.y0);
  const int ix1 = std::min(a.x1, b.x1), iy1 = std::min(a.y1, b.y1);
  if (ix0 >= ix1 || iy0 >= iy1) return 0.0;
  const double inter = double(ix1 - ix0) * (iy1 - iy0);
  return inter / (double(a.area()) + double(b.area()) - inter);
}

// Row-major boolean bitmap -> column-major RLE.
inline MaskRLE rle_encode(const std::vector<std::uint8_t>& bitmap, int width,
                          int height) {
  if (width <= 0 || height <= 0 ||
      bitmap.size() != static_cast<std::size_t>(width) * height)
    throw CodecError("rle_encode: bitmap size does not match dimensions");
  MaskRLE rle;
  rle.width = width;
  rle.height = height;
  std::uint32_t run = 0;
  std::uint8_t cur = 0;  // runs start with zeros
  for (int x = 0; x < width; ++x) {
    for (int y = 0; y < height; ++y) {
      const std::uint8_t v = bitmap[std::size_t(y) * width + x] ? 1 : 0;
      if (v != cur) {
        rle.counts.push_back(run);
        run = 0;
        cur = v;
      }
      ++run;
    }
  }
  rle.counts.push_back(run);
  return rle;
}

// Column-major RLE -> row-major boolean bitmap.
inline std::vector<std::uint8_t> rle_decode(const MaskRLE& rle) {
  rle.validate();
  std::vector<std::uint8_t> bitmap(std::size_t(rle.width) * rle.height, 0);
  std::uint64_t pos = 0;
  std::uint8_t cur = 0;
  for (std::uint32_t run : rle.counts) {
    if (cur) {
      for (std::uint32_t i = 0; i < run; ++i) {
        const std::uint64_t p = pos + i;
        const int x = static_cast<int>(p / rle.height);
        const int y = static_cast<int>(p % rle.height);
        bitmap[std::size_t(y) * rle.width + x] = 1;
      }
    }
    pos += run;
    cur = !cur;
  }
  return bitmap;
}

// Number of set pixels: sum of the odd-indexed ("ones") runs.
inline std::int64_t mask_area(const MaskRLE& rle) {
  rle.validate();
  std::int64_t area = 0;
  for (std::size_t i = 1; i < rle.counts.size(); i += 2) area += rle.counts[i];
  return area;
}

// Count of set pixels inside the half-open box.
inline std::int64_t mask_box_overlap(const MaskRLE& rle, const CanvasBox& box) {
  rle.validate();
  if (box.x0 < 0 || box.y0 < 0 || box.x1 > rle.width || box.y1 > rle.height ||
      box.x0 >= box.x1 || box.y0 >= box.y1)
    throw ValidationError("mask_box_overlap: box out of bounds");
  std::int64_t overlap = 0;
  std::uint64_t pos = 0;
  std::uint8_t cur = 0;
  const std::uint64_t h = rle.height;
  for (std::uint32_t run : rle.counts) {
    if (cur && run > 0) {
      // ones run covers column-major linear positions [pos, pos+run)
      std::uint64_t start = pos;
      const std::uint64_t end = pos + run;
      while (start < end) {
        const std::uint64_t col = start / h;
        const std::uint64_t col_end = std::min(end, (col + 1) * h);
        const int x = static_cast<int>(col);
        if (x >= box.x0 && x < box.x1) {
          const int y_lo = std::max<int>(box.y0, static_cast<int>(start % h));
          const int y_hi = std::min<int>(box.y1, static_cast<int>(col_end - col * h));
          if (y_hi > y_lo) overlap += y_hi - y_lo;
        }
        start = col_end;
      }
    }
    pos += run;
    cur = !cur;
  }
  return overlap;
}

// Tight bounding rectangle of the set pixels; throws on an empty mask.
inline CanvasBox mask_bounding_box(const MaskRLE& rle) {
  rle.validate();
  int min_x = rle.width, min_y = rle.height, max_x = -1, max_y = -1;
  std::uint64_t pos = 0;
  std::uint8_t cur = 0;
  const std::uint64_t h = rle.height;
  for (std::uint32_t run : rle.counts) {
    if (cur && run > 0) {
      std::uint64_t start = pos;
      const std::uint64_t end = pos + run;
      while (start < end) {
        const std::uint64_t col = start / h;
        const std::uint64_t col_end = std::min(end, (col + 1) * h);
        const int x = static_cast<int>(col);
        const int y0 = static_cast<int>(start % h);
        const int y1 = static_cast<int>(col_end - col * h);
        min_x = std::min(min_x, x);
        max_x = std::max(max_x, x);
        min_y = std::min(min_y, y0);
        max_y = std::max(max_y, y1 - 1);
        start = col_end;
      }
    }
    pos += run;
    cur = !cur;
  }
  if (max_x < 0) throw ValidationError("mask_bounding_box: empty mask");
  return CanvasBox{min_x, min_y, max_x + 1, max_y + 1};
}

// Crop the mask to a sub-rectangle.
inline MaskRLE mask_crop(const MaskRLE& rle, const CanvasBox& rect) {
  const auto bitmap = rle_decode(rle);
  if (rect.x0 < 0 || rect.y0 < 0 || rect.x1 > rle.width || rect.y1 > rle.height)
    throw ValidationError("mask_crop: rect out of bounds");
  const int cw = rect.width(), ch = rect.height();
  std::vector<std::uint8_t> out(std::size_t(cw) * ch, 0);
  for (int y = 0; y < ch; ++y)
    for (int x = 0; x < cw; ++x)
      out[std::size_t(y) * cw + x] =
          bitmap[std::size_t(y + rect.y0) * rle.width + (x + rect.x0)];
  return rle_encode(out, cw, ch);
}

}  // namespace innout

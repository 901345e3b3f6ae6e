#include "walkers/imaging.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "walkers/errors.hpp"

namespace walkers {

namespace {

std::vector<float> gaussian_kernel(float sigma) {
  const int radius = static_cast<int>(std::ceil(3.0f * sigma));
  std::vector<float> k(2 * radius + 1);
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    double v = std::exp(-0.5 * (static_cast<double>(i) * i) / (static_cast<double>(sigma) * sigma));
    k[i + radius] = static_cast<float>(v);
    sum += v;
  }
  for (float& v : k) v = static_cast<float>(v / sum);
  return k;
}

inline int clamp_index(int i, int n) { return i < 0 ? 0 : (i >= n ? n - 1 : i); }

}  // namespace

Raster gaussian_blur(const Raster& src, float sigma) {
  if (!(sigma > 0.0f)) throw InvalidArgumentError("gaussian_blur: sigma must be positive");
  const int w = plane_width(src);
  const int h = plane_height(src);
  const std::vector<float> k = gaussian_kernel(sigma);
  const int radius = static_cast<int>(k.size() / 2);

  Raster tmp(h, w);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int i = -radius; i <= radius; ++i) {
        acc += static_cast<double>(k[i + radius]) * src(y, clamp_index(x + i, w));
      }
      tmp(y, x) = static_cast<float>(acc);
    }
  }
  Raster out(h, w);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int i = -radius; i <= radius; ++i) {
        acc += static_cast<double>(k[i + radius]) * tmp(clamp_index(y + i, h), x);
      }
      out(y, x) = static_cast<float>(acc);
    }
  }
  return out;
}

GradientField sobel_gradient(const Raster& src) {
  const int w = plane_width(src);
  const int h = plane_height(src);
  if (w < 3 || h < 3) throw InvalidInputError("sobel_gradient: raster smaller than 3x3");

  GradientField g;
  g.gx = Raster::Zero(h, w);
  g.gy = Raster::Zero(h, w);
  g.magnitude = Raster::Zero(h, w);
  g.orientation_deg = Raster::Zero(h, w);

  // sup of sqrt(gx^2 + gy^2) over [0,1] inputs is sqrt(20): (gx, gy) = (4, 2)
  // with the shared corner pixels saturated.
  const float mag_norm = 1.0f / std::sqrt(20.0f);

  for (int y = 0; y < h; ++y) {
    const int ym = clamp_index(y - 1, h), yp = clamp_index(y + 1, h);
    for (int x = 0; x < w; ++x) {
      const int xm = clamp_index(x - 1, w), xp = clamp_index(x + 1, w);
      const float tl = src(ym, xm), tc = src(ym, x), tr = src(ym, xp);
      const float ml = src(y, xm), mr = src(y, xp);
      const float bl = src(yp, xm), bc = src(yp, x), br = src(yp, xp);
      const float gx = (tr + 2.0f * mr + br) - (tl + 2.0f * ml + bl);
      const float gy = (bl + 2.0f * bc + br) - (tl + 2.0f * tc + tr);
      g.gx(y, x) = gx;
      g.gy(y, x) = gy;
      g.magnitude(y, x) = std::sqrt(gx * gx + gy * gy) * mag_norm;
      g.orientation_deg(y, x) = static_cast<float>(
          std::atan2(static_cast<double>(gy), static_cast<double>(gx)) * 180.0 /
          3.14159265358979323846);
    }
  }
  return g;
}

float bilinear_sample_zero_pad(const Raster& src, float x, float y) {
  const int x0 = static_cast<int>(std::floor(x));
  const int y0 = static_cast<int>(std::floor(y));
  const float fx = x - static_cast<float>(x0);
  const float fy = y - static_cast<float>(y0);
  auto pick = [&](int xi, int yi) -> float {
    return in_bounds(src, xi, yi) ? src(yi, xi) : 0.0f;
  };
  const float v00 = pick(x0, y0), v10 = pick(x0 + 1, y0);
  const float v01 = pick(x0, y0 + 1), v11 = pick(x0 + 1, y0 + 1);
  return (1.0f - fy) * ((1.0f - fx) * v00 + fx * v10) + fy * ((1.0f - fx) * v01 + fx * v11);
}

float bilinear_sample(const Raster& src, float x, float y) {
  const float w = static_cast<float>(plane_width(src));
  const float h = static_cast<float>(plane_height(src));
  if (x < -0.5f || x > w - 0.5f || y < -0.5f || y > h - 0.5f) {
    throw OutOfBoundsError("bilinear_sample: coordinate outside padded raster bound");
  }
  return bilinear_sample_zero_pad(src, x, y);
}

std::vector<int> Components::labels_by_area() const {
  std::vector<int> order(count);
  std::iota(order.begin(), order.end(), 1);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (areas[a - 1] != areas[b - 1]) return areas[a - 1] > areas[b - 1];
    return a < b;
  });
  return order;
}

Components connected_components(const BinaryMask& mask, int connectivity) {
  if (connectivity != 4 && connectivity != 8) {
    throw InvalidArgumentError("connected_components: connectivity must be 4 or 8");
  }
  const int w = plane_width(mask);
  const int h = plane_height(mask);
  Components out;
  out.labels = LabelMap::Zero(h, w);

  static const int dx8[] = {1, -1, 0, 0, 1, 1, -1, -1};
  static const int dy8[] = {0, 0, 1, -1, 1, -1, 1, -1};
  const int nn = connectivity == 4 ? 4 : 8;

  std::vector<PixelCoord> stack;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!mask(y, x) || out.labels(y, x) != 0) continue;
      const int label = ++out.count;
      long area = 0;
      stack.push_back({x, y});
      out.labels(y, x) = label;
      while (!stack.empty()) {
        const PixelCoord p = stack.back();
        stack.pop_back();
        ++area;
        for (int i = 0; i < nn; ++i) {
          const int qx = p.x + dx8[i], qy = p.y + dy8[i];
          if (qx < 0 || qy < 0 || qx >= w || qy >= h) continue;
          if (!mask(qy, qx) || out.labels(qy, qx) != 0) continue;
          out.labels(qy, qx) = label;
          stack.push_back({qx, qy});
        }
      }
      out.areas.push_back(area);
    }
  }
  return out;
}

BinaryMask flood_fill_from_border(const BinaryMask& blocked) {
  const int w = plane_width(blocked);
  const int h = plane_height(blocked);
  BinaryMask outside = BinaryMask::Zero(h, w);
  std::vector<PixelCoord> stack;
  auto push = [&](int x, int y) {
    if (x < 0 || y < 0 || x >= w || y >= h) return;
    if (blocked(y, x) || outside(y, x)) return;
    outside(y, x) = 1;
    stack.push_back({x, y});
  };
  for (int x = 0; x < w; ++x) {
    push(x, 0);
    push(x, h - 1);
  }
  for (int y = 0; y < h; ++y) {
    push(0, y);
    push(w - 1, y);
  }
  while (!stack.empty()) {
    const PixelCoord p = stack.back();
    stack.pop_back();
    push(p.x + 1, p.y);
    push(p.x - 1, p.y);
    push(p.x, p.y + 1);
    push(p.x, p.y - 1);
  }
  return outside;
}

namespace {

// Zhang-Suen deletion test for one subiteration. Neighbors p2..p9 clockwise
// from north; outside the image reads 0.
bool zs_deletable(const BinaryMask& m, int x, int y, bool first_pass) {
  auto at = [&](int xi, int yi) -> int {
    return in_bounds(m, xi, yi) && m(yi, xi) ? 1 : 0;
  };
  const int p2 = at(x, y - 1), p3 = at(x + 1, y - 1), p4 = at(x + 1, y);
  const int p5 = at(x + 1, y + 1), p6 = at(x, y + 1), p7 = at(x - 1, y + 1);
  const int p8 = at(x - 1, y), p9 = at(x - 1, y - 1);
  const int b = p2 + p3 + p4 + p5 + p6 + p7 + p8 + p9;
  if (b < 2 || b > 6) return false;
  const int seq[9] = {p2, p3, p4, p5, p6, p7, p8, p9, p2};
  int a = 0;
  for (int i = 0; i < 8; ++i) {
    if (seq[i] == 0 && seq[i + 1] == 1) ++a;
  }
  if (a != 1) return false;
  if (first_pass) {
    return (p2 * p4 * p6 == 0) && (p4 * p6 * p8 == 0);
  }
  return (p2 * p4 * p8 == 0) && (p2 * p6 * p8 == 0);
}

}  // namespace

BinaryMask thin(const BinaryMask& mask) {
  const int w = plane_width(mask);
  const int h = plane_height(mask);
  BinaryMask cur = mask;
  std::vector<PixelCoord> kill;
  bool changed = true;
  while (changed) {
    changed = false;
    for (int pass = 0; pass < 2; ++pass) {
      kill.clear();
      for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
          if (cur(y, x) && zs_deletable(cur, x, y, pass == 0)) kill.push_back({x, y});
        }
      }
      for (const PixelCoord& p : kill) cur(p.y, p.x) = 0;
      if (!kill.empty()) changed = true;
    }
  }
  return cur;
}

BinaryMask inner_boundary(const BinaryMask& mask) {
  const int w = plane_width(mask);
  const int h = plane_height(mask);
  BinaryMask out = BinaryMask::Zero(h, w);
  auto bg = [&](int x, int y) { return x < 0 || y < 0 || x >= w || y >= h || !mask(y, x); };
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!mask(y, x)) continue;
      if (bg(x - 1, y) || bg(x + 1, y) || bg(x, y - 1) || bg(x, y + 1)) out(y, x) = 1;
    }
  }
  return out;
}

std::vector<PixelCoord> trace_closed_chain(const BinaryMask& mask) {
  Components comps = connected_components(mask, 8);
  if (comps.count == 0) return {};
  const int keep = comps.labels_by_area().front();
  const int w = plane_width(mask);
  const int h = plane_height(mask);

  auto fg = [&](int x, int y) {
    return x >= 0 && y >= 0 && x < w && y < h && comps.labels(y, x) == keep;
  };

  // First foreground pixel in raster-scan order; its west neighbor is
  // guaranteed background.
  PixelCoord start{-1, -1};
  for (int y = 0; y < h && start.x < 0; ++y) {
    for (int x = 0; x < w; ++x) {
      if (comps.labels(y, x) == keep) {
        start = {x, y};
        break;
      }
    }
  }

  // Moore neighborhood, clockwise in raster coords starting west.
  static const int mx[8] = {-1, -1, 0, 1, 1, 1, 0, -1};
  static const int my[8] = {0, -1, -1, -1, 0, 1, 1, 1};

  std::vector<PixelCoord> chain;
  PixelCoord cur = start;
  int backtrack = 0;  // index of the background neighbor we entered from
  const long guard = 4L * w * h + 16;
  long steps = 0;
  int first_dir = -1;
  while (true) {
    chain.push_back(cur);
    int dir = -1;
    for (int i = 0; i < 8; ++i) {
      const int d = (backtrack + i) % 8;
      if (fg(cur.x + mx[d], cur.y + my[d])) {
        dir = d;
        break;
      }
    }
    if (dir < 0) {
      // isolated pixel: a one-entry closed chain
      return chain;
    }
    if (first_dir < 0) first_dir = dir;
    // Jacob's stopping criterion: back at the start entering the same way.
    if (chain.size() > 1 && cur == start && dir == first_dir) {
      chain.pop_back();
      return chain;
    }
    cur = {cur.x + mx[dir], cur.y + my[dir]};
    backtrack = (dir + 6) % 8;  // neighbor clockwise-before the move direction
    if (++steps > guard) return {};
  }
}

}  // namespace walkers

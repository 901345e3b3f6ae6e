#include "walkers/binarize.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

#include <json.hpp>

#include "walkers/errors.hpp"
#include "walkers/imaging.hpp"

namespace walkers {

void BinarizeParams::validate() const {
  if (!(blur_sigma > 0.0f)) throw InvalidArgumentError("BinarizeParams: blur_sigma <= 0");
  if (max_len < 1) throw InvalidArgumentError("BinarizeParams: max_len < 1");
  if (!(tau_region > 0.0f && tau_region < 1.0f))
    throw InvalidArgumentError("BinarizeParams: tau_region outside (0,1)");
}

CandidateList build_candidates(const Raster& refined) {
  CandidateList list;
  for (int y = 0; y < plane_height(refined); ++y)
    for (int x = 0; x < plane_width(refined); ++x)
      if (refined(y, x) > 0.0f) list.push_back({{x, y}, refined(y, x)});
  if (list.empty()) throw EmptyRefinedMapError("build_candidates: refined map is all zero");
  std::stable_sort(list.begin(), list.end(),
                   [](const Candidate& a, const Candidate& b) { return a.x > b.x; });
  return list;
}

std::optional<AngleDeg> edge_gradient_at(const Raster& refined, PixelCoord p) {
  if (!in_bounds(refined, p.x, p.y)) throw OutOfBoundsError("edge_gradient_at: p out of bounds");
  const GradientField grad = sobel_gradient(gaussian_blur(refined, 2.0f));
  const float gx = grad.gx(p.y, p.x);
  const float gy = grad.gy(p.y, p.x);
  if (gx == 0.0f && gy == 0.0f) return std::nullopt;
  return AngleDeg(static_cast<float>(std::atan2(static_cast<double>(gy), static_cast<double>(gx)) *
                                     180.0 / 3.14159265358979323846));
}

namespace {

// 4-connected (supercover) grid walk from the center of `start` along
// (dx, dy). Calls fn for every pixel entered after the start; fn returns
// false to stop. Exact corner hits step x first.
template <typename Fn>
void walk_ray(PixelCoord start, double dx, double dy, Fn&& fn) {
  constexpr double kInf = std::numeric_limits<double>::infinity();
  int x = start.x, y = start.y;
  const int step_x = dx > 0.0 ? 1 : (dx < 0.0 ? -1 : 0);
  const int step_y = dy > 0.0 ? 1 : (dy < 0.0 ? -1 : 0);
  if (step_x == 0 && step_y == 0) return;
  double t_max_x = step_x != 0 ? 0.5 / std::abs(dx) : kInf;
  double t_max_y = step_y != 0 ? 0.5 / std::abs(dy) : kInf;
  const double t_delta_x = step_x != 0 ? 1.0 / std::abs(dx) : kInf;
  const double t_delta_y = step_y != 0 ? 1.0 / std::abs(dy) : kInf;
  while (true) {
    if (t_max_x <= t_max_y) {
      x += step_x;
      t_max_x += t_delta_x;
    } else {
      y += step_y;
      t_max_y += t_delta_y;
    }
    if (!fn(PixelCoord{x, y})) return;
  }
}

}  // namespace

std::optional<SeparationLine> build_separation_line(const Raster& refined, PixelCoord p_x,
                                                    AngleDeg grad, const BinarizeParams& params,
                                                    SeparationRejection* rejection) {
  params.validate();
  if (!in_bounds(refined, p_x.x, p_x.y))
    throw OutOfBoundsError("build_separation_line: anchor out of bounds");
  auto reject = [&](SeparationRejection r) -> std::optional<SeparationLine> {
    if (rejection) *rejection = r;
    return std::nullopt;
  };
  if (rejection) *rejection = SeparationRejection::None;

  const double rad = static_cast<double>(grad.value) * 3.14159265358979323846 / 180.0;
  const double dx = std::cos(rad);
  const double dy = std::sin(rad);  // y-down orientation vector

  // Each arm ends at its first sub-tau pixel; running out of budget or image
  // first means the cut never left the contour band.
  auto trace_arm = [&](double sign, std::vector<PixelCoord>& pixels, PixelCoord& endpoint) {
    bool closed_out = false;
    walk_ray(p_x, sign * dx, sign * dy, [&](PixelCoord q) {
      if (!in_bounds(refined, q.x, q.y)) return false;
      pixels.push_back(q);
      if (refined(q.y, q.x) < params.tau_region) {
        endpoint = q;
        closed_out = true;
        return false;
      }
      return static_cast<int>(pixels.size()) < params.max_len;
    });
    return closed_out;
  };

  SeparationLine line;
  line.anchor = p_x;
  line.direction = grad;
  std::vector<PixelCoord> arm_neg, arm_pos;
  if (!trace_arm(-1.0, arm_neg, line.e1)) return reject(SeparationRejection::ArmTooLong);
  if (!trace_arm(+1.0, arm_pos, line.e2)) return reject(SeparationRejection::ArmTooLong);

  line.cut_pixels.assign(arm_neg.rbegin(), arm_neg.rend());
  line.cut_pixels.push_back(p_x);
  line.cut_pixels.insert(line.cut_pixels.end(), arm_pos.begin(), arm_pos.end());

  // Reconnect pair: the highest-value pixel adjacent to the cut on each side
  // of the line (cross-product sign). Ties prefer the neighbor with the
  // largest surrounding mass -- on a flat band that is the medial pixel,
  // which survives thinning, while rim pixels are eroded away and could
  // never witness closure of the thinned contour. Remaining ties keep the
  // first in cut order.
  auto in_cut = [&](const PixelCoord& q) {
    return std::find(line.cut_pixels.begin(), line.cut_pixels.end(), q) != line.cut_pixels.end();
  };
  auto neighbor_mass = [&](const PixelCoord& q) {
    double mass = 0.0;
    for (int ny = -1; ny <= 1; ++ny)
      for (int nx = -1; nx <= 1; ++nx)
        if (in_bounds(refined, q.x + nx, q.y + ny)) mass += refined(q.y + ny, q.x + nx);
    return mass;
  };
  float best_pos = 0.0f, best_neg = 0.0f;
  double mass_pos = 0.0, mass_neg = 0.0;
  bool have_pos = false, have_neg = false;
  for (const PixelCoord& c : line.cut_pixels) {
    for (int ny = -1; ny <= 1; ++ny) {
      for (int nx = -1; nx <= 1; ++nx) {
        if (nx == 0 && ny == 0) continue;
        const PixelCoord q{c.x + nx, c.y + ny};
        if (!in_bounds(refined, q.x, q.y) || in_cut(q)) continue;
        const float v = refined(q.y, q.x);
        if (v <= 0.0f) continue;
        const double side = dx * (q.y - p_x.y) - dy * (q.x - p_x.x);
        if (side == 0.0) continue;
        const double mass = neighbor_mass(q);
        if (side > 0.0 && (!have_pos || v > best_pos || (v == best_pos && mass > mass_pos))) {
          line.pixel_1 = q;
          best_pos = v;
          mass_pos = mass;
          have_pos = true;
        } else if (side < 0.0 &&
                   (!have_neg || v > best_neg || (v == best_neg && mass > mass_neg))) {
          line.pixel_2 = q;
          best_neg = v;
          mass_neg = mass;
          have_neg = true;
        }
      }
    }
  }
  if (!have_pos || !have_neg) return reject(SeparationRejection::NoReconnectPair);
  return line;
}

namespace {

bool validate_with_components(const SeparationLine& line, const Components& background) {
  if (background.count < 2) return false;
  const std::vector<int> order = background.labels_by_area();
  const int top1 = order[0];
  const int top2 = order[1];
  const int l1 = background.labels(line.e1.y, line.e1.x);
  const int l2 = background.labels(line.e2.y, line.e2.x);
  if (l1 == 0 || l2 == 0 || l1 == l2) return false;
  return (l1 == top1 && l2 == top2) || (l1 == top2 && l2 == top1);
}

}  // namespace

bool validate_separation(const SeparationLine& line, const Raster& refined, float tau_region) {
  const BinaryMask background = (refined < tau_region).cast<std::uint8_t>();
  return validate_with_components(line, connected_components(background, 4));
}

bool is_closed(const BinaryMask& contour, const SeparationLine& line) {
  const int w = plane_width(contour);
  const int h = plane_height(contour);
  BinaryMask work = contour;
  for (const PixelCoord& c : line.cut_pixels)
    if (in_bounds(work, c.x, c.y)) work(c.y, c.x) = 0;
  const PixelCoord a = line.pixel_1;
  const PixelCoord b = line.pixel_2;
  if (!in_bounds(work, a.x, a.y) || !in_bounds(work, b.x, b.y)) return false;
  if (!work(a.y, a.x) || !work(b.y, b.x)) return false;

  BinaryMask seen = BinaryMask::Zero(h, w);
  std::deque<PixelCoord> queue{a};
  seen(a.y, a.x) = 1;
  while (!queue.empty()) {
    const PixelCoord p = queue.front();
    queue.pop_front();
    if (p == b) return true;
    for (int ny = -1; ny <= 1; ++ny) {
      for (int nx = -1; nx <= 1; ++nx) {
        if (nx == 0 && ny == 0) continue;
        const int qx = p.x + nx, qy = p.y + ny;
        if (qx < 0 || qy < 0 || qx >= w || qy >= h) continue;
        if (!work(qy, qx) || seen(qy, qx)) continue;
        seen(qy, qx) = 1;
        queue.push_back({qx, qy});
      }
    }
  }
  return false;
}

std::optional<std::pair<float, BinaryMask>> closure_threshold_search(
    const Raster& refined, const SeparationLine& line) {
  std::vector<float> values;
  for (Eigen::Index i = 0; i < refined.size(); ++i)
    if (refined.data()[i] > 0.0f) values.push_back(refined.data()[i]);
  if (values.empty()) return std::nullopt;
  std::sort(values.begin(), values.end(), std::greater<float>());
  values.erase(std::unique(values.begin(), values.end()), values.end());

  auto closed_pre = [&](std::size_t idx) {
    return is_closed(threshold_at(refined, values[idx]), line);
  };

  // Pre-thinning closure is monotone along the descending value list:
  // false..false true..true. Find the first true by bisection.
  if (!closed_pre(values.size() - 1)) return std::nullopt;
  std::size_t first_closed = values.size() - 1;
  if (closed_pre(0)) {
    first_closed = 0;
  } else {
    std::size_t lo = 0;                   // known open
    std::size_t hi = values.size() - 1;   // known closed
    while (hi - lo > 1) {
      const std::size_t mid = lo + (hi - lo) / 2;
      (closed_pre(mid) ? hi : lo) = mid;
    }
    first_closed = hi;
  }

  // Thinning may break the closure; keep descending until it survives.
  for (std::size_t j = first_closed; j < values.size(); ++j) {
    const BinaryMask thinned = thin(threshold_at(refined, values[j]));
    if (!is_closed(thinned, line)) continue;
    const Components comps = connected_components(thinned, 8);
    const int keep = comps.labels(line.pixel_1.y, line.pixel_1.x);
    BinaryMask contour = (comps.labels == keep).cast<std::uint8_t>();
    return std::make_pair(values[j], std::move(contour));
  }
  return std::nullopt;
}

ClosureResult binarize_contour(const Raster& refined, const BinarizeParams& params) {
  params.validate();
  const CandidateList candidates = build_candidates(refined);

  const GradientField grad = sobel_gradient(gaussian_blur(refined, params.blur_sigma));
  const BinaryMask background = (refined < params.tau_region).cast<std::uint8_t>();
  const Components bg_components = connected_components(background, 4);

  int attempts = 0;
  for (const Candidate& cand : candidates) {
    const float gx = grad.gx(cand.p.y, cand.p.x);
    const float gy = grad.gy(cand.p.y, cand.p.x);
    if (gx == 0.0f && gy == 0.0f) {
      ++attempts;
      continue;
    }
    const AngleDeg direction(static_cast<float>(
        std::atan2(static_cast<double>(gy), static_cast<double>(gx)) * 180.0 /
        3.14159265358979323846));
    std::optional<SeparationLine> line =
        build_separation_line(refined, cand.p, direction, params);
    if (!line || !validate_with_components(*line, bg_components)) {
      ++attempts;
      continue;
    }
    std::optional<std::pair<float, BinaryMask>> closure = closure_threshold_search(refined, *line);
    if (!closure) {
      ++attempts;
      continue;
    }
    ClosureResult result;
    result.threshold = closure->first;
    result.contour = std::move(closure->second);
    result.separation = std::move(*line);
    result.attempts = attempts;
    return result;
  }
  throw NoClosedContourError("binarize_contour: no candidate yields a closed contour (rejected " +
                             std::to_string(attempts) + ")");
}

nlohmann::json closure_to_json(const ClosureResult& result) {
  return nlohmann::json{{"threshold", result.threshold},
                        {"anchor", {{"x", result.separation.anchor.x},
                                    {"y", result.separation.anchor.y}}},
                        {"attempts", result.attempts}};
}

}  // namespace walkers

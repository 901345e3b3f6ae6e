#include "walkers/predictor.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include "walkers/errors.hpp"
#include "walkers/imaging.hpp"

namespace walkers {

namespace {

constexpr double kPi = 3.14159265358979323846;

}  // namespace

// ---------------------------------------------------------------------------
// Analytic ridge follower.
// ---------------------------------------------------------------------------

Prediction AnalyticPredictor::predict(const Patch& patch) const {
  constexpr float kRadius = 2.5f;
  constexpr float kCenter = Patch::kSize / 2;
  struct Candidate {
    float angle;
    float value;
  };

  auto sample = [&](float angle_deg) -> float {
    const float a = angle_deg * AngleDeg::kDegToRad;
    const float sx = kCenter + kRadius * std::cos(a);
    const float sy = kCenter - kRadius * std::sin(a);
    return bilinear_sample_zero_pad(patch.soft(), sx, sy);
  };

  std::vector<Candidate> cands;
  cands.reserve(24);
  for (int k = -10; k <= 10; ++k) {
    const float angle = 15.0f * static_cast<float>(k);
    cands.push_back({angle, sample(angle)});
  }

  // The band crosses the candidate circle twice, ahead and behind; averaging
  // across both crossings points sideways. Pick the peak with a preference
  // for continuing forward: the |a| <= 90 window first, the full +-150 sweep
  // when that is dead, the backward cone as the last resort.
  auto peak_in = [&](float window) -> const Candidate* {
    const Candidate* best = nullptr;
    for (const Candidate& c : cands) {
      if (std::abs(c.angle) > window + 0.5f) continue;
      if (!best || c.value > best->value ||
          (c.value == best->value && (std::abs(c.angle) < std::abs(best->angle) ||
                                      (std::abs(c.angle) == std::abs(best->angle) &&
                                       c.angle > best->angle))))
        best = &c;
    }
    return best && best->value >= stall_threshold_ ? best : nullptr;
  };

  const Candidate* peak = peak_in(90.0f);
  if (!peak) peak = peak_in(150.0f);
  if (!peak) {
    for (float angle : {165.0f, 180.0f, -165.0f}) cands.push_back({angle, sample(angle)});
    peak = peak_in(180.0f);
  }
  if (!peak) return {AngleDeg(0.0f), true};

  // Intensity-weighted mean of the peak and its two grid neighbors.
  double sx = 0.0, sy = 0.0;
  for (const Candidate& c : cands) {
    if (angular_distance(c.angle, peak->angle) > 15.5f) continue;
    const double a = c.angle * kPi / 180.0;
    sx += c.value * std::cos(a);
    sy += c.value * std::sin(a);
  }
  return {AngleDeg(static_cast<float>(std::atan2(sy, sx) * 180.0 / kPi)), false};
}

// ---------------------------------------------------------------------------
// Network weights.
// ---------------------------------------------------------------------------

namespace {

struct TensorShape {
  const char* name;
  std::vector<std::uint32_t> dims;
};

// Serialized tensor order and logical shapes; the row-major payload of each
// matches the in-memory matrix bytes.
const std::vector<TensorShape>& tensor_shapes() {
  static const std::vector<TensorShape> shapes = {
      {"conv1_w", {16, 4, 3, 3}}, {"conv1_b", {16}}, {"conv2_w", {32, 16, 3, 3}},
      {"conv2_b", {32}},          {"fc1_w", {64, 288}}, {"fc1_b", {64}},
      {"fc2_w", {1, 64}},         {"fc2_b", {1}},
  };
  return shapes;
}

std::size_t shape_count(const TensorShape& s) {
  std::size_t n = 1;
  for (std::uint32_t d : s.dims) n *= d;
  return n;
}

template <typename Fn>
void for_each_tensor(NetworkWeights& w, Fn&& fn) {
  fn(0, w.conv1_w.data(), static_cast<std::size_t>(w.conv1_w.size()));
  fn(1, w.conv1_b.data(), static_cast<std::size_t>(w.conv1_b.size()));
  fn(2, w.conv2_w.data(), static_cast<std::size_t>(w.conv2_w.size()));
  fn(3, w.conv2_b.data(), static_cast<std::size_t>(w.conv2_b.size()));
  fn(4, w.fc1_w.data(), static_cast<std::size_t>(w.fc1_w.size()));
  fn(5, w.fc1_b.data(), static_cast<std::size_t>(w.fc1_b.size()));
  fn(6, w.fc2_w.data(), static_cast<std::size_t>(w.fc2_w.size()));
  fn(7, w.fc2_b.data(), static_cast<std::size_t>(w.fc2_b.size()));
}

template <typename Fn>
void for_each_tensor(const NetworkWeights& w, Fn&& fn) {
  for_each_tensor(const_cast<NetworkWeights&>(w),
                  [&](int i, float* p, std::size_t n) { fn(i, const_cast<const float*>(p), n); });
}

}  // namespace

NetworkWeights NetworkWeights::zeros() {
  NetworkWeights w;
  w.conv1_w = MatF::Zero(16, 36);
  w.conv1_b = VecF::Zero(16);
  w.conv2_w = MatF::Zero(32, 144);
  w.conv2_b = VecF::Zero(32);
  w.fc1_w = MatF::Zero(64, 288);
  w.fc1_b = VecF::Zero(64);
  w.fc2_w = MatF::Zero(1, 64);
  w.fc2_b = VecF::Zero(1);
  return w;
}

NetworkWeights NetworkWeights::he_uniform(std::uint64_t rng_seed) {
  NetworkWeights w = zeros();
  Rng rng(rng_seed);
  auto fill = [&rng](MatF& m) {
    const double limit = std::sqrt(6.0 / static_cast<double>(m.cols()));
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      for (Eigen::Index c = 0; c < m.cols(); ++c)
        m(r, c) = static_cast<float>(rng.uniform_range(-limit, limit));
  };
  fill(w.conv1_w);
  fill(w.conv2_w);
  fill(w.fc1_w);
  fill(w.fc2_w);
  return w;
}

void NetworkWeights::validate() const {
  bool ok = conv1_w.rows() == 16 && conv1_w.cols() == 36 && conv1_b.size() == 16 &&
            conv2_w.rows() == 32 && conv2_w.cols() == 144 && conv2_b.size() == 32 &&
            fc1_w.rows() == 64 && fc1_w.cols() == 288 && fc1_b.size() == 64 &&
            fc2_w.rows() == 1 && fc2_w.cols() == 64 && fc2_b.size() == 1;
  if (!ok) throw InvalidWeightsError("network weights: shape mismatch");
  for_each_tensor(*this, [](int, const float* p, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i)
      if (!std::isfinite(p[i])) throw InvalidWeightsError("network weights: non-finite value");
  });
}

// ---------------------------------------------------------------------------
// Forward / backward. Plain loops; the patches are tiny.
// ---------------------------------------------------------------------------

namespace {

// in: in_ch rows of n*n row-major planes; w: out_ch x (in_ch*9). Valid
// padding, ReLU. out: out_ch x (n-2)^2.
void conv3x3_relu(const MatF& in, int n, const MatF& w, const VecF& b, MatF& out) {
  const int m = n - 2;
  const int in_ch = static_cast<int>(in.rows());
  out.resize(w.rows(), m * m);
  for (int o = 0; o < w.rows(); ++o) {
    for (int oy = 0; oy < m; ++oy) {
      for (int ox = 0; ox < m; ++ox) {
        double acc = b(o);
        for (int c = 0; c < in_ch; ++c)
          for (int ky = 0; ky < 3; ++ky)
            for (int kx = 0; kx < 3; ++kx)
              acc += static_cast<double>(in(c, (oy + ky) * n + (ox + kx))) *
                     static_cast<double>(w(o, (c * 3 + ky) * 3 + kx));
        out(o, oy * m + ox) = acc > 0.0 ? static_cast<float>(acc) : 0.0f;
      }
    }
  }
}

// Gradient of conv3x3_relu given dout already masked by the ReLU. Accumulates
// into gw/gb; writes the input gradient when din != nullptr.
void conv3x3_backward(const MatF& in, int n, const MatF& w, const MatF& dout, MatF& gw, VecF& gb,
                      MatF* din) {
  const int m = n - 2;
  const int in_ch = static_cast<int>(in.rows());
  if (din) {
    din->resize(in_ch, n * n);
    din->setZero();
  }
  for (int o = 0; o < w.rows(); ++o) {
    for (int oy = 0; oy < m; ++oy) {
      for (int ox = 0; ox < m; ++ox) {
        const float g = dout(o, oy * m + ox);
        if (g == 0.0f) continue;
        gb(o) += g;
        for (int c = 0; c < in_ch; ++c) {
          for (int ky = 0; ky < 3; ++ky) {
            for (int kx = 0; kx < 3; ++kx) {
              const int pix = (oy + ky) * n + (ox + kx);
              gw(o, (c * 3 + ky) * 3 + kx) += g * in(c, pix);
              if (din) (*din)(c, pix) += g * w(o, (c * 3 + ky) * 3 + kx);
            }
          }
        }
      }
    }
  }
}

struct Activations {
  MatF x0;  // 4 x 49 input planes
  MatF a1;  // 16 x 25
  MatF a2;  // 32 x 9
  VecF v;   // 288
  VecF h;   // 64
  float z = 0.0f;
  float pred_deg = 0.0f;
};

void forward(const NetworkWeights& w, const Patch& patch, Activations& act) {
  act.x0.resize(4, Patch::kSize * Patch::kSize);
  for (int c = 0; c < Patch::kChannels; ++c)
    std::memcpy(act.x0.row(c).data(), patch.channels[c].data(),
                sizeof(float) * Patch::kSize * Patch::kSize);
  conv3x3_relu(act.x0, 7, w.conv1_w, w.conv1_b, act.a1);
  conv3x3_relu(act.a1, 5, w.conv2_w, w.conv2_b, act.a2);
  act.v = Eigen::Map<const VecF>(act.a2.data(), act.a2.size());
  act.h = (w.fc1_w * act.v + w.fc1_b).cwiseMax(0.0f);
  act.z = (w.fc2_w * act.h)(0) + w.fc2_b(0);
  act.pred_deg = 180.0f * std::tanh(act.z);
}

}  // namespace

AngleDeg net_forward(const NetworkWeights& weights, const Patch& patch) {
  weights.validate();
  Activations act;
  forward(weights, patch, act);
  return AngleDeg(act.pred_deg);
}

double net_loss_grad(const NetworkWeights& w, const TrainingSample& sample, NetworkWeights& grad) {
  Activations act;
  forward(w, sample.patch, act);

  const double err = wrap_degrees(act.pred_deg - sample.target.value);
  const double t = std::tanh(static_cast<double>(act.z));
  const float dz = static_cast<float>(2.0 * err * 180.0 * (1.0 - t * t));

  grad.fc2_b(0) += dz;
  grad.fc2_w.row(0) += dz * act.h.transpose();
  VecF dh = w.fc2_w.row(0).transpose() * dz;
  for (Eigen::Index i = 0; i < dh.size(); ++i)
    if (act.h(i) <= 0.0f) dh(i) = 0.0f;

  grad.fc1_b += dh;
  grad.fc1_w += dh * act.v.transpose();
  VecF dv = w.fc1_w.transpose() * dh;

  MatF da2 = Eigen::Map<const MatF>(dv.data(), 32, 9);
  for (Eigen::Index i = 0; i < da2.size(); ++i)
    if (act.a2.data()[i] <= 0.0f) da2.data()[i] = 0.0f;

  MatF da1;
  conv3x3_backward(act.a1, 5, w.conv2_w, da2, grad.conv2_w, grad.conv2_b, &da1);
  for (Eigen::Index i = 0; i < da1.size(); ++i)
    if (act.a1.data()[i] <= 0.0f) da1.data()[i] = 0.0f;
  conv3x3_backward(act.x0, 7, w.conv1_w, da1, grad.conv1_w, grad.conv1_b, nullptr);

  return err * err;
}

// ---------------------------------------------------------------------------
// Training.
// ---------------------------------------------------------------------------

TrainResult net_train(const std::vector<TrainingSample>& samples, int epochs,
                      double learning_rate, std::uint64_t rng_seed) {
  if (samples.empty()) throw InvalidArgumentError("net_train: empty dataset");
  if (learning_rate < 0.0) throw InvalidArgumentError("net_train: negative learning rate");
  if (epochs < 0) throw InvalidArgumentError("net_train: negative epoch count");

  constexpr int kBatch = 32;
  TrainResult result;
  result.weights = NetworkWeights::he_uniform(rng_seed);
  Rng shuffle_rng(splitmix64(rng_seed) ^ 0x5347445348554646ULL);  // "SGDSHUFF"

  const int n = static_cast<int>(samples.size());
  std::vector<int> order(samples.size());
  for (int i = 0; i < n; ++i) order[i] = i;

  NetworkWeights grad = NetworkWeights::zeros();
  auto apply = [](NetworkWeights& w, const NetworkWeights& g, float scale) {
    w.conv1_w += scale * g.conv1_w;
    w.conv1_b += scale * g.conv1_b;
    w.conv2_w += scale * g.conv2_w;
    w.conv2_b += scale * g.conv2_b;
    w.fc1_w += scale * g.fc1_w;
    w.fc1_b += scale * g.fc1_b;
    w.fc2_w += scale * g.fc2_w;
    w.fc2_b += scale * g.fc2_b;
  };
  auto zero = [](NetworkWeights& g) {
    g.conv1_w.setZero();
    g.conv1_b.setZero();
    g.conv2_w.setZero();
    g.conv2_b.setZero();
    g.fc1_w.setZero();
    g.fc1_b.setZero();
    g.fc2_w.setZero();
    g.fc2_b.setZero();
  };

  for (int epoch = 0; epoch < epochs; ++epoch) {
    // Fisher-Yates off the pinned stream.
    for (int i = n - 1; i > 0; --i) std::swap(order[i], order[shuffle_rng.uniform_int(i + 1)]);

    double epoch_loss = 0.0;
    for (int start = 0; start < n; start += kBatch) {
      const int batch = std::min(kBatch, n - start);
      zero(grad);
      for (int i = 0; i < batch; ++i)
        epoch_loss += net_loss_grad(result.weights, samples[order[start + i]], grad);
      apply(result.weights, grad, static_cast<float>(-learning_rate / batch));
    }
    result.epoch_loss.push_back(epoch_loss / n);
  }
  return result;
}

TrainingSet gen_training_set(const std::vector<SynthCase>& cases, int walks_per_case, Rng& rng) {
  if (walks_per_case < 1) throw InvalidArgumentError("gen_training_set: walks_per_case < 1");

  TrainingSet out;
  for (const SynthCase& synth : cases) {
    std::vector<PixelCoord> chain = trace_closed_chain(synth.gt_mask);
    bool traceable = chain.size() >= 8;
    for (std::size_t i = 0; traceable && i < chain.size(); ++i) {
      const PixelCoord& a = chain[i];
      const PixelCoord& b = chain[(i + 1) % chain.size()];
      traceable = std::max(std::abs(a.x - b.x), std::abs(a.y - b.y)) == 1;
    }
    if (!traceable) {
      ++out.skipped_cases;
      continue;
    }

    const int n = static_cast<int>(chain.size());
    for (int walk = 0; walk < walks_per_case; ++walk) {
      for (int orient = 0; orient < 2; ++orient) {
        std::vector<PixelCoord> seq = chain;
        if (orient == 1) std::reverse(seq.begin(), seq.end());
        const int start = rng.uniform_int(n);
        for (int i = 0; i < n; ++i) {
          const PixelCoord& prev = seq[(start + i + n - 1) % n];
          const PixelCoord& here = seq[(start + i) % n];
          const PixelCoord& next = seq[(start + i + 1) % n];
          const AngleDeg heading = angle_of_offset(here.x - prev.x, here.y - prev.y);
          const AngleDeg move = angle_of_offset(next.x - here.x, next.y - here.y);
          TrainingSample sample;
          sample.patch = extract_patch(synth.image, synth.soft, here, heading);
          sample.target = AngleDeg(move.value - heading.value);
          out.samples.push_back(std::move(sample));
        }
      }
    }
  }
  return out;
}

NetworkPredictor::NetworkPredictor(NetworkWeights weights) : weights_(std::move(weights)) {
  weights_.validate();
}

Prediction NetworkPredictor::predict(const Patch& patch) const {
  Activations act;
  forward(weights_, patch, act);
  return {AngleDeg(act.pred_deg), false};
}

// ---------------------------------------------------------------------------
// Weight file I/O.
// ---------------------------------------------------------------------------

namespace {

constexpr char kMagic[4] = {'W', 'T', 'L', '2'};
constexpr std::uint32_t kWeightsVersion = 1;

void put_u32(std::ostream& os, std::uint32_t v) {
  const char bytes[4] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                         static_cast<char>((v >> 16) & 0xff), static_cast<char>((v >> 24) & 0xff)};
  os.write(bytes, 4);
}

void put_f32(std::ostream& os, float f) { put_u32(os, std::bit_cast<std::uint32_t>(f)); }

std::uint32_t get_u32(std::istream& is) {
  unsigned char bytes[4];
  is.read(reinterpret_cast<char*>(bytes), 4);
  if (!is) throw TruncatedPayloadError("weights file: unexpected end of file");
  return static_cast<std::uint32_t>(bytes[0]) | (static_cast<std::uint32_t>(bytes[1]) << 8) |
         (static_cast<std::uint32_t>(bytes[2]) << 16) |
         (static_cast<std::uint32_t>(bytes[3]) << 24);
}

float get_f32(std::istream& is) { return std::bit_cast<float>(get_u32(is)); }

}  // namespace

void save_weights(const NetworkWeights& weights, const std::string& path) {
  weights.validate();
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open for writing: " + path);

  os.write(kMagic, 4);
  put_u32(os, kWeightsVersion);
  const auto& shapes = tensor_shapes();
  put_u32(os, static_cast<std::uint32_t>(shapes.size()));
  for_each_tensor(weights, [&](int idx, const float* data, std::size_t count) {
    const TensorShape& shape = shapes[idx];
    put_u32(os, static_cast<std::uint32_t>(shape.dims.size()));
    for (std::uint32_t d : shape.dims) put_u32(os, d);
    for (std::size_t i = 0; i < count; ++i) put_f32(os, data[i]);
  });
  os.flush();
  if (!os) throw IoError("write failed: " + path);
}

NetworkWeights load_weights(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw FileMissingError("cannot open weights file: " + path);

  char magic[4];
  is.read(magic, 4);
  if (!is) throw TruncatedPayloadError("weights file: shorter than the magic");
  if (std::memcmp(magic, kMagic, 4) != 0) throw BadMagicError("weights file: bad magic");
  const std::uint32_t version = get_u32(is);
  if (version != kWeightsVersion)
    throw VersionMismatchError("weights file: version " + std::to_string(version) +
                               ", expected " + std::to_string(kWeightsVersion));

  const auto& shapes = tensor_shapes();
  const std::uint32_t tensor_count = get_u32(is);
  if (tensor_count != shapes.size())
    throw WeightsFormatError("weights file: unexpected tensor count " +
                             std::to_string(tensor_count));

  NetworkWeights weights = NetworkWeights::zeros();
  for_each_tensor(weights, [&](int idx, float* data, std::size_t count) {
    const TensorShape& shape = shapes[idx];
    const std::uint32_t rank = get_u32(is);
    if (rank != shape.dims.size())
      throw InvalidWeightsError(std::string("weights file: tensor ") + shape.name +
                                " has unexpected rank");
    for (std::uint32_t d : shape.dims)
      if (get_u32(is) != d)
        throw InvalidWeightsError(std::string("weights file: tensor ") + shape.name +
                                  " has unexpected shape");
    if (count != shape_count(shape)) throw InvalidWeightsError("weights file: size bookkeeping");
    for (std::size_t i = 0; i < count; ++i) data[i] = get_f32(is);
  });
  if (is.peek() != std::ifstream::traits_type::eof())
    throw WeightsFormatError("weights file: trailing bytes");
  weights.validate();
  return weights;
}

}  // namespace walkers

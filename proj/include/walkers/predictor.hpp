#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "walkers/patch.hpp"
#include "walkers/rng.hpp"
#include "walkers/softcontour.hpp"
#include "walkers/types.hpp"

namespace walkers {

struct Prediction {
  AngleDeg angle;     // relative to the current heading, 0 = straight ahead
  bool blind = false  /* nothing visible in the patch; callers may stall */;
};

struct DirectionPredictor {
  virtual ~DirectionPredictor() = default;
  virtual Prediction predict(const Patch& patch) const = 0;
};

/// Ridge follower: samples the soft channel at radius 2.5 over candidate
/// angles in 15 degree increments, picks the strongest candidate (preferring
/// the forward |angle| <= 90 window, widening to the full +-150 sweep and
/// finally the backward cone only when everything nearer is below
/// stall_threshold) and returns the intensity-weighted circular mean of that
/// peak and its two grid neighbors.
class AnalyticPredictor : public DirectionPredictor {
 public:
  explicit AnalyticPredictor(float stall_threshold = 0.1f)
      : stall_threshold_(stall_threshold) {}

  Prediction predict(const Patch& patch) const override;

 private:
  float stall_threshold_;
};

using MatF = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using VecF = Eigen::VectorXf;

/// Tracking net: conv 3x3x4->16, conv 3x3x16->32 (valid padding, ReLU),
/// dense 288->64 (ReLU), dense 64->1, output 180*tanh. Conv kernels are
/// stored one output channel per row, flattened (in_channel, ky, kx)
/// row-major; the flatten order into fc1 is (channel, y, x).
struct NetworkWeights {
  MatF conv1_w;  // 16 x 36
  VecF conv1_b;  // 16
  MatF conv2_w;  // 32 x 144
  VecF conv2_b;  // 32
  MatF fc1_w;    // 64 x 288
  VecF fc1_b;    // 64
  MatF fc2_w;    // 1 x 64
  VecF fc2_b;    // 1

  static NetworkWeights zeros();
  static NetworkWeights he_uniform(std::uint64_t rng_seed);

  /// Throws InvalidWeightsError on any shape mismatch or non-finite value.
  void validate() const;
};

/// Deterministic forward pass. Throws InvalidWeightsError via validate().
AngleDeg net_forward(const NetworkWeights& weights, const Patch& patch);

struct TrainingSample {
  Patch patch;
  AngleDeg target;  // relative angle of the next ground-truth step
};

/// Wrapped squared angular loss of one sample plus its parameter gradient,
/// accumulated (+=) into `grad`. Returns the loss in squared degrees.
double net_loss_grad(const NetworkWeights& weights, const TrainingSample& sample,
                     NetworkWeights& grad);

struct TrainResult {
  NetworkWeights weights;
  std::vector<double> epoch_loss;  // mean wrapped squared error per epoch
};

/// Mini-batch SGD (batch 32), He-uniform init from rng_seed. Throws
/// InvalidArgumentError for an empty dataset, lr < 0 or epochs < 0.
TrainResult net_train(const std::vector<TrainingSample>& samples, int epochs,
                      double learning_rate, std::uint64_t rng_seed);

struct TrainingSet {
  std::vector<TrainingSample> samples;
  int skipped_cases = 0;  // cases whose gt contour was not a traceable loop
};

/// Walk each case's ground-truth boundary chain (both orientations,
/// walks_per_case random starting offsets) emitting one sample per step.
TrainingSet gen_training_set(const std::vector<SynthCase>& cases, int walks_per_case,
                             Rng& rng);

class NetworkPredictor : public DirectionPredictor {
 public:
  explicit NetworkPredictor(NetworkWeights weights);

  Prediction predict(const Patch& patch) const override;
  const NetworkWeights& weights() const { return weights_; }

 private:
  NetworkWeights weights_;
};

/// Binary weight container ("WTL2" magic, version, per-tensor rank/dims +
/// row-major float32 LE payload). load(save(w)) is bit-exact.
void save_weights(const NetworkWeights& weights, const std::string& path);
NetworkWeights load_weights(const std::string& path);

}  // namespace walkers

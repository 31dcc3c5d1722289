#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "magat/ad.hpp"
#include "magat/dataset.hpp"
#include "magat/fcn.hpp"

namespace magat {

enum class HeadMerge { concat, average };

struct GatConfig {
  int layer_count = 3;
  int hidden_units = 64;
  int heads = 4;
  double leaky_slope = 0.2;  // attention LeakyReLU and layer activation
  double dropout = 0.5;      // applied to the input of every layer
  // Per-layer merge; empty = concat everywhere except the last layer,
  // which averages its heads.
  std::vector<HeadMerge> head_merge;
  bool edge_weighted_attention = false;

  std::vector<HeadMerge> resolved_merges() const;
};

struct GatLayerParams {
  std::vector<Eigen::MatrixXd> w;  // per head, in_features x hidden_units
  std::vector<Eigen::MatrixXd> a;  // per head, 2*hidden_units x 1
};

struct GatModel {
  GatConfig config;
  std::string atlas;
  int input_dim = 0;
  std::vector<GatLayerParams> layers;
  Eigen::MatrixXd fc_w;  // final_dim x 2
  Eigen::MatrixXd fc_b;  // 1 x 2

  // Every parameter matrix in a fixed order (layer, head, W then a, then
  // the classifier head) — the order Adam state and checkpoints use.
  std::vector<Eigen::MatrixXd*> parameters();
  std::vector<const Eigen::MatrixXd*> parameters() const;
};

struct TrainConfig {
  int batch_size = 16;
  double learning_rate = 0.001;
  double weight_decay = 5e-4;  // loss is CE + weight_decay * ||params||^2
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  int max_epochs = 300;
  int patience = 20;  // epochs without validation-accuracy improvement
  std::uint64_t seed = 0;
};

struct Prediction {
  std::array<double, 2> probabilities{0.0, 0.0};
  Label label = Label::negative;
};

struct GraphSample {
  FcnGraph graph;
  Label label = Label::negative;
};

struct TrainResult {
  double best_validation_accuracy = 0.0;
  int best_epoch = -1;  // 0-based; -1 when validation never ran
  int epochs_run = 0;
  std::vector<double> train_loss;           // per epoch
  std::vector<double> validation_accuracy;  // per epoch
};

GatModel init_gat(const GatConfig& config, const std::string& atlas,
                  int input_dim, std::uint64_t seed);

// Tape-side parameter handles, mirroring GatModel::parameters() order.
struct GatTapeParams {
  std::vector<std::vector<ad::Tensor>> w;  // [layer][head]
  std::vector<std::vector<ad::Tensor>> a;
  ad::Tensor fc_w, fc_b;
};

GatTapeParams register_gat_params(ad::Tape& tape, const GatModel& model,
                                  bool requires_grad);

// Full forward pass to class probabilities (1 x 2 tensor). dropout_rng may
// be null only when training is false.
ad::Tensor gat_probabilities(ad::Tape& tape, const GatTapeParams& params,
                             const GatConfig& config, const FcnGraph& graph,
                             bool training, Rng* dropout_rng);

// Attention matrix of a single head: rows sum to 1 over the neighbor set,
// zero elsewhere. Exposed for verification.
Eigen::MatrixXd attention_coefficients(const Eigen::MatrixXd& h,
                                       const Eigen::MatrixXd& w,
                                       const Eigen::MatrixXd& a,
                                       const std::vector<std::vector<int>>& neighbors,
                                       double leaky_slope);

Prediction predict(const GatModel& model, const FcnGraph& graph);

double accuracy(const GatModel& model, const std::vector<GraphSample>& samples);

// Adam on CE + L2, batches of cfg.batch_size, early stopping on validation
// accuracy. Returns the curve bookkeeping; the model is left at the best
// validation epoch's parameters.
TrainResult train_gat(GatModel& model, const std::vector<GraphSample>& train,
                      const std::vector<GraphSample>& validation,
                      const TrainConfig& cfg);

nlohmann::json gat_checkpoint_to_json(const GatModel& model);
GatModel gat_checkpoint_from_json(const nlohmann::json& j);

}  // namespace magat

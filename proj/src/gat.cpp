#include "magat/gat.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "magat/error.hpp"

namespace magat {
namespace {

std::string merge_name(HeadMerge m) {
  return m == HeadMerge::concat ? "concat" : "average";
}

HeadMerge merge_from_name(const std::string& s) {
  if (s == "concat") return HeadMerge::concat;
  if (s == "average") return HeadMerge::average;
  throw DataError("unknown head merge '" + s + "'");
}

Eigen::MatrixXd glorot(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i)
      m(i, j) = (2.0 * uniform_double(rng) - 1.0) * limit;
  return m;
}

nlohmann::json matrix_to_json(const Eigen::MatrixXd& m) {
  std::vector<double> flat(m.data(), m.data() + m.size());  // column-major
  return {{"shape", {m.rows(), m.cols()}}, {"data", flat}};
}

Eigen::MatrixXd matrix_from_json(const nlohmann::json& j) {
  const auto shape = j.at("shape").get<std::vector<Eigen::Index>>();
  const auto data = j.at("data").get<std::vector<double>>();
  if (shape.size() != 2 ||
      static_cast<Eigen::Index>(data.size()) != shape[0] * shape[1])
    throw DataError("checkpoint matrix: shape/data mismatch");
  return Eigen::Map<const Eigen::MatrixXd>(data.data(), shape[0], shape[1]);
}

Eigen::MatrixXd onehot_row(Label label) {
  Eigen::MatrixXd y = Eigen::MatrixXd::Zero(1, 2);
  y(0, static_cast<int>(label)) = 1.0;
  return y;
}

}  // namespace

std::vector<HeadMerge> GatConfig::resolved_merges() const {
  if (!head_merge.empty()) {
    if (static_cast<int>(head_merge.size()) != layer_count)
      throw DataError("head_merge must list one entry per layer");
    return head_merge;
  }
  std::vector<HeadMerge> merges(layer_count, HeadMerge::concat);
  merges.back() = HeadMerge::average;
  return merges;
}

std::vector<Eigen::MatrixXd*> GatModel::parameters() {
  std::vector<Eigen::MatrixXd*> ps;
  for (auto& layer : layers) {
    for (auto& w : layer.w) ps.push_back(&w);
    for (auto& a : layer.a) ps.push_back(&a);
  }
  ps.push_back(&fc_w);
  ps.push_back(&fc_b);
  return ps;
}

std::vector<const Eigen::MatrixXd*> GatModel::parameters() const {
  std::vector<const Eigen::MatrixXd*> ps;
  for (const auto& layer : layers) {
    for (const auto& w : layer.w) ps.push_back(&w);
    for (const auto& a : layer.a) ps.push_back(&a);
  }
  ps.push_back(&fc_w);
  ps.push_back(&fc_b);
  return ps;
}

GatModel init_gat(const GatConfig& config, const std::string& atlas,
                  int input_dim, std::uint64_t seed) {
  if (config.layer_count < 1) throw DataError("gat: layer_count must be >= 1");
  if (config.heads < 1) throw DataError("gat: heads must be >= 1");
  if (config.hidden_units < 1)
    throw DataError("gat: hidden_units must be >= 1");
  if (config.dropout < 0.0 || config.dropout >= 1.0)
    throw DataError("gat: dropout must be in [0, 1)");
  if (input_dim < 1) throw DataError("gat: input_dim must be >= 1");

  const auto merges = config.resolved_merges();
  Rng rng(seed);
  GatModel model;
  model.config = config;
  model.atlas = atlas;
  model.input_dim = input_dim;

  int in = input_dim;
  for (int l = 0; l < config.layer_count; ++l) {
    GatLayerParams layer;
    for (int k = 0; k < config.heads; ++k) {
      layer.w.push_back(glorot(in, config.hidden_units, rng));
      layer.a.push_back(glorot(2 * config.hidden_units, 1, rng));
    }
    model.layers.push_back(std::move(layer));
    in = merges[l] == HeadMerge::concat ? config.hidden_units * config.heads
                                        : config.hidden_units;
  }
  model.fc_w = glorot(in, 2, rng);
  model.fc_b = Eigen::MatrixXd::Zero(1, 2);
  return model;
}

GatTapeParams register_gat_params(ad::Tape& tape, const GatModel& model,
                                  bool requires_grad) {
  GatTapeParams p;
  for (const auto& layer : model.layers) {
    std::vector<ad::Tensor> ws, as;
    for (const auto& w : layer.w) ws.push_back(tape.leaf(w, requires_grad));
    for (const auto& a : layer.a) as.push_back(tape.leaf(a, requires_grad));
    p.w.push_back(std::move(ws));
    p.a.push_back(std::move(as));
  }
  p.fc_w = tape.leaf(model.fc_w, requires_grad);
  p.fc_b = tape.leaf(model.fc_b, requires_grad);
  return p;
}

ad::Tensor gat_probabilities(ad::Tape& tape, const GatTapeParams& params,
                             const GatConfig& config, const FcnGraph& graph,
                             bool training, Rng* dropout_rng) {
  const int n = graph.node_count;
  const auto merges = config.resolved_merges();
  const int hidden = config.hidden_units;

  Eigen::MatrixXd mask = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j : graph.neighbor_lists[i]) mask(i, j) = 1.0;

  ad::Tensor edge_w;
  if (config.edge_weighted_attention)
    edge_w = tape.leaf(graph.adjacency, false);

  ad::Tensor h = tape.leaf(graph.node_features, false);
  for (std::size_t l = 0; l < params.w.size(); ++l) {
    if (training && config.dropout > 0.0)
      h = tape.dropout(h, config.dropout, *dropout_rng);

    std::vector<ad::Tensor> heads;
    for (std::size_t k = 0; k < params.w[l].size(); ++k) {
      ad::Tensor wh = tape.matmul(h, params.w[l][k]);
      ad::Tensor a_self = tape.slice_rows(params.a[l][k], 0, hidden);
      ad::Tensor a_neigh = tape.slice_rows(params.a[l][k], hidden, hidden);
      ad::Tensor e = tape.outer_add(tape.matmul(wh, a_self),
                                    tape.matmul(wh, a_neigh));
      e = tape.leaky_relu(e, config.leaky_slope);
      if (config.edge_weighted_attention) e = tape.cwise_mul(e, edge_w);
      ad::Tensor alpha = tape.masked_softmax(e, mask);
      heads.push_back(tape.matmul(alpha, wh));
    }

    if (merges[l] == HeadMerge::concat) {
      for (auto& head : heads) head = tape.leaky_relu(head, config.leaky_slope);
      h = heads.size() == 1 ? heads[0] : tape.concat_cols(heads);
    } else {
      ad::Tensor acc = heads[0];
      for (std::size_t k = 1; k < heads.size(); ++k)
        acc = tape.add(acc, heads[k]);
      acc = tape.scalar_mul(acc, 1.0 / static_cast<double>(heads.size()));
      h = tape.leaky_relu(acc, config.leaky_slope);
    }
  }

  ad::Tensor pooled = tape.mean_rows(h);
  ad::Tensor logits =
      tape.add(tape.matmul(pooled, params.fc_w), params.fc_b);
  return tape.softmax_rows(logits);
}

Eigen::MatrixXd attention_coefficients(
    const Eigen::MatrixXd& h, const Eigen::MatrixXd& w,
    const Eigen::MatrixXd& a,
    const std::vector<std::vector<int>>& neighbors, double leaky_slope) {
  const int n = static_cast<int>(h.rows());
  const int hidden = static_cast<int>(w.cols());
  Eigen::MatrixXd wh = h * w;
  Eigen::VectorXd f = wh * a.topRows(hidden);
  Eigen::VectorXd g = wh * a.bottomRows(hidden);
  Eigen::MatrixXd alpha = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    if (neighbors[i].empty())
      throw DataError("attention_coefficients: node " + std::to_string(i) +
                      " has an empty neighbor list");
    double mx = -std::numeric_limits<double>::infinity();
    for (int j : neighbors[i]) {
      double e = f(i) + g(j);
      e = e >= 0.0 ? e : leaky_slope * e;
      alpha(i, j) = e;
      mx = std::max(mx, e);
    }
    double z = 0.0;
    for (int j : neighbors[i]) {
      alpha(i, j) = std::exp(alpha(i, j) - mx);
      z += alpha(i, j);
    }
    for (int j : neighbors[i]) alpha(i, j) /= z;
  }
  return alpha;
}

Prediction predict(const GatModel& model, const FcnGraph& graph) {
  if (graph.node_count != model.input_dim) {
    throw DataError("predict: graph has " + std::to_string(graph.node_count) +
                    " nodes but the " + model.atlas + " model expects " +
                    std::to_string(model.input_dim));
  }
  ad::Tape tape;
  GatTapeParams params = register_gat_params(tape, model, false);
  ad::Tensor probs =
      gat_probabilities(tape, params, model.config, graph, false, nullptr);
  Prediction out;
  out.probabilities = {probs.value()(0, 0), probs.value()(0, 1)};
  out.label =
      out.probabilities[1] > out.probabilities[0] ? Label::positive
                                                  : Label::negative;
  return out;
}

double accuracy(const GatModel& model, const std::vector<GraphSample>& samples) {
  if (samples.empty()) throw DataError("accuracy: empty sample list");
  int correct = 0;
  for (const auto& s : samples)
    if (predict(model, s.graph).label == s.label) ++correct;
  return static_cast<double>(correct) / static_cast<double>(samples.size());
}

TrainResult train_gat(GatModel& model, const std::vector<GraphSample>& train,
                      const std::vector<GraphSample>& validation,
                      const TrainConfig& cfg) {
  if (train.empty() || validation.empty())
    throw DataError("train_gat: train and validation must be nonempty");
  bool has_pos = false, has_neg = false;
  for (const auto& s : train) {
    (s.label == Label::positive ? has_pos : has_neg) = true;
  }
  if (!has_pos || !has_neg)
    throw DataError("train_gat: both classes required in the train split");
  if (cfg.batch_size < 1) throw DataError("train_gat: batch_size must be >= 1");
  if (cfg.learning_rate < 0.0)
    throw DataError("train_gat: learning_rate must be >= 0");
  if (cfg.max_epochs < 1 || cfg.patience < 1)
    throw DataError("train_gat: max_epochs and patience must be >= 1");

  auto params = model.parameters();
  const std::size_t np = params.size();
  std::vector<Eigen::MatrixXd> adam_m(np), adam_v(np), grads(np), best(np);
  for (std::size_t i = 0; i < np; ++i) {
    adam_m[i] = Eigen::MatrixXd::Zero(params[i]->rows(), params[i]->cols());
    adam_v[i] = adam_m[i];
    grads[i] = adam_m[i];
    best[i] = *params[i];
  }

  Rng rng(cfg.seed);
  std::vector<int> order(train.size());
  std::iota(order.begin(), order.end(), 0);

  TrainResult result;
  double best_acc = -1.0;
  int wait = 0;
  long step = 0;

  for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
    deterministic_shuffle(order, rng);
    double epoch_loss = 0.0;

    for (std::size_t at = 0; at < order.size(); at += cfg.batch_size) {
      const std::size_t stop = std::min(order.size(),
                                        at + static_cast<std::size_t>(cfg.batch_size));
      const double batch_n = static_cast<double>(stop - at);
      for (std::size_t i = 0; i < np; ++i) grads[i].setZero();

      for (std::size_t b = at; b < stop; ++b) {
        const GraphSample& s = train[order[b]];
        ad::Tape tape;
        GatTapeParams tp = register_gat_params(tape, model, true);
        ad::Tensor probs =
            gat_probabilities(tape, tp, model.config, s.graph, true, &rng);
        ad::Tensor loss = tape.cross_entropy(probs, onehot_row(s.label));
        const double lv = loss.value()(0, 0);
        if (!std::isfinite(lv)) {
          throw NumericalError("train_gat: non-finite loss at epoch " +
                               std::to_string(epoch) + " (" + model.atlas +
                               ")");
        }
        epoch_loss += lv;
        tape.backward(loss);

        std::vector<ad::Tensor> handles;
        for (std::size_t l = 0; l < tp.w.size(); ++l) {
          for (auto& t : tp.w[l]) handles.push_back(t);
          for (auto& t : tp.a[l]) handles.push_back(t);
        }
        handles.push_back(tp.fc_w);
        handles.push_back(tp.fc_b);
        for (std::size_t i = 0; i < np; ++i)
          grads[i] += tape.grad(handles[i]) / batch_n;
      }

      ++step;
      const double bc1 = 1.0 - std::pow(cfg.adam_beta1, step);
      const double bc2 = 1.0 - std::pow(cfg.adam_beta2, step);
      for (std::size_t i = 0; i < np; ++i) {
        Eigen::MatrixXd g = grads[i] + 2.0 * cfg.weight_decay * *params[i];
        adam_m[i] = cfg.adam_beta1 * adam_m[i] + (1.0 - cfg.adam_beta1) * g;
        adam_v[i] = cfg.adam_beta2 * adam_v[i] +
                    (1.0 - cfg.adam_beta2) * g.cwiseProduct(g);
        Eigen::MatrixXd update = ((adam_m[i] / bc1).array() /
                                  ((adam_v[i] / bc2).cwiseSqrt().array() +
                                   cfg.adam_eps))
                                     .matrix();
        *params[i] -= cfg.learning_rate * update;
      }
    }

    result.train_loss.push_back(epoch_loss / static_cast<double>(train.size()));
    const double val_acc = accuracy(model, validation);
    result.validation_accuracy.push_back(val_acc);
    result.epochs_run = epoch + 1;

    if (val_acc > best_acc) {
      best_acc = val_acc;
      result.best_epoch = epoch;
      for (std::size_t i = 0; i < np; ++i) best[i] = *params[i];
      wait = 0;
    } else if (++wait >= cfg.patience) {
      break;
    }
  }

  for (std::size_t i = 0; i < np; ++i) *params[i] = best[i];
  result.best_validation_accuracy = best_acc;
  return result;
}

nlohmann::json gat_checkpoint_to_json(const GatModel& model) {
  const auto merges = model.config.resolved_merges();
  nlohmann::json merge_names = nlohmann::json::array();
  for (HeadMerge m : merges) merge_names.push_back(merge_name(m));

  nlohmann::json layers = nlohmann::json::array();
  for (const auto& layer : model.layers) {
    nlohmann::json jw = nlohmann::json::array(), ja = nlohmann::json::array();
    for (const auto& w : layer.w) jw.push_back(matrix_to_json(w));
    for (const auto& a : layer.a) ja.push_back(matrix_to_json(a));
    layers.push_back({{"w", jw}, {"a", ja}});
  }

  return {{"format", "gat-checkpoint-v1"},
          {"atlas", model.atlas},
          {"input_dim", model.input_dim},
          {"config",
           {{"layer_count", model.config.layer_count},
            {"hidden_units", model.config.hidden_units},
            {"heads", model.config.heads},
            {"leaky_slope", model.config.leaky_slope},
            {"dropout", model.config.dropout},
            {"head_merge", merge_names},
            {"edge_weighted_attention", model.config.edge_weighted_attention}}},
          {"layers", layers},
          {"fc_w", matrix_to_json(model.fc_w)},
          {"fc_b", matrix_to_json(model.fc_b)}};
}

GatModel gat_checkpoint_from_json(const nlohmann::json& j) {
  if (j.value("format", "") != "gat-checkpoint-v1")
    throw DataError("checkpoint: unknown format");
  GatModel model;
  model.atlas = j.at("atlas").get<std::string>();
  model.input_dim = j.at("input_dim").get<int>();
  const auto& jc = j.at("config");
  model.config.layer_count = jc.at("layer_count").get<int>();
  model.config.hidden_units = jc.at("hidden_units").get<int>();
  model.config.heads = jc.at("heads").get<int>();
  model.config.leaky_slope = jc.at("leaky_slope").get<double>();
  model.config.dropout = jc.at("dropout").get<double>();
  model.config.edge_weighted_attention =
      jc.at("edge_weighted_attention").get<bool>();
  model.config.head_merge.clear();
  for (const auto& name : jc.at("head_merge"))
    model.config.head_merge.push_back(merge_from_name(name.get<std::string>()));

  for (const auto& jl : j.at("layers")) {
    GatLayerParams layer;
    for (const auto& jw : jl.at("w")) layer.w.push_back(matrix_from_json(jw));
    for (const auto& ja : jl.at("a")) layer.a.push_back(matrix_from_json(ja));
    model.layers.push_back(std::move(layer));
  }
  model.fc_w = matrix_from_json(j.at("fc_w"));
  model.fc_b = matrix_from_json(j.at("fc_b"));
  return model;
}

}  // namespace magat

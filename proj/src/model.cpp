#include "alrt/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include <json.hpp>

namespace alrt {

namespace {

double sigmoid(double z) {
  if (z >= 0.0) {
    return 1.0 / (1.0 + std::exp(-z));
  }
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double clamp_prob(double p) {
  return std::min(1.0 - kProbEpsilon, std::max(kProbEpsilon, p));
}

void check_dims(const ModelParams& params, const Matrix& sequence) {
  if (sequence.rows == 0) throw ConfigError("forward: empty sequence");
  if (sequence.cols != params.input_dim)
    throw ConfigError("forward: sequence has " + std::to_string(sequence.cols) +
                      " columns, model expects " + std::to_string(params.input_dim));
  if (params.w_xh.rows != params.hidden_dim || params.w_xh.cols != params.input_dim ||
      params.w_hh.rows != params.hidden_dim || params.w_hh.cols != params.hidden_dim ||
      params.b_h.size() != params.hidden_dim || params.w_hy.size() != params.hidden_dim)
    throw ConfigError("forward: inconsistent parameter dimensions");
}

}  // namespace

ModelParams init_params(std::size_t hidden_dim, std::size_t input_dim,
                        std::uint64_t rng_seed) {
  if (hidden_dim == 0) throw ConfigError("hidden_dim must be >= 1");
  if (input_dim == 0) throw ConfigError("input_dim must be >= 1");
  ModelParams params;
  params.hidden_dim = hidden_dim;
  params.input_dim = input_dim;
  params.w_xh = Matrix(hidden_dim, input_dim);
  params.w_hh = Matrix(hidden_dim, hidden_dim);
  params.b_h.assign(hidden_dim, 0.0);
  params.w_hy.assign(hidden_dim, 0.0);

  Rng rng(rng_seed);
  const double in_bound = 1.0 / std::sqrt(static_cast<double>(input_dim));
  const double rec_bound = 1.0 / std::sqrt(static_cast<double>(hidden_dim));
  for (auto& w : params.w_xh.data) w = rng.uniform(-in_bound, in_bound);
  for (auto& w : params.w_hh.data) w = rng.uniform(-rec_bound, rec_bound);
  for (auto& w : params.w_hy) w = rng.uniform(-rec_bound, rec_bound);
  return params;
}

ForwardCache forward_cached(const ModelParams& params, const Matrix& sequence) {
  check_dims(params, sequence);
  const std::size_t t_count = sequence.rows;
  const std::size_t h_dim = params.hidden_dim;

  ForwardCache cache;
  cache.hidden = Matrix(t_count, h_dim);
  cache.probs.resize(t_count);

  std::vector<double> state(h_dim, 0.0);
  for (std::size_t t = 0; t < t_count; ++t) {
    const double* x = sequence.row(t);
    double* h = cache.hidden.row(t);
    for (std::size_t i = 0; i < h_dim; ++i) {
      double a = params.b_h[i];
      const double* wx = params.w_xh.row(i);
      for (std::size_t j = 0; j < params.input_dim; ++j) a += wx[j] * x[j];
      const double* wh = params.w_hh.row(i);
      for (std::size_t j = 0; j < h_dim; ++j) a += wh[j] * state[j];
      h[i] = std::tanh(a);
    }
    double z = params.b_y;
    for (std::size_t i = 0; i < h_dim; ++i) z += params.w_hy[i] * h[i];
    if (!std::isfinite(z))
      throw NumericError("forward: non-finite activation at timestep " +
                         std::to_string(t));
    cache.probs[t] = clamp_prob(sigmoid(z));
    std::copy(h, h + h_dim, state.begin());
  }
  return cache;
}

SequenceProbabilities forward(const ModelParams& params, const Matrix& sequence) {
  return forward_cached(params, sequence).probs;
}

double sequence_loss(const SequenceProbabilities& probs,
                     const std::vector<int>& labels, const ClassWeights& weights) {
  if (probs.size() != labels.size())
    throw ConfigError("loss: probs/labels length mismatch");
  if (probs.empty()) throw ConfigError("loss: empty sequence");
  double total = 0.0;
  for (std::size_t t = 0; t < probs.size(); ++t) {
    const double p = clamp_prob(probs[t]);
    total += labels[t] != 0 ? -weights.weight_positive * std::log(p)
                            : -weights.weight_negative * std::log(1.0 - p);
  }
  return total / static_cast<double>(probs.size());
}

ModelParams backward(const ModelParams& params, const Matrix& sequence,
                     const std::vector<int>& labels, const ClassWeights& weights,
                     const ForwardCache& cache) {
  check_dims(params, sequence);
  if (labels.size() != sequence.rows)
    throw ConfigError("backward: labels length mismatch");
  const std::size_t t_count = sequence.rows;
  const std::size_t h_dim = params.hidden_dim;
  const double inv_t = 1.0 / static_cast<double>(t_count);

  ModelParams grad;
  grad.hidden_dim = h_dim;
  grad.input_dim = params.input_dim;
  grad.w_xh = Matrix(h_dim, params.input_dim);
  grad.w_hh = Matrix(h_dim, h_dim);
  grad.b_h.assign(h_dim, 0.0);
  grad.w_hy.assign(h_dim, 0.0);

  // carry[i] = dL/da_{t+1} backpropagated through W_hh into h_t
  std::vector<double> carry(h_dim, 0.0);
  std::vector<double> pre_act_grad(h_dim, 0.0);
  for (std::size_t ti = t_count; ti-- > 0;) {
    const double* h = cache.hidden.row(ti);
    const double p = cache.probs[ti];
    // dL/dz_t of the mean weighted cross entropy
    const double dz = inv_t * (labels[ti] != 0
                                   ? -weights.weight_positive * (1.0 - p)
                                   : weights.weight_negative * p);
    grad.b_y += dz;
    for (std::size_t i = 0; i < h_dim; ++i) grad.w_hy[i] += dz * h[i];

    // dL/dh_t = w_hy dz + W_hh^T carry;  dL/da_t = dL/dh_t * (1 - h^2)
    for (std::size_t i = 0; i < h_dim; ++i) {
      double dh = params.w_hy[i] * dz;
      for (std::size_t k = 0; k < h_dim; ++k)
        dh += params.w_hh(k, i) * carry[k];
      pre_act_grad[i] = dh * (1.0 - h[i] * h[i]);
    }

    const double* x = sequence.row(ti);
    const double* h_prev = ti > 0 ? cache.hidden.row(ti - 1) : nullptr;
    for (std::size_t i = 0; i < h_dim; ++i) {
      const double e = pre_act_grad[i];
      grad.b_h[i] += e;
      double* gx = grad.w_xh.row(i);
      for (std::size_t j = 0; j < params.input_dim; ++j) gx[j] += e * x[j];
      if (h_prev) {
        double* gh = grad.w_hh.row(i);
        for (std::size_t j = 0; j < h_dim; ++j) gh[j] += e * h_prev[j];
      }
    }
    carry = pre_act_grad;
  }

  for (std::size_t i = 0; i < param_count(grad); ++i) {
    if (!std::isfinite(get_param(grad, i)))
      throw NumericError("backward: non-finite gradient");
  }
  return grad;
}

std::size_t param_count(const ModelParams& params) {
  return params.w_xh.data.size() + params.w_hh.data.size() + params.b_h.size() +
         params.w_hy.size() + 1;
}

double get_param(const ModelParams& params, std::size_t index) {
  std::size_t n = params.w_xh.data.size();
  if (index < n) return params.w_xh.data[index];
  index -= n;
  n = params.w_hh.data.size();
  if (index < n) return params.w_hh.data[index];
  index -= n;
  n = params.b_h.size();
  if (index < n) return params.b_h[index];
  index -= n;
  n = params.w_hy.size();
  if (index < n) return params.w_hy[index];
  return params.b_y;
}

void set_param(ModelParams& params, std::size_t index, double value) {
  std::size_t n = params.w_xh.data.size();
  if (index < n) {
    params.w_xh.data[index] = value;
    return;
  }
  index -= n;
  n = params.w_hh.data.size();
  if (index < n) {
    params.w_hh.data[index] = value;
    return;
  }
  index -= n;
  n = params.b_h.size();
  if (index < n) {
    params.b_h[index] = value;
    return;
  }
  index -= n;
  n = params.w_hy.size();
  if (index < n) {
    params.w_hy[index] = value;
    return;
  }
  params.b_y = value;
}

double global_grad_norm(const ModelParams& grad) {
  double sum_sq = 0.0;
  for (std::size_t i = 0; i < param_count(grad); ++i) {
    const double g = get_param(grad, i);
    sum_sq += g * g;
  }
  return std::sqrt(sum_sq);
}

namespace {

void sgd_step(ModelParams& params, const ModelParams& grad, double lr,
              const std::optional<double>& clip) {
  double scale = lr;
  if (clip) {
    const double norm = global_grad_norm(grad);
    if (norm > *clip) scale = lr * (*clip / norm);
  }
  const std::size_t n = param_count(params);
  for (std::size_t i = 0; i < n; ++i)
    set_param(params, i, get_param(params, i) - scale * get_param(grad, i));
}

}  // namespace

TrainTrace train(ModelParams& params,
                 const std::vector<const FeatureSequence*>& dataset,
                 const TrainConfig& config, int epoch_offset) {
  config.validate();
  if (dataset.empty()) throw ConfigError("train: empty dataset");
  TrainTrace trace;
  std::vector<std::size_t> order(dataset.size());
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), 0);
    Rng rng(derive_seed(config.rng_seed, "shuffle",
                        static_cast<std::uint64_t>(epoch_offset + epoch)));
    rng.shuffle(order);

    double loss_sum = 0.0;
    for (std::size_t pos = 0; pos < order.size(); ++pos) {
      const FeatureSequence& seq = *dataset[order[pos]];
      try {
        const ForwardCache cache = forward_cached(params, seq.matrix);
        const double loss =
            sequence_loss(cache.probs, seq.labels, config.class_weights);
        loss_sum += loss;
        const ModelParams grad = backward(params, seq.matrix, seq.labels,
                                          config.class_weights, cache);
        sgd_step(params, grad, config.learning_rate, config.gradient_clip);
      } catch (const NumericError& e) {
        throw NumericError("train: epoch " + std::to_string(epoch_offset + epoch) +
                           ", sequence " + std::to_string(pos) + " (" +
                           seq.patient_id + "): " + e.what());
      }
    }
    trace.epoch_mean_loss.push_back(loss_sum / static_cast<double>(dataset.size()));
  }
  return trace;
}

TrainTrace train(ModelParams& params, const std::vector<FeatureSequence>& dataset,
                 const TrainConfig& config, int epoch_offset) {
  std::vector<const FeatureSequence*> view;
  view.reserve(dataset.size());
  for (const auto& seq : dataset) view.push_back(&seq);
  return train(params, view, config, epoch_offset);
}

void save_checkpoint(const ModelParams& params, const TrainConfig& config,
                     const std::filesystem::path& file) {
  nlohmann::ordered_json obj;
  obj["hidden_dim"] = params.hidden_dim;
  obj["input_dim"] = params.input_dim;
  obj["w_xh"] = params.w_xh.data;  // row-major
  obj["w_hh"] = params.w_hh.data;
  obj["b_h"] = params.b_h;
  obj["w_hy"] = params.w_hy;
  obj["b_y"] = params.b_y;
  obj["seed"] = config.rng_seed;
  nlohmann::ordered_json train_obj;
  train_obj["learning_rate"] = config.learning_rate;
  train_obj["epochs"] = config.epochs;
  if (config.gradient_clip)
    train_obj["gradient_clip"] = *config.gradient_clip;
  else
    train_obj["gradient_clip"] = nullptr;
  train_obj["weight_negative"] = config.class_weights.weight_negative;
  train_obj["weight_positive"] = config.class_weights.weight_positive;
  obj["train_config"] = std::move(train_obj);
  std::ofstream out(file);
  if (!out) throw IoError("cannot write " + file.string());
  out << obj.dump(2) << '\n';
}

Checkpoint load_checkpoint(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw IoError("cannot read " + file.string());
  nlohmann::json obj;
  try {
    in >> obj;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(file.string() + ": " + e.what());
  }
  Checkpoint ck;
  ck.params.hidden_dim = obj.at("hidden_dim").get<std::size_t>();
  ck.params.input_dim = obj.at("input_dim").get<std::size_t>();
  ck.params.w_xh = Matrix(ck.params.hidden_dim, ck.params.input_dim);
  ck.params.w_xh.data = obj.at("w_xh").get<std::vector<double>>();
  ck.params.w_hh = Matrix(ck.params.hidden_dim, ck.params.hidden_dim);
  ck.params.w_hh.data = obj.at("w_hh").get<std::vector<double>>();
  ck.params.b_h = obj.at("b_h").get<std::vector<double>>();
  ck.params.w_hy = obj.at("w_hy").get<std::vector<double>>();
  ck.params.b_y = obj.at("b_y").get<double>();
  if (ck.params.w_xh.data.size() != ck.params.hidden_dim * ck.params.input_dim ||
      ck.params.w_hh.data.size() != ck.params.hidden_dim * ck.params.hidden_dim ||
      ck.params.b_h.size() != ck.params.hidden_dim ||
      ck.params.w_hy.size() != ck.params.hidden_dim)
    throw ParseError(file.string() + ": weight shapes do not match dimensions");
  ck.config.rng_seed = obj.at("seed").get<std::uint64_t>();
  const auto& train_obj = obj.at("train_config");
  ck.config.learning_rate = train_obj.at("learning_rate").get<double>();
  ck.config.epochs = train_obj.at("epochs").get<int>();
  if (train_obj.at("gradient_clip").is_null())
    ck.config.gradient_clip = std::nullopt;
  else
    ck.config.gradient_clip = train_obj.at("gradient_clip").get<double>();
  ck.config.class_weights.weight_negative =
      train_obj.at("weight_negative").get<double>();
  ck.config.class_weights.weight_positive =
      train_obj.at("weight_positive").get<double>();
  return ck;
}

}  // namespace alrt

#include "deckmotion/train.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "deckmotion/rng.hpp"

namespace deckmotion {

using nlohmann::json;

void TrainConfig::validate() const {
  if (epochs < 1) throw std::invalid_argument("epochs must be >= 1");
  if (batch_size < 1) throw std::invalid_argument("batch size must be >= 1");
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate))
    throw std::invalid_argument("learning rate must be finite and non-negative");
  if (hidden_dim < 1) throw std::invalid_argument("hidden size must be >= 1");
  if (lookback < 1) throw std::invalid_argument("lookback must be >= 1");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0) || !(epsilon > 0.0))
    throw std::invalid_argument("invalid adam hyperparameters");
}

TrainingDiverged::TrainingDiverged(int epoch, std::size_t batch, double loss)
    : std::runtime_error("training diverged: loss " + format_double(loss) + " at epoch " +
                         std::to_string(epoch) + ", batch " + std::to_string(batch)),
      epoch_(epoch),
      batch_(batch) {}

PreparedData prepare_training_data(const MotionSeries& series, std::size_t lookback,
                                   double train_fraction) {
  // The boundary must leave at least one window on each side.
  const auto boundary =
      static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(series.size())));
  if (!(train_fraction > 0.0 && train_fraction < 1.0) || boundary <= lookback ||
      boundary >= series.size())
    throw InvalidSeries("train fraction " + format_double(train_fraction) +
                        " leaves the train or test side empty");
  PreparedData out;
  out.normalizer = fit_normalizer(series, boundary);
  const auto windows = make_windows(apply_normalizer(out.normalizer, series), lookback);
  out.split = split_series(windows, train_fraction, series.size());
  return out;
}

std::vector<Example> examples_of(const WindowedDataset& ds) {
  std::vector<Example> out;
  out.reserve(ds.size());
  for (std::size_t k = 0; k < ds.size(); ++k) out.push_back({ds.window(k), ds.targets[k]});
  return out;
}

void sgd_step(LstmParams& params, const Gradients& grads, double learning_rate) {
  auto p = params.flat();
  const auto g = grads.flat();
  for (std::size_t j = 0; j < p.size(); ++j) p[j] -= learning_rate * g[j];
}

namespace {

class Adam {
 public:
  Adam(std::size_t n, const TrainConfig& c)
      : m_(n, 0.0), v_(n, 0.0), lr_(c.learning_rate), b1_(c.beta1), b2_(c.beta2), eps_(c.epsilon) {}

  void step(LstmParams& params, const Gradients& grads) {
    ++t_;
    const double c1 = 1.0 - std::pow(b1_, t_);
    const double c2 = 1.0 - std::pow(b2_, t_);
    auto p = params.flat();
    const auto g = grads.flat();
    for (std::size_t j = 0; j < p.size(); ++j) {
      m_[j] = b1_ * m_[j] + (1.0 - b1_) * g[j];
      v_[j] = b2_ * v_[j] + (1.0 - b2_) * g[j] * g[j];
      const double m_hat = m_[j] / c1;
      const double v_hat = v_[j] / c2;
      p[j] -= lr_ * m_hat / (std::sqrt(v_hat) + eps_);
    }
  }

 private:
  std::vector<double> m_, v_;
  double lr_, b1_, b2_, eps_;
  int t_ = 0;
};

std::string describe(const TrainConfig& c, std::uint64_t seed) {
  std::ostringstream os;
  os << "optimizer=" << (c.optimizer == Optimizer::adam ? "adam" : "sgd")
     << " lr=" << format_double(c.learning_rate) << " epochs=" << c.epochs
     << " batch=" << c.batch_size << " hidden=" << c.hidden_dim << " lookback=" << c.lookback
     << " seed=" << seed << " shuffle_seed=" << c.shuffle_seed;
  return os.str();
}

}  // namespace

TrainResult train(const SplitDataset& split, const Normalizer& normalizer,
                  const TrainConfig& config, std::uint64_t seed, const EpochCallback& on_epoch) {
  config.validate();
  if (split.train.size() == 0 || split.test.size() == 0)
    throw std::invalid_argument("train and test sets must be non-empty");
  if (split.train.lookback != static_cast<std::size_t>(config.lookback))
    throw std::invalid_argument("dataset lookback does not match the training config");

  const auto start = std::chrono::steady_clock::now();
  LstmConfig net;
  net.hidden_dim = config.hidden_dim;
  net.lookback = config.lookback;

  TrainResult result;
  ModelArtifact& art = result.artifact;
  art.config = net;
  art.params = init_params(net, seed);
  art.normalizer = normalizer;
  art.provenance = describe(config, seed);

  const auto train_examples = examples_of(split.train);
  const std::size_t n = train_examples.size();
  const auto batch_size = static_cast<std::size_t>(config.batch_size);

  GradientKernel kernel(net);
  Gradients grads(net);
  Adam adam(art.params.size(), config);
  std::vector<std::size_t> order(n);
  std::vector<Example> batch;
  batch.reserve(batch_size);

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(mix_seed(config.shuffle_seed, static_cast<std::uint64_t>(epoch)));
    for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);

    double weighted = 0.0;
    for (std::size_t b = 0, start_k = 0; start_k < n; ++b, start_k += batch_size) {
      batch.clear();
      for (std::size_t k = start_k; k < std::min(n, start_k + batch_size); ++k)
        batch.push_back(train_examples[order[k]]);
      const double loss = kernel.compute(art.params, batch, grads);
      if (!std::isfinite(loss)) throw TrainingDiverged(epoch, b, loss);
      weighted += loss * static_cast<double>(batch.size());
      if (config.optimizer == Optimizer::adam)
        adam.step(art.params, grads);
      else
        sgd_step(art.params, grads, config.learning_rate);
    }
    const double epoch_loss = weighted / static_cast<double>(n);
    result.report.epoch_losses.push_back(epoch_loss);
    if (on_epoch) on_epoch(epoch, epoch_loss);
  }

  const auto test_examples = examples_of(split.test);
  result.report.final_test_loss = batch_loss(art.params, test_examples);
  if (!std::isfinite(result.report.final_test_loss))
    throw TrainingDiverged(config.epochs - 1, 0, result.report.final_test_loss);
  result.report.config = config;
  result.report.wall_time_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

// ---- persistence ---------------------------------------------------------

namespace {

json matrix_to_json(const Eigen::Ref<const Eigen::MatrixXd>& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

json vector_to_json(const Eigen::Ref<const Eigen::VectorXd>& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

void matrix_from_json(const json& j, Eigen::Ref<Eigen::MatrixXd> m, const std::string& name) {
  if (!j.is_array() || j.size() != static_cast<std::size_t>(m.rows()))
    throw ShapeMismatchError(name + ": expected " + std::to_string(m.rows()) + " rows");
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    const json& row = j[static_cast<std::size_t>(i)];
    if (!row.is_array() || row.size() != static_cast<std::size_t>(m.cols()))
      throw ShapeMismatchError(name + ": expected " + std::to_string(m.cols()) + " columns");
    for (Eigen::Index k = 0; k < m.cols(); ++k) {
      const json& v = row[static_cast<std::size_t>(k)];
      if (!v.is_number()) throw MalformedModelError(name + ": non-numeric entry");
      m(i, k) = v.get<double>();
    }
  }
}

void vector_from_json(const json& j, Eigen::Ref<Eigen::VectorXd> v, const std::string& name) {
  if (!j.is_array() || j.size() != static_cast<std::size_t>(v.size()))
    throw ShapeMismatchError(name + ": expected " + std::to_string(v.size()) + " entries");
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const json& x = j[static_cast<std::size_t>(i)];
    if (!x.is_number()) throw MalformedModelError(name + ": non-numeric entry");
    v(i) = x.get<double>();
  }
}

constexpr std::pair<Gate, const char*> kGateNames[] = {
    {Gate::input, "i"}, {Gate::forget, "f"}, {Gate::candidate, "g"}, {Gate::output, "o"}};

Motion motion_from_json(const json& j, const char* name) {
  if (!j.is_array() || j.size() != 3) throw MalformedModelError(std::string(name) + ": need 3 values");
  Motion m;
  for (int c = 0; c < 3; ++c) {
    if (!j[c].is_number()) throw MalformedModelError(std::string(name) + ": non-numeric entry");
    m[c] = j[c].get<double>();
  }
  return m;
}

}  // namespace

json to_json(const LstmConfig& c) {
  return {{"input_dim", c.input_dim},
          {"hidden_dim", c.hidden_dim},
          {"output_dim", c.output_dim},
          {"lookback", c.lookback}};
}

json to_json(const Normalizer& n) {
  return {{"offset", n.offset}, {"scale", n.scale}};
}

json to_json(const TrainConfig& c) {
  return {{"epochs", c.epochs},
          {"batch_size", c.batch_size},
          {"learning_rate", c.learning_rate},
          {"optimizer", c.optimizer == Optimizer::adam ? "adam" : "sgd"},
          {"beta1", c.beta1},
          {"beta2", c.beta2},
          {"epsilon", c.epsilon},
          {"shuffle_seed", c.shuffle_seed},
          {"hidden_dim", c.hidden_dim},
          {"lookback", c.lookback}};
}

json to_json(const TrainReport& r, bool include_timing) {
  json doc = {{"epoch_losses", r.epoch_losses},
              {"final_test_loss", r.final_test_loss},
              {"config", to_json(r.config)}};
  if (include_timing) doc["wall_time_seconds"] = r.wall_time_seconds;
  return doc;
}

json to_json(const ModelArtifact& a) {
  json params = json::object();
  for (const auto& [gate, name] : kGateNames) {
    params[std::string("W_") + name] = matrix_to_json(a.params.gate_input_weights(gate));
    params[std::string("U_") + name] = matrix_to_json(a.params.gate_recurrent_weights(gate));
    params[std::string("b_") + name] = vector_to_json(a.params.gate_bias(gate));
  }
  params["W_out"] = matrix_to_json(a.params.head_weights());
  params["b_out"] = vector_to_json(a.params.head_bias());
  return {{"format_version", a.format_version},
          {"config", to_json(a.config)},
          {"normalizer", to_json(a.normalizer)},
          {"params", std::move(params)},
          {"provenance", a.provenance}};
}

ModelArtifact artifact_from_json_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw MalformedModelError(std::string("model file does not parse: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("format_version") ||
      !doc["format_version"].is_number_integer())
    throw MalformedModelError("model file has no integer format_version");
  ModelArtifact a;
  a.format_version = doc["format_version"].get<int>();
  if (a.format_version != kModelFormatVersion)
    throw UnknownVersionError("unknown model format version " + std::to_string(a.format_version));

  try {
    const json& c = doc.at("config");
    a.config.input_dim = c.at("input_dim").get<int>();
    a.config.hidden_dim = c.at("hidden_dim").get<int>();
    a.config.output_dim = c.at("output_dim").get<int>();
    a.config.lookback = c.at("lookback").get<int>();
    try {
      a.config.validate();
    } catch (const std::invalid_argument& e) {
      throw ShapeMismatchError(std::string("bad config: ") + e.what());
    }
    const json& n = doc.at("normalizer");
    a.normalizer.offset = motion_from_json(n.at("offset"), "normalizer.offset");
    a.normalizer.scale = motion_from_json(n.at("scale"), "normalizer.scale");
    for (double s : a.normalizer.scale)
      if (!(s > 0.0)) throw MalformedModelError("normalizer scale must be positive");

    a.params = LstmParams(a.config);
    const json& p = doc.at("params");
    for (const auto& [gate, name] : kGateNames) {
      const std::string w = std::string("W_") + name, u = std::string("U_") + name,
                        b = std::string("b_") + name;
      matrix_from_json(p.at(w), a.params.gate_input_weights(gate), w);
      matrix_from_json(p.at(u), a.params.gate_recurrent_weights(gate), u);
      vector_from_json(p.at(b), a.params.gate_bias(gate), b);
    }
    matrix_from_json(p.at("W_out"), a.params.head_weights(), "W_out");
    vector_from_json(p.at("b_out"), a.params.head_bias(), "b_out");
    a.provenance = doc.value("provenance", std::string{});
  } catch (const json::exception& e) {
    throw MalformedModelError(std::string("model file is missing fields: ") + e.what());
  }
  if (!a.params.all_finite()) throw MalformedModelError("model weights are not finite");
  return a;
}

void save_model(const ModelArtifact& artifact, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << to_json(artifact).dump(1) << '\n';
  if (!out) throw std::runtime_error("failed writing " + path);
}

ModelArtifact load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return artifact_from_json_text(ss.str());
}

}  // namespace deckmotion

#include "fsical/mlp.hpp"

#include "fsical/json.hpp"
#include "fsical/rng.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace fsical {

void MlpArchitecture::validate() const {
  if (input < 1 || output < 1) throw std::invalid_argument("MlpArchitecture: widths must be >= 1");
  for (int w : hidden)
    if (w < 1) throw std::invalid_argument("MlpArchitecture: hidden widths must be >= 1");
}

std::vector<int> MlpArchitecture::widths() const {
  std::vector<int> w{input};
  w.insert(w.end(), hidden.begin(), hidden.end());
  w.push_back(output);
  return w;
}

std::vector<int> MlpArchitecture::parse_hidden(const std::string& spec) {
  std::vector<int> out;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t pos = 0;
    int w = 0;
    try {
      w = std::stoi(item, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos == 0 || item.find_first_not_of(" \t", pos) != std::string::npos || w < 1)
      throw std::invalid_argument("MlpArchitecture: bad width '" + item + "' in '" + spec + "'");
    out.push_back(w);
  }
  if (out.empty()) throw std::invalid_argument("MlpArchitecture: empty hidden spec");
  return out;
}

MlpParams MlpParams::zeros_like() const {
  MlpParams z;
  z.layers.reserve(layers.size());
  for (const auto& l : layers)
    z.layers.push_back({Matrix::Zero(l.weights.rows(), l.weights.cols()), Vector::Zero(l.bias.size())});
  return z;
}

bool MlpParams::all_finite() const {
  return std::all_of(layers.begin(), layers.end(),
                     [](const DenseLayer& l) { return l.weights.allFinite() && l.bias.allFinite(); });
}

std::size_t MlpParams::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += static_cast<std::size_t>(l.weights.size() + l.bias.size());
  return n;
}

MlpParams init_params(const MlpArchitecture& arch, std::uint64_t seed) {
  arch.validate();
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const auto w = arch.widths();
  MlpParams p;
  for (std::size_t l = 0; l + 1 < w.size(); ++l) {
    const double stddev = std::sqrt(2.0 / w[l]);
    DenseLayer layer{Matrix(w[l + 1], w[l]), Vector::Zero(w[l + 1])};
    for (Eigen::Index i = 0; i < layer.weights.rows(); ++i)
      for (Eigen::Index j = 0; j < layer.weights.cols(); ++j) layer.weights(i, j) = stddev * normal(rng);
    p.layers.push_back(std::move(layer));
  }
  return p;
}

namespace {

void check_input(const MlpParams& params, Eigen::Index rows) {
  if (params.layers.empty()) throw std::invalid_argument("forward: network has no layers");
  if (rows != params.layers.front().weights.cols())
    throw std::invalid_argument("forward: input length " + std::to_string(rows) +
                                " does not match network input width " +
                                std::to_string(params.layers.front().weights.cols()));
}

// Activations a_0 = x, a_l = relu(W_l a_{l-1} + b_l); the last layer is affine.
std::vector<Matrix> forward_cached(const MlpParams& params, const Matrix& x) {
  check_input(params, x.rows());
  std::vector<Matrix> acts;
  acts.reserve(params.layers.size() + 1);
  acts.push_back(x);
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    const auto& layer = params.layers[l];
    Matrix z = layer.weights * acts.back();
    z.colwise() += layer.bias;
    if (l + 1 < params.layers.size()) z = z.cwiseMax(0.0);
    acts.push_back(std::move(z));
  }
  return acts;
}

}  // namespace

Matrix forward(const MlpParams& params, const Matrix& x) { return forward_cached(params, x).back(); }

Vector forward(const MlpParams& params, const Vector& x) {
  return forward(params, Matrix(x)).col(0);
}

LossGradient loss_and_gradient(const MlpParams& params, const Matrix& x, const Matrix& y) {
  if (x.cols() == 0) throw std::invalid_argument("loss_and_gradient: empty batch");
  if (x.cols() != y.cols()) throw std::invalid_argument("loss_and_gradient: batch size mismatch");
  const auto acts = forward_cached(params, x);
  if (acts.back().rows() != y.rows())
    throw std::invalid_argument("loss_and_gradient: label width mismatch");

  const Matrix residual = acts.back() - y;
  const double scale = 1.0 / static_cast<double>(residual.size());
  LossGradient out;
  out.loss = residual.squaredNorm() * scale;
  out.gradient = params.zeros_like();

  Matrix delta = 2.0 * scale * residual;
  for (std::size_t l = params.layers.size(); l-- > 0;) {
    out.gradient.layers[l].weights.noalias() = delta * acts[l].transpose();
    out.gradient.layers[l].bias = delta.rowwise().sum();
    if (l == 0) break;
    Matrix back = params.layers[l].weights.transpose() * delta;
    // acts[l] is a ReLU output; its derivative is 1 where positive, else 0.
    delta = back.cwiseProduct((acts[l].array() > 0.0).cast<double>().matrix());
  }
  return out;
}

double mean_squared_loss(const MlpParams& params, const Matrix& x, const Matrix& y) {
  if (x.cols() == 0) return 0.0;
  return (forward(params, x) - y).squaredNorm() / static_cast<double>(y.size());
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw std::invalid_argument("TrainConfig: learning_rate must be > 0");
  if (!(validation_fraction > 0.0 && validation_fraction < 1.0))
    throw std::invalid_argument("TrainConfig: validation_fraction must lie in (0, 1)");
  if (patience < 1) throw std::invalid_argument("TrainConfig: patience must be >= 1");
  if (batch_size < 1 || max_epochs < 1)
    throw std::invalid_argument("TrainConfig: batch_size and max_epochs must be >= 1");
  if (!(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0 && epsilon > 0.0))
    throw std::invalid_argument("TrainConfig: invalid Adam constants");
}

bool EarlyStopping::update(double validation_loss) {
  ++epoch_;
  last_improved_ = validation_loss < best_ - min_delta_;
  if (last_improved_) {
    best_ = validation_loss;
    best_epoch_ = epoch_;
    stale_ = 0;
  } else {
    ++stale_;
  }
  return stale_ >= patience_;
}

namespace {

Matrix columns(const Matrix& m, const std::vector<std::size_t>& idx) {
  Matrix out(m.rows(), static_cast<Eigen::Index>(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i) out.col(static_cast<Eigen::Index>(i)) = m.col(idx[i]);
  return out;
}

struct AdamState {
  MlpParams m;
  MlpParams v;
  long step = 0;
};

void adam_update(MlpParams& params, const MlpParams& grad, AdamState& s, const TrainConfig& c) {
  ++s.step;
  const double bc1 = 1.0 - std::pow(c.beta1, static_cast<double>(s.step));
  const double bc2 = 1.0 - std::pow(c.beta2, static_cast<double>(s.step));
  auto apply = [&](auto& w, const auto& g, auto& m, auto& v) {
    m = c.beta1 * m + (1.0 - c.beta1) * g;
    v = c.beta2 * v + (1.0 - c.beta2) * g.cwiseProduct(g);
    w.array() -= c.learning_rate * (m.array() / bc1) / ((v.array() / bc2).sqrt() + c.epsilon);
  };
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    apply(params.layers[l].weights, grad.layers[l].weights, s.m.layers[l].weights, s.v.layers[l].weights);
    apply(params.layers[l].bias, grad.layers[l].bias, s.m.layers[l].bias, s.v.layers[l].bias);
  }
}

}  // namespace

TrainResult train(const Matrix& x_train, const Matrix& y_train, const Matrix& x_val,
                  const Matrix& y_val, const MlpArchitecture& arch, const TrainConfig& config) {
  config.validate();
  arch.validate();
  if (x_train.cols() == 0) throw std::invalid_argument("train: empty training split");
  if (x_train.rows() != arch.input || y_train.rows() != arch.output ||
      x_train.cols() != y_train.cols() || x_val.cols() != y_val.cols())
    throw std::invalid_argument("train: data shape does not match architecture");

  Rng rng(derive_seed(config.seed, 1));
  TrainResult result{init_params(arch, derive_seed(config.seed, 0)), {}};
  MlpParams& params = result.params;
  AdamState adam{params.zeros_like(), params.zeros_like(), 0};
  EarlyStopping stopper(config.patience, config.min_delta);
  MlpParams best = params;

  const auto n = static_cast<std::size_t>(x_train.cols());
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  const bool has_val = x_val.cols() > 0;
  TrainReport& report = result.report;

  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng() % i]);
    for (std::size_t start = 0; start < n; start += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t stop = std::min(n, start + static_cast<std::size_t>(config.batch_size));
      const std::vector<std::size_t> batch(order.begin() + static_cast<std::ptrdiff_t>(start),
                                           order.begin() + static_cast<std::ptrdiff_t>(stop));
      const auto lg = loss_and_gradient(params, columns(x_train, batch), columns(y_train, batch));
      adam_update(params, lg.gradient, adam, config);
    }
    EpochRecord rec;
    rec.train_loss = mean_squared_loss(params, x_train, y_train);
    rec.validation_loss = has_val ? mean_squared_loss(params, x_val, y_val) : rec.train_loss;
    report.history.push_back(rec);
    report.epochs_run = epoch;
    if (!std::isfinite(rec.train_loss)) throw std::runtime_error("train: loss diverged");

    const bool stop = stopper.update(rec.validation_loss);
    if (stopper.last_improved()) {
      best = params;
      report.best_epoch = epoch;
      report.best_validation_loss = rec.validation_loss;
      report.best_train_loss = rec.train_loss;
    }
    if (config.early_stopping && stop) break;
  }
  report.final_train_loss = report.history.back().train_loss;
  if (config.early_stopping) params = std::move(best);
  return result;
}

TrainResult train(const Matrix& features, const Matrix& labels, const MlpArchitecture& arch,
                  const TrainConfig& config) {
  config.validate();
  if (features.cols() != labels.cols()) throw std::invalid_argument("train: sample count mismatch");
  auto [train_idx, val_idx] =
      split_indices(static_cast<std::size_t>(features.cols()), config.validation_fraction, config.seed);
  return train(columns(features, train_idx), columns(labels, train_idx), columns(features, val_idx),
               columns(labels, val_idx), arch, config);
}

FitResult fit_inverter(const Dataset& dataset, const std::vector<int>& hidden,
                       const TrainConfig& config) {
  if (dataset.empty()) throw std::invalid_argument("fit_inverter: empty dataset");
  const NormalizationStats stats = fit_normalization(dataset);
  const Matrix x = stats.features.apply(dataset.feature_matrix());
  const Matrix y = stats.labels.apply(dataset.label_matrix());
  MlpArchitecture arch{static_cast<int>(x.rows()), hidden, 3};
  auto trained = train(x, y, arch, config);
  return {{arch, std::move(trained.params), stats, fingerprint(dataset.meta)},
          std::move(trained.report)};
}

PhysicalParams predict(const InverterModel& model, const Vector& observations) {
  if (observations.size() != model.arch.input)
    throw std::invalid_argument("predict: observation length " + std::to_string(observations.size()) +
                                " does not match model input width " +
                                std::to_string(model.arch.input));
  const Vector out = model.stats.labels.invert(forward(model.params, model.stats.features.apply(observations)));
  return PhysicalParams::from_unknowns({out(0), out(1), out(2)});
}

void save_model(const std::filesystem::path& path, const InverterModel& model) {
  Json layers = Json::array();
  for (const auto& l : model.params.layers) {
    std::vector<double> w;
    w.reserve(static_cast<std::size_t>(l.weights.size()));
    for (Eigen::Index i = 0; i < l.weights.rows(); ++i)
      for (Eigen::Index j = 0; j < l.weights.cols(); ++j) w.push_back(l.weights(i, j));
    layers.push_back({{"rows", l.weights.rows()}, {"cols", l.weights.cols()}, {"weights", w},
                      {"bias", to_std(l.bias)}});
  }
  Json j{{"format", "fsical-mlp"},
         {"version", 1},
         {"architecture",
          {{"input", model.arch.input}, {"hidden", model.arch.hidden}, {"output", model.arch.output}}},
         {"layers", layers},
         {"normalization", model.stats},
         {"dataset_fingerprint", model.dataset_fingerprint}};
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_model: cannot open " + path.string());
  out << j.dump() << '\n';
}

InverterModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_model: cannot open " + path.string());
  InverterModel model;
  try {
    const Json j = Json::parse(in);
    if (j.value("format", std::string{}) != "fsical-mlp")
      throw std::invalid_argument("not an fsical-mlp model file");
    const Json& a = j.at("architecture");
    model.arch.input = a.at("input").get<int>();
    model.arch.hidden = a.at("hidden").get<std::vector<int>>();
    model.arch.output = a.at("output").get<int>();
    model.arch.validate();

    const auto widths = model.arch.widths();
    const Json& layers = j.at("layers");
    if (layers.size() + 1 != widths.size())
      throw std::invalid_argument("layer count does not match architecture");
    for (std::size_t l = 0; l < layers.size(); ++l) {
      const Json& lj = layers[l];
      const auto rows = lj.at("rows").get<Eigen::Index>();
      const auto cols = lj.at("cols").get<Eigen::Index>();
      const auto w = lj.at("weights").get<std::vector<double>>();
      const auto b = lj.at("bias").get<std::vector<double>>();
      if (rows != widths[l + 1] || cols != widths[l] || static_cast<Eigen::Index>(w.size()) != rows * cols ||
          static_cast<Eigen::Index>(b.size()) != rows)
        throw std::invalid_argument("layer " + std::to_string(l) + " shape does not match architecture");
      DenseLayer layer{Matrix(rows, cols), to_vector(b)};
      for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index k = 0; k < cols; ++k) layer.weights(i, k) = w[static_cast<std::size_t>(i * cols + k)];
      model.params.layers.push_back(std::move(layer));
    }
    model.stats = j.at("normalization").get<NormalizationStats>();
    if (model.stats.features.size() != model.arch.input || model.stats.labels.size() != model.arch.output)
      throw std::invalid_argument("normalization stats do not match architecture");
    model.dataset_fingerprint = j.value("dataset_fingerprint", std::string{});
  } catch (const std::exception& e) {
    throw std::runtime_error("load_model: " + path.string() + ": " + e.what());
  }
  return model;
}

}  // namespace fsical

#pragma once

// (mu/mu_w, lambda)-CMA-ES with cumulative step-size adaptation and rank-one
// plus rank-mu covariance updates, using the default strategy parameters of
// Hansen's tutorial. Ask/tell core plus a driver with optional box bounds.

#include "fsical/parallel.hpp"
#include "fsical/rng.hpp"

#include <Eigen/Core>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace fsical {

template <typename Scalar>
struct CmaesConfig {
  using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  Vec mean0;
  Scalar sigma0 = Scalar(0.3);
  int population = 0;            // 0 selects 4 + floor(3 ln n)
  Scalar ftol = Scalar(1e-6);    // stop when max - min of a generation falls below
  Scalar stop_value = Scalar(1e-12);  // stop when the best value falls below
  long max_evaluations = 5000;
  int resample_cap = 100;        // box handling: redraws before clamping
  std::uint64_t seed = 1;
  unsigned threads = 1;          // concurrent evaluations per generation

  void validate() const {
    if (mean0.size() < 1) throw std::invalid_argument("CmaesConfig: empty initial mean");
    if (!(sigma0 > 0)) throw std::invalid_argument("CmaesConfig: sigma0 must be > 0");
    if (population != 0 && population < 4)
      throw std::invalid_argument("CmaesConfig: population must be >= 4");
    if (max_evaluations < 1) throw std::invalid_argument("CmaesConfig: max_evaluations must be >= 1");
  }
};

template <typename Scalar>
struct Box {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> lower;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> upper;

  template <typename Derived>
  bool contains(const Eigen::MatrixBase<Derived>& x) const {
    return (x.array() >= lower.array()).all() && (x.array() <= upper.array()).all();
  }
};

enum class Termination { None, TargetReached, FunctionTolerance, MaxEvaluations };

inline std::string to_string(Termination t) {
  switch (t) {
    case Termination::None: return "none";
    case Termination::TargetReached: return "target";
    case Termination::FunctionTolerance: return "tolfun";
    case Termination::MaxEvaluations: return "maxevals";
  }
  return "unknown";
}

/// Full distribution state after each generation.
template <typename Scalar>
struct CmaesState {
  using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  Vec mean;
  Scalar sigma = 0;
  Mat cov;
  Mat basis;                 // eigenvectors of cov
  Vec axis;                  // square roots of the eigenvalues of cov
  Vec path_sigma;
  Vec path_c;
  long generation = 0;
  long evaluations = 0;
  Vec best_x;
  Scalar best_f = std::numeric_limits<Scalar>::infinity();
};

template <typename Scalar>
class Cmaes {
 public:
  using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  explicit Cmaes(const CmaesConfig<Scalar>& config) : config_(config), rng_(config.seed) {
    config_.validate();
    n_ = config_.mean0.size();
    const Scalar n = Scalar(n_);
    lambda_ = config_.population > 0 ? config_.population
                                     : 4 + static_cast<int>(std::floor(3.0 * std::log(double(n_))));
    mu_ = lambda_ / 2;

    weights_.resize(mu_);
    for (int i = 0; i < mu_; ++i)
      weights_(i) = std::log(Scalar(lambda_ + 1) / 2) - std::log(Scalar(i + 1));
    weights_ /= weights_.sum();
    mu_eff_ = 1 / weights_.squaredNorm();

    c_sigma_ = (mu_eff_ + 2) / (n + mu_eff_ + 5);
    d_sigma_ = 1 + 2 * std::max(Scalar(0), std::sqrt((mu_eff_ - 1) / (n + 1)) - 1) + c_sigma_;
    c_c_ = (4 + mu_eff_ / n) / (n + 4 + 2 * mu_eff_ / n);
    c_1_ = 2 / ((n + Scalar(1.3)) * (n + Scalar(1.3)) + mu_eff_);
    c_mu_ = std::min(1 - c_1_, 2 * (mu_eff_ - 2 + 1 / mu_eff_) / ((n + 2) * (n + 2) + mu_eff_));
    chi_n_ = std::sqrt(n) * (1 - 1 / (4 * n) + 1 / (21 * n * n));

    state_.mean = config_.mean0;
    state_.sigma = config_.sigma0;
    state_.cov = Mat::Identity(n_, n_);
    state_.basis = Mat::Identity(n_, n_);
    state_.axis = Vec::Ones(n_);
    state_.path_sigma = Vec::Zero(n_);
    state_.path_c = Vec::Zero(n_);
    state_.best_x = config_.mean0;
  }

  int population() const { return lambda_; }
  int parents() const { return mu_; }
  const Vec& weights() const { return weights_; }
  Scalar mu_eff() const { return mu_eff_; }
  const CmaesState<Scalar>& state() const { return state_; }

  /// Draw lambda offspring (columns). With a box, each offspring is redrawn
  /// up to resample_cap times, then clamped coordinate-wise.
  Mat ask(const std::optional<Box<Scalar>>& box = std::nullopt) {
    Mat x(n_, lambda_);
    for (int k = 0; k < lambda_; ++k) {
      Vec candidate = draw();
      for (int attempt = 0; box && !box->contains(candidate) && attempt < config_.resample_cap; ++attempt)
        candidate = draw();
      if (box) candidate = candidate.cwiseMax(box->lower).cwiseMin(box->upper);
      x.col(k) = candidate;
    }
    return x;
  }

  /// Update the distribution from evaluated offspring. Non-finite values rank last.
  Termination tell(const Mat& x, const Vec& fitness) {
    if (x.cols() != lambda_ || fitness.size() != lambda_ || x.rows() != n_)
      throw std::invalid_argument("Cmaes::tell: population shape mismatch");

    std::vector<int> order(lambda_);
    std::iota(order.begin(), order.end(), 0);
    auto key = [&](int i) {
      const Scalar f = fitness(i);
      return std::isfinite(f) ? f : std::numeric_limits<Scalar>::infinity();
    };
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return key(a) < key(b); });

    state_.evaluations += lambda_;
    ++state_.generation;
    if (key(order[0]) < state_.best_f) {
      state_.best_f = key(order[0]);
      state_.best_x = x.col(order[0]);
    }

    const Vec old_mean = state_.mean;
    Vec mean = Vec::Zero(n_);
    for (int i = 0; i < mu_; ++i) mean += weights_(i) * x.col(order[i]);
    state_.mean = mean;

    const Vec step = (mean - old_mean) / state_.sigma;
    // C^{-1/2} step
    const Vec whitened =
        state_.basis * (state_.axis.cwiseInverse().asDiagonal() * (state_.basis.transpose() * step));
    state_.path_sigma = (1 - c_sigma_) * state_.path_sigma +
                        std::sqrt(c_sigma_ * (2 - c_sigma_) * mu_eff_) * whitened;

    const Scalar ps_norm = state_.path_sigma.norm();
    const Scalar decay = 1 - std::pow(1 - c_sigma_, Scalar(2 * state_.generation));
    const bool h_sigma = ps_norm / std::sqrt(decay) < (Scalar(1.4) + 2 / Scalar(n_ + 1)) * chi_n_;
    state_.path_c = (1 - c_c_) * state_.path_c +
                    (h_sigma ? std::sqrt(c_c_ * (2 - c_c_) * mu_eff_) : Scalar(0)) * step;

    Mat rank_mu = Mat::Zero(n_, n_);
    for (int i = 0; i < mu_; ++i) {
      const Vec y = (x.col(order[i]) - old_mean) / state_.sigma;
      rank_mu += weights_(i) * y * y.transpose();
    }
    const Scalar correction = h_sigma ? Scalar(0) : c_c_ * (2 - c_c_);
    state_.cov = (1 - c_1_ - c_mu_) * state_.cov +
                 c_1_ * (state_.path_c * state_.path_c.transpose() + correction * state_.cov) +
                 c_mu_ * rank_mu;
    state_.cov = Scalar(0.5) * (state_.cov + state_.cov.transpose()).eval();

    state_.sigma *= std::exp((c_sigma_ / d_sigma_) * (ps_norm / chi_n_ - 1));
    decompose();

    if (state_.best_f < config_.stop_value) return Termination::TargetReached;
    Scalar lo = std::numeric_limits<Scalar>::infinity();
    Scalar hi = -lo;
    for (int i = 0; i < lambda_; ++i)
      if (std::isfinite(fitness(i))) {
        lo = std::min(lo, fitness(i));
        hi = std::max(hi, fitness(i));
      }
    if (hi - lo < config_.ftol) return Termination::FunctionTolerance;
    if (state_.evaluations >= config_.max_evaluations) return Termination::MaxEvaluations;
    return Termination::None;
  }

 private:
  Vec draw() {
    Vec z(n_);
    for (Eigen::Index i = 0; i < n_; ++i) z(i) = normal_(rng_);
    return state_.mean + state_.sigma * (state_.basis * state_.axis.cwiseProduct(z));
  }

  void decompose() {
    Eigen::SelfAdjointEigenSolver<Mat> eig(state_.cov);
    if (eig.info() != Eigen::Success || !(eig.eigenvalues().minCoeff() > 0))
      throw std::runtime_error("Cmaes: covariance matrix lost positive definiteness at generation " +
                               std::to_string(state_.generation));
    state_.basis = eig.eigenvectors();
    state_.axis = eig.eigenvalues().cwiseSqrt();
  }

  CmaesConfig<Scalar> config_;
  Rng rng_;
  std::normal_distribution<Scalar> normal_{0, 1};
  Eigen::Index n_ = 0;
  int lambda_ = 0;
  int mu_ = 0;
  Vec weights_;
  Scalar mu_eff_ = 0;
  Scalar c_sigma_ = 0, d_sigma_ = 0, c_c_ = 0, c_1_ = 0, c_mu_ = 0, chi_n_ = 0;
  CmaesState<Scalar> state_;
};

template <typename Scalar>
struct CmaesResult {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> best_x;
  Scalar best_f = std::numeric_limits<Scalar>::infinity();
  long evaluations = 0;
  long generations = 0;
  Termination reason = Termination::None;
  std::vector<Scalar> best_history;  // best-ever value after each generation
  std::vector<Eigen::Matrix<Scalar, Eigen::Dynamic, 1>> mean_history;
};

/// Minimize `objective` until a termination criterion fires. Exceptions and
/// non-finite values from the objective are treated as +inf.
template <typename Scalar>
CmaesResult<Scalar> cmaes_minimize(
    const std::function<Scalar(const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>&)>& objective,
    const CmaesConfig<Scalar>& config, const std::optional<Box<Scalar>>& box = std::nullopt) {
  using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  Cmaes<Scalar> es(config);
  CmaesResult<Scalar> result;
  Termination reason = Termination::None;
  while (reason == Termination::None) {
    const auto x = es.ask(box);
    Vec f(x.cols());
    parallel_for(
        static_cast<std::size_t>(x.cols()),
        [&](std::size_t k) {
          Scalar v;
          try {
            v = objective(x.col(static_cast<Eigen::Index>(k)));
          } catch (const std::exception&) {
            v = std::numeric_limits<Scalar>::infinity();
          }
          f(static_cast<Eigen::Index>(k)) = std::isfinite(v) ? v : std::numeric_limits<Scalar>::infinity();
        },
        config.threads);
    reason = es.tell(x, f);
    result.best_history.push_back(es.state().best_f);
    result.mean_history.push_back(es.state().mean);
  }
  const auto& s = es.state();
  result.best_x = s.best_x;
  result.best_f = s.best_f;
  result.evaluations = s.evaluations;
  result.generations = s.generation;
  result.reason = reason;
  return result;
}

}  // namespace fsical

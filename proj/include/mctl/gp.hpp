#pragma once

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/Core>

namespace mctl::gp {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Family { kMatern52, kRbf };

/// Isotropic stationary kernel k(d) of the Euclidean distance d.
template <typename Scalar>
struct Stationary {
  Family family = Family::kMatern52;
  Scalar variance = Scalar(1);
  Scalar length_scale = Scalar(1);

  Scalar from_distance(Scalar d) const {
    if (family == Family::kRbf) {
      return variance * std::exp(-d * d / (Scalar(2) * length_scale * length_scale));
    }
    const Scalar r = std::sqrt(Scalar(5)) * d / length_scale;
    return variance * (Scalar(1) + r + r * r / Scalar(3)) * std::exp(-r);
  }

  /// Elementwise k(d) on a matrix of squared distances.
  Matrix<Scalar> from_squared_distances(const Matrix<Scalar>& sq) const {
    if (family == Family::kRbf) {
      return (variance * (-sq.array() / (Scalar(2) * length_scale * length_scale)).exp()).matrix();
    }
    const auto r = (sq.array().max(Scalar(0)).sqrt() * (std::sqrt(Scalar(5)) / length_scale)).eval();
    return (variance * (Scalar(1) + r + r.square() / Scalar(3)) * (-r).exp()).matrix();
  }

  void validate() const {
    if (!(variance > Scalar(0)) || !(length_scale > Scalar(0))) {
      throw std::invalid_argument("kernel variance and length scale must be positive");
    }
  }
};

/// Pairwise squared Euclidean distances between the columns of `a` and `b`.
template <typename Scalar>
Matrix<Scalar> squared_distances(const Eigen::Ref<const Matrix<Scalar>>& a,
                                 const Eigen::Ref<const Matrix<Scalar>>& b) {
  Matrix<Scalar> sq = Scalar(-2) * (a.transpose() * b);
  sq.colwise() += a.colwise().squaredNorm().transpose();
  sq.rowwise() += b.colwise().squaredNorm();
  return sq.cwiseMax(Scalar(0));
}

/// Covariance function over column-vector points. Either a single stationary
/// kernel, or a product of a context kernel on the leading `context_dims`
/// coordinates and an action kernel on the rest.
template <typename Scalar>
class Kernel {
 public:
  static Kernel matern52(Scalar variance = Scalar(1), Scalar length_scale = Scalar(1)) {
    return Kernel(Stationary<Scalar>{Family::kMatern52, variance, length_scale});
  }
  static Kernel rbf(Scalar variance = Scalar(1), Scalar length_scale = Scalar(1)) {
    return Kernel(Stationary<Scalar>{Family::kRbf, variance, length_scale});
  }
  static Kernel product(Stationary<Scalar> context, Stationary<Scalar> action, Eigen::Index context_dims) {
    if (context_dims < 1) throw std::invalid_argument("product kernel needs a context dimension");
    Kernel k(action);
    k.context_ = context;
    k.context_.validate();
    k.context_dims_ = context_dims;
    return k;
  }

  bool is_product() const { return context_dims_ > 0; }
  Eigen::Index context_dims() const { return context_dims_; }
  const Stationary<Scalar>& action_kernel() const { return action_; }
  const Stationary<Scalar>& context_kernel() const { return context_; }

  /// k(p, p) for any p.
  Scalar prior_variance() const {
    return is_product() ? context_.variance * action_.variance : action_.variance;
  }

  template <typename A, typename B>
  Scalar operator()(const Eigen::MatrixBase<A>& p, const Eigen::MatrixBase<B>& q) const {
    if (p.size() != q.size()) throw std::invalid_argument("kernel points differ in dimension");
    if (!is_product()) return action_.from_distance((p - q).norm());
    if (p.size() <= context_dims_) throw std::invalid_argument("point too short for product kernel");
    const Eigen::Index rest = p.size() - context_dims_;
    return context_.from_distance((p.head(context_dims_) - q.head(context_dims_)).norm()) *
           action_.from_distance((p.tail(rest) - q.tail(rest)).norm());
  }

  /// Cross-covariance matrix between columns of `a` (n points) and `b` (m points).
  Matrix<Scalar> cross(const Eigen::Ref<const Matrix<Scalar>>& a,
                       const Eigen::Ref<const Matrix<Scalar>>& b) const {
    if (a.rows() != b.rows()) throw std::invalid_argument("kernel points differ in dimension");
    if (!is_product()) return action_.from_squared_distances(squared_distances<Scalar>(a, b));
    if (a.rows() <= context_dims_) throw std::invalid_argument("point too short for product kernel");
    const Eigen::Index rest = a.rows() - context_dims_;
    const Matrix<Scalar> kc = context_.from_squared_distances(
        squared_distances<Scalar>(a.topRows(context_dims_), b.topRows(context_dims_)));
    const Matrix<Scalar> ka =
        action_.from_squared_distances(squared_distances<Scalar>(a.bottomRows(rest), b.bottomRows(rest)));
    return kc.cwiseProduct(ka);
  }

 private:
  explicit Kernel(Stationary<Scalar> action) : action_(action) { action_.validate(); }

  Stationary<Scalar> action_;
  Stationary<Scalar> context_{};
  Eigen::Index context_dims_ = 0;
};

template <typename Scalar>
struct Posterior {
  Scalar mean;
  Scalar variance;
};

/// Exact zero-mean GP regression with a cached Cholesky factor of K + noise I.
template <typename Scalar>
class GpModel {
 public:
  static constexpr Scalar kInitialJitter = Scalar(1e-10);
  static constexpr Scalar kMaxJitter = Scalar(1e-6);

  GpModel(Kernel<Scalar> kernel, Scalar noise_variance) : kernel_(kernel), noise_(noise_variance) {
    if (!(noise_variance >= Scalar(0))) throw std::invalid_argument("noise variance must be non-negative");
  }

  /// Columns of `inputs` are training points. Throws NumericalError when the
  /// factorization fails at the largest jitter.
  void fit(const Eigen::Ref<const Matrix<Scalar>>& inputs, const Eigen::Ref<const Vector<Scalar>>& targets) {
    if (inputs.cols() != targets.size()) throw std::invalid_argument("inputs and targets differ in count");
    inputs_ = inputs;
    targets_ = targets;
    const Eigen::Index n = inputs_.cols();
    if (n == 0) {
      alpha_.resize(0);
      jitter_ = Scalar(0);
      fitted_ = true;
      return;
    }
    const Matrix<Scalar> k = kernel_.cross(inputs_, inputs_);
    fitted_ = false;
    if (!k.allFinite() || !targets_.allFinite()) {
      throw NumericalError("GP inputs or targets are not finite");
    }
    for (Scalar jitter = kInitialJitter; jitter <= kMaxJitter * Scalar(1.0001); jitter *= Scalar(10)) {
      Matrix<Scalar> kn = k;
      kn.diagonal().array() += noise_ + jitter;
      llt_.compute(kn);
      if (llt_.info() == Eigen::Success) {
        jitter_ = jitter;
        fitted_ = true;
        break;
      }
    }
    if (!fitted_) {
      throw NumericalError("GP covariance factorization failed with jitter up to 1e-6 (" +
                           std::to_string(n) + " points)");
    }
    alpha_ = llt_.solve(targets_);
  }

  Posterior<Scalar> predict(const Eigen::Ref<const Vector<Scalar>>& point) const {
    Vector<Scalar> mean, var;
    predict(Matrix<Scalar>(point), mean, var);
    return {mean[0], var[0]};
  }

  /// Posterior mean and variance at each column of `points`.
  void predict(const Eigen::Ref<const Matrix<Scalar>>& points, Vector<Scalar>& mean,
               Vector<Scalar>& variance) const {
    const Scalar prior = kernel_.prior_variance();
    if (size() == 0) {
      mean = Vector<Scalar>::Zero(points.cols());
      variance = Vector<Scalar>::Constant(points.cols(), prior);
      return;
    }
    if (!fitted_) throw NumericalError("GP queried before a successful fit");
    if (points.rows() != inputs_.rows()) throw std::invalid_argument("query points differ in dimension");
    const Matrix<Scalar> k_star = kernel_.cross(inputs_, points);
    mean = k_star.transpose() * alpha_;
    const Matrix<Scalar> v = llt_.matrixL().solve(k_star);
    variance = (prior - v.colwise().squaredNorm().array()).max(Scalar(0)).matrix().transpose();
  }

  Vector<Scalar> predict_mean(const Eigen::Ref<const Matrix<Scalar>>& points) const {
    if (size() == 0) return Vector<Scalar>::Zero(points.cols());
    if (!fitted_) throw NumericalError("GP queried before a successful fit");
    return kernel_.cross(inputs_, points).transpose() * alpha_;
  }

  Eigen::Index size() const { return inputs_.cols(); }
  Eigen::Index dims() const { return inputs_.rows(); }
  const Kernel<Scalar>& kernel() const { return kernel_; }
  Scalar noise_variance() const { return noise_; }
  Scalar jitter() const { return jitter_; }
  const Matrix<Scalar>& inputs() const { return inputs_; }
  const Vector<Scalar>& targets() const { return targets_; }

 private:
  Kernel<Scalar> kernel_;
  Scalar noise_;
  Scalar jitter_ = Scalar(0);
  bool fitted_ = true;
  Matrix<Scalar> inputs_;
  Vector<Scalar> targets_;
  Vector<Scalar> alpha_;
  Eigen::LLT<Matrix<Scalar>> llt_;
};

/// Affine z-score map for GP targets. A zero spread maps to unit scale.
template <typename Scalar>
struct TargetScaler {
  Scalar offset = Scalar(0);
  Scalar scale = Scalar(1);

  static TargetScaler fit(const Eigen::Ref<const Vector<Scalar>>& y) {
    TargetScaler s;
    if (y.size() == 0) return s;
    s.offset = y.mean();
    if (y.size() > 1) {
      const Scalar var = (y.array() - s.offset).square().sum() / Scalar(y.size() - 1);
      if (var > Scalar(0)) s.scale = std::sqrt(var);
    }
    return s;
  }
  Vector<Scalar> forward(const Eigen::Ref<const Vector<Scalar>>& y) const {
    return ((y.array() - offset) / scale).matrix();
  }
  Scalar forward(Scalar y) const { return (y - offset) / scale; }
  Scalar inverse(Scalar z) const { return offset + scale * z; }
};

/// Exploration weight beta_i for GP-UCB.
template <typename Scalar>
struct BetaSchedule {
  enum class Kind { kFixed, kTimeVarying };

  Kind kind = Kind::kFixed;
  Scalar beta = Scalar(90);
  Scalar delta = Scalar(0.3);
  Scalar domain_size = Scalar(2);

  static constexpr Scalar kFloor = Scalar(1e-6);

  static BetaSchedule fixed(Scalar b) { return {Kind::kFixed, b, Scalar(0.3), Scalar(2)}; }
  static BetaSchedule time_varying(Scalar delta, Scalar domain_size) {
    if (!(delta > Scalar(0) && delta < Scalar(1))) throw std::invalid_argument("delta must lie in (0,1)");
    return {Kind::kTimeVarying, Scalar(0), delta, domain_size};
  }

  struct Value {
    Scalar beta;
    bool clamped;
  };

  Value at(int episode) const {
    if (episode < 1) throw std::invalid_argument("beta schedule is indexed from episode 1");
    Scalar b = beta;
    if (kind == Kind::kTimeVarying) {
      const Scalar i = static_cast<Scalar>(episode);
      const Scalar pi2 = std::numbers::pi_v<Scalar> * std::numbers::pi_v<Scalar>;
      b = Scalar(2) * std::log(domain_size * i * i * pi2 / (Scalar(6) * delta));
    }
    if (!(b > Scalar(0))) return {kFloor, true};
    return {b, false};
  }
};

/// Index of the column of `candidates` maximizing mu + sqrt(beta) sigma; lowest index on ties.
template <typename Scalar>
int gp_ucb_select(const GpModel<Scalar>& model, const Eigen::Ref<const Matrix<Scalar>>& candidates, Scalar beta) {
  if (!(beta > Scalar(0))) throw std::invalid_argument("beta must be positive");
  Vector<Scalar> mean, var;
  model.predict(candidates, mean, var);
  const Vector<Scalar> score = mean + std::sqrt(beta) * var.cwiseSqrt();
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < score.size(); ++i) {
    if (score[i] > score[best]) best = i;
  }
  return static_cast<int>(best);
}

/// Stacks `context` on top of every candidate column.
template <typename Scalar>
Matrix<Scalar> with_context(const Eigen::Ref<const Vector<Scalar>>& context,
                            const Eigen::Ref<const Matrix<Scalar>>& candidates) {
  Matrix<Scalar> points(context.size() + candidates.rows(), candidates.cols());
  points.topRows(context.size()) = context.replicate(1, candidates.cols());
  points.bottomRows(candidates.rows()) = candidates;
  return points;
}

/// GP-UCB on the joint context x action space with the context held fixed.
template <typename Scalar>
int cgp_ucb_select(const GpModel<Scalar>& model, const Eigen::Ref<const Vector<Scalar>>& context,
                   const Eigen::Ref<const Matrix<Scalar>>& candidates, Scalar beta) {
  if (!model.kernel().is_product()) throw std::invalid_argument("CGP-UCB requires a product kernel");
  if (context.size() != model.kernel().context_dims()) {
    throw std::invalid_argument("context dimension does not match the product kernel");
  }
  return gp_ucb_select<Scalar>(model, with_context<Scalar>(context, candidates), beta);
}

}  // namespace mctl::gp

#include "homodyne/least_squares.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Dense>

#include "homodyne/errors.hpp"

namespace homodyne {

std::size_t FitResult::index(std::string_view name) const {
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return i;
  throw Error(ErrorCode::invalid_argument, "fit has no parameter '" + std::string(name) + "'");
}

namespace {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Internal coordinates: p = s u (free) or p = s u^2 (positive), s = |p0| or 1.
struct Mapping {
  std::vector<std::size_t> free;
  std::vector<double> scale;
  std::vector<bool> positive;

  void to_natural(const Vector& u, std::vector<double>& p) const {
    for (std::size_t k = 0; k < free.size(); ++k)
      p[free[k]] = positive[k] ? scale[k] * u(k) * u(k) : scale[k] * u(k);
  }
  double derivative(const Vector& u, std::size_t k) const {
    return positive[k] ? 2.0 * scale[k] * u(k) : scale[k];
  }
};

class Problem {
 public:
  Problem(const ResidualFunction& r, const JacobianFunction& j, std::size_t n, std::size_t p)
      : residuals_(r), jacobian_(j), n_(n), p_(p) {}

  Vector residual(const std::vector<double>& params) const {
    Vector r(static_cast<Eigen::Index>(n_));
    residuals_(params, std::span<double>(r.data(), n_));
    return r;
  }

  // Natural-parameter Jacobian, n x p.
  Matrix jacobian(const std::vector<double>& params, const std::vector<double>& steps_hint) const {
    RowMatrix J(static_cast<Eigen::Index>(n_), static_cast<Eigen::Index>(p_));
    if (jacobian_) {
      jacobian_(params, std::span<double>(J.data(), n_ * p_));
      return J;
    }
    std::vector<double> q = params;
    for (std::size_t j = 0; j < p_; ++j) {
      const double h = 1e-6 * std::max(std::abs(params[j]), steps_hint[j]);
      q[j] = params[j] + h;
      const Vector up = residual(q);
      q[j] = params[j] - h;
      const Vector down = residual(q);
      q[j] = params[j];
      J.col(static_cast<Eigen::Index>(j)) = (up - down) / (2.0 * h);
    }
    return J;
  }

 private:
  const ResidualFunction& residuals_;
  const JacobianFunction& jacobian_;
  std::size_t n_, p_;
};

Matrix select_free(const Matrix& J, const Mapping& map) {
  Matrix out(J.rows(), static_cast<Eigen::Index>(map.free.size()));
  for (std::size_t k = 0; k < map.free.size(); ++k)
    out.col(static_cast<Eigen::Index>(k)) = J.col(static_cast<Eigen::Index>(map.free[k]));
  return out;
}

}  // namespace

FitResult least_squares(const ResidualFunction& residuals, std::size_t n_residuals,
                        std::vector<FitParameter> params, const LeastSquaresOptions& options,
                        const JacobianFunction& jacobian) {
  const std::size_t p_all = params.size();
  Mapping map;
  std::vector<double> natural(p_all), scale_hint(p_all);
  for (std::size_t j = 0; j < p_all; ++j) {
    const auto& fp = params[j];
    if (!std::isfinite(fp.value))
      throw Error(ErrorCode::invalid_argument, "parameter '" + fp.name + "' has a non-finite start value");
    if (fp.positive && fp.value < 0.0)
      throw Error(ErrorCode::invalid_argument, "positive parameter '" + fp.name + "' starts below 0");
    natural[j] = fp.value;
    scale_hint[j] = fp.value != 0.0 ? std::abs(fp.value) : 1.0;
    if (fp.fixed) continue;
    map.free.push_back(j);
    map.scale.push_back(scale_hint[j]);
    map.positive.push_back(fp.positive);
  }
  const std::size_t k_free = map.free.size();
  if (n_residuals < k_free || n_residuals == 0)
    throw Error(ErrorCode::invalid_argument, "least_squares: fewer residuals than free parameters");

  Vector u(static_cast<Eigen::Index>(k_free));
  for (std::size_t k = 0; k < k_free; ++k) {
    const double v = natural[map.free[k]] / map.scale[k];
    u(static_cast<Eigen::Index>(k)) = map.positive[k] ? std::sqrt(v) : v;
  }

  Problem problem(residuals, jacobian, n_residuals, p_all);
  map.to_natural(u, natural);
  Vector r = problem.residual(natural);
  if (!r.allFinite()) throw Error(ErrorCode::invalid_argument, "residuals are not finite at the start values");
  double rss = r.squaredNorm();

  auto free_jacobian = [&](const std::vector<double>& p, const Vector& uu) {
    Matrix J = select_free(problem.jacobian(p, scale_hint), map);
    for (std::size_t k = 0; k < k_free; ++k) J.col(static_cast<Eigen::Index>(k)) *= map.derivative(uu, k);
    return J;
  };

  FitResult result;
  double lambda = options.initial_damping;
  Matrix Ju;
  Vector g;
  bool refresh = true;
  for (;;) {
    if (refresh) {
      Ju = free_jacobian(natural, u);
      g = Ju.transpose() * r;
      refresh = false;
    }
    result.gradient_norm = k_free ? g.cwiseAbs().maxCoeff() : 0.0;
    if (result.gradient_norm < options.gradient_tol * (1.0 + rss)) {
      result.converged = true;
      break;
    }
    if (result.n_iter >= options.max_iterations || lambda > 1e20) break;
    ++result.n_iter;

    const Matrix A = Ju.transpose() * Ju;
    Matrix damped = A;
    for (Eigen::Index i = 0; i < A.rows(); ++i)
      damped(i, i) += lambda * std::max(A(i, i), 1e-30);
    const Vector delta = damped.ldlt().solve(-g);
    if (!delta.allFinite()) {
      lambda *= options.damping_increase;
      continue;
    }
    const Vector u_trial = u + delta;
    std::vector<double> trial = natural;
    map.to_natural(u_trial, trial);
    const Vector r_trial = problem.residual(trial);
    const double rss_trial = r_trial.allFinite() ? r_trial.squaredNorm() : INFINITY;
    bool accept = rss_trial < rss;
    Matrix J_trial;
    Vector g_trial;
    if (!accept && rss_trial <= rss * (1.0 + 1e-12)) {
      // Cost differences are at rounding level here; judge the step by the gradient.
      J_trial = free_jacobian(trial, u_trial);
      g_trial = J_trial.transpose() * r_trial;
      accept = g_trial.cwiseAbs().maxCoeff() < g.cwiseAbs().maxCoeff();
    }
    if (accept) {
      u = u_trial;
      natural = std::move(trial);
      r = r_trial;
      rss = rss_trial;
      lambda = std::max(lambda / options.damping_decrease, 1e-12);
      if (g_trial.size() > 0) {
        Ju = std::move(J_trial);
        g = std::move(g_trial);
      } else {
        refresh = true;
      }
    } else {
      lambda *= options.damping_increase;
    }
  }

  result.residual_norm = rss;
  for (const auto& fp : params) {
    result.names.push_back(fp.name);
    result.fixed.push_back(fp.fixed);
  }
  result.params = natural;
  result.std_errs.assign(p_all, 0.0);

  if (k_free > 0) {
    const Matrix Jf = select_free(problem.jacobian(natural, scale_hint), map);
    Vector norms = Jf.colwise().norm();
    for (Eigen::Index c = 0; c < norms.size(); ++c)
      if (!(norms(c) > 0.0) || !std::isfinite(norms(c)))
        throw Error(ErrorCode::rank_deficient,
                    "parameter '" + params[map.free[static_cast<std::size_t>(c)]].name +
                        "' does not affect the residuals");
    const Matrix Jn = Jf * norms.cwiseInverse().asDiagonal();
    Eigen::JacobiSVD<Matrix> svd(Jn, Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    if (sv(sv.size() - 1) < 1e-10 * sv(0))
      throw Error(ErrorCode::rank_deficient, "Jacobian columns are linearly dependent");
    const double dof = static_cast<double>(n_residuals - k_free);
    const double s2 = dof > 0.0 ? rss / dof : 0.0;
    // (Jn^T Jn)^-1 = V S^-2 V^T, rescaled back to natural parameters.
    const Matrix V = svd.matrixV();
    const Vector inv_s2 = sv.cwiseAbs2().cwiseInverse();
    for (std::size_t k = 0; k < k_free; ++k) {
      const auto kk = static_cast<Eigen::Index>(k);
      const double var = (V.row(kk).cwiseAbs2().transpose().cwiseProduct(inv_s2)).sum() /
                         (norms(kk) * norms(kk));
      result.std_errs[map.free[k]] = std::sqrt(s2 * var);
    }
  }
  return result;
}

FitResult fit_curve(const CurveModel& model, std::span<const double> x, std::span<const double> y,
                    std::vector<FitParameter> params, Weighting weighting, const CurveGradient& gradient,
                    const LeastSquaresOptions& options) {
  if (x.size() != y.size()) throw Error(ErrorCode::invalid_argument, "fit_curve: x and y differ in length");
  const std::size_t n = x.size();
  const std::size_t p = params.size();

  if (weighting == Weighting::logarithmic)
    for (double v : y)
      if (!(v > 0.0)) throw Error(ErrorCode::non_positive_input, "fit_curve: log residuals need y > 0");

  ResidualFunction res = [&](std::span<const double> q, std::span<double> r) {
    for (std::size_t i = 0; i < n; ++i) {
      const double m = model(x[i], q);
      switch (weighting) {
        case Weighting::none: r[i] = y[i] - m; break;
        case Weighting::relative_to_model: r[i] = (y[i] - m) / m; break;
        case Weighting::logarithmic:
          // A non-positive model value is an infinitely bad fit.
          r[i] = m > 0.0 ? std::log(y[i] / m) : std::numeric_limits<double>::infinity();
          break;
      }
    }
  };
  JacobianFunction jac;
  if (gradient) {
    jac = [&, grad = std::vector<double>(p)](std::span<const double> q, std::span<double> J) mutable {
      for (std::size_t i = 0; i < n; ++i) {
        gradient(x[i], q, grad);
        double factor = -1.0;
        if (weighting == Weighting::relative_to_model) {
          const double m = model(x[i], q);
          factor = -y[i] / (m * m);
        } else if (weighting == Weighting::logarithmic) {
          factor = -1.0 / model(x[i], q);
        }
        for (std::size_t j = 0; j < p; ++j) J[i * p + j] = factor * grad[j];
      }
    };
  }
  return least_squares(res, n, std::move(params), options, jac);
}

}  // namespace homodyne

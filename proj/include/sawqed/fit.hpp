#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sawqed/errors.hpp"
#include "sawqed/scattering.hpp"

namespace sawqed::fit {

struct SweepRow {
  double power_w = 0.0;
  double r_meas = 0.0;
  double t_meas = 0.0;
  double weight = 1.0;
};

using SweepData = std::vector<SweepRow>;

struct FitResult {
  double k = 0.0;          // Hz / sqrt(W)
  double gamma_phi = 0.0;  // Hz
  double residual_norm = 0.0;
  int iterations = 0;
  Eigen::Matrix2d covariance = Eigen::Matrix2d::Zero();  // (k, gamma_phi)
  std::vector<std::string> warnings;
};

// Thrown when the iteration cap is hit; carries the best point found.
class FitError : public NumericalError {
 public:
  FitError(const std::string& what, FitResult best) : NumericalError(what), best_(std::move(best)) {}
  const FitResult& best() const { return best_; }

 private:
  FitResult best_;
};

struct FitOptions {
  int max_iterations = 200;
  double step_tolerance = 1e-10;  // relative step in the log parameters
  double dephasing_offset = 1.0;  // epsilon in log(gamma_phi + epsilon), Hz
};

inline void validate(const SweepData& data) {
  if (data.size() < 5) throw ValidationError("fit needs at least 5 sweep rows");
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto& row = data[i];
    if (!(row.power_w > 0.0)) throw ValidationError("sweep powers must be positive");
    if (i > 0 && !(row.power_w > data[i - 1].power_w)) throw ValidationError("sweep powers must be strictly increasing");
    if (!(row.r_meas >= 0.0 && row.r_meas <= 1.2 && row.t_meas >= 0.0 && row.t_meas <= 1.2)) {
      throw ValidationError("sweep R and T must lie in [0, 1.2]");
    }
    if (!(row.weight >= 0.0)) throw ValidationError("sweep weights must be >= 0");
  }
}

// Resonant reflectance and transmittance for the fit parameters; r = -Gamma / D
// with D = 2 gamma_01 + 2 Omega^2 / Gamma.
struct ModelPoint {
  double r = 0.0;
  double dr_dlogk = 0.0;
  double dr_dgphi = 0.0;
};

inline ModelPoint model(double power, double k, double gamma_phi, double gamma01) {
  const double omega2 = k * k * power;
  const double d = 2.0 * (0.5 * gamma01 + gamma_phi) + 2.0 * omega2 / gamma01;
  ModelPoint p;
  p.r = -gamma01 / d;
  p.dr_dlogk = 4.0 * omega2 / (d * d);
  p.dr_dgphi = 2.0 * gamma01 / (d * d);
  return p;
}

namespace detail {

inline double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// |r| estimated from both channels: |r| = sqrt(R) and |r| = 1 - sqrt(T).
inline double reflection_estimate(const SweepRow& row) {
  return 0.5 * (std::sqrt(std::max(row.r_meas, 0.0)) + 1.0 - std::sqrt(std::max(row.t_meas, 0.0)));
}

}  // namespace detail

// Closed-form start: r0 from the low-power plateau, k from the points near half saturation.
inline std::array<double, 2> initial_guess(const SweepData& data, double gamma01) {
  const double r0 = std::clamp(detail::reflection_estimate(data.front()), 1e-3, 1.0 - 1e-9);
  const double gamma_phi = std::max(0.0, 0.5 * gamma01 * (1.0 / r0 - 1.0));
  const double decoherence = 0.5 * gamma01 + gamma_phi;
  std::vector<double> k2;
  for (const auto& row : data) {
    const double r = detail::reflection_estimate(row);
    if (r <= 0.0) continue;
    const double x = r0 / r - 1.0;
    if (x > 0.2 && x < 5.0) k2.push_back(x * gamma01 * decoherence / row.power_w);
  }
  double k = 0.0;
  if (!k2.empty()) {
    k = std::sqrt(detail::median(k2));
  } else {
    const double p_half = std::sqrt(data.front().power_w * data.back().power_w);
    k = std::sqrt(gamma01 * decoherence / p_half);
  }
  return {k, gamma_phi};
}

// Joint weighted least squares over reflectance and transmittance,
// Levenberg-Marquardt in (log k, log(gamma_phi + eps)).
inline FitResult fit_power_sweep(const SweepData& data, double gamma01, const FitOptions& options = {}) {
  validate(data);
  if (!(gamma01 > 0.0)) throw ValidationError("gamma01 must be > 0");
  const double eps = options.dephasing_offset;
  const std::size_t m = 2 * data.size();

  auto unpack = [eps](const Eigen::Vector2d& p) { return std::array<double, 2>{std::exp(p(0)), std::exp(p(1)) - eps}; };
  auto evaluate = [&](const Eigen::Vector2d& p, Eigen::VectorXd& res, Eigen::MatrixXd* jac) {
    const auto [k, gphi] = unpack(p);
    res.resize(static_cast<Eigen::Index>(m));
    if (jac) jac->resize(static_cast<Eigen::Index>(m), 2);
    for (std::size_t i = 0; i < data.size(); ++i) {
      const auto& row = data[i];
      const double sw = std::sqrt(row.weight);
      const ModelPoint mp = model(row.power_w, k, gphi, gamma01);
      const auto a = static_cast<Eigen::Index>(2 * i);
      res(a) = sw * (mp.r * mp.r - row.r_meas);
      res(a + 1) = sw * ((1.0 + mp.r) * (1.0 + mp.r) - row.t_meas);
      if (jac) {
        const double dr1 = mp.dr_dlogk;
        const double dr2 = mp.dr_dgphi * (gphi + eps);
        (*jac)(a, 0) = sw * 2.0 * mp.r * dr1;
        (*jac)(a, 1) = sw * 2.0 * mp.r * dr2;
        (*jac)(a + 1, 0) = sw * 2.0 * (1.0 + mp.r) * dr1;
        (*jac)(a + 1, 1) = sw * 2.0 * (1.0 + mp.r) * dr2;
      }
    }
    return res.squaredNorm();
  };

  const auto start = initial_guess(data, gamma01);
  Eigen::Vector2d p(std::log(start[0]), std::log(start[1] + eps));
  Eigen::VectorXd res;
  Eigen::MatrixXd jac;
  double cost = evaluate(p, res, &jac);
  double lambda = 1e-3;
  FitResult result;
  bool converged = false;
  int it = 0;
  for (; it < options.max_iterations && !converged; ++it) {
    const Eigen::Matrix2d jtj = jac.transpose() * jac;
    const Eigen::Vector2d grad = jac.transpose() * res;
    if (grad.norm() == 0.0) {
      converged = true;
      break;
    }
    bool improved = false;
    for (int attempt = 0; attempt < 60; ++attempt) {
      Eigen::Matrix2d a = jtj;
      a.diagonal() += lambda * jtj.diagonal().cwiseMax(1e-300);
      const Eigen::Vector2d step = a.ldlt().solve(-grad);
      const Eigen::Vector2d trial = p + step;
      Eigen::VectorXd trial_res;
      const double trial_cost = evaluate(trial, trial_res, nullptr);
      if (std::isfinite(trial_cost) && trial_cost <= cost) {
        const double rel = (step.array().abs() / (1.0 + p.array().abs())).maxCoeff();
        p = trial;
        cost = evaluate(p, res, &jac);
        lambda = std::max(lambda / 10.0, 1e-15);
        improved = true;
        if (rel < options.step_tolerance) converged = true;
        break;
      }
      lambda *= 10.0;
    }
    // No downhill step at any damping: we are at the minimum to machine precision.
    if (!improved) converged = true;
  }

  const auto [k, gphi] = unpack(p);
  result.k = k;
  result.gamma_phi = std::max(0.0, gphi);
  result.residual_norm = std::sqrt(cost);
  result.iterations = it;

  // Covariance in (k, gamma_phi) from the Gauss-Newton approximation.
  Eigen::Matrix2d scale = Eigen::Matrix2d::Zero();
  scale(0, 0) = k;
  scale(1, 1) = gphi + eps;
  const Eigen::Matrix2d jtj = jac.transpose() * jac;
  const double dof = static_cast<double>(m) - 2.0;
  const double cond = jtj.trace() > 0.0 ? jtj.jacobiSvd().singularValues()(0) /
                                              std::max(jtj.jacobiSvd().singularValues()(1), 1e-300)
                                        : 1e300;
  if (cond < 1e14) {
    result.covariance = scale * jtj.inverse() * scale * (cost / std::max(dof, 1.0));
  }
  const double x_low = k * k * data.front().power_w / (gamma01 * (0.5 * gamma01 + result.gamma_phi));
  if (cond >= 1e14 || x_low > 10.0) {
    result.warnings.push_back("ill-conditioned: the sweep does not resolve the low-power plateau");
  }
  if (!converged) throw FitError("fit did not converge within the iteration cap", result);
  return result;
}

// Reflectance and transmittance from the resonant formula with optional
// additive Gaussian noise (absolute, same sigma on R and T).
inline SweepData synthesize_sweep(const std::vector<double>& powers, double k, double gamma_phi, double gamma01,
                                  double noise_sigma = 0.0, std::uint64_t seed = 0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  SweepData data;
  data.reserve(powers.size());
  const scattering::Rates rates{gamma01, gamma_phi};
  for (double p : powers) {
    const double r = scattering::reflection_on_resonance(k * std::sqrt(p), rates);
    SweepRow row{p, r * r, (1.0 + r) * (1.0 + r), 1.0};
    if (noise_sigma > 0.0) {
      row.r_meas = std::clamp(row.r_meas + noise_sigma * noise(rng), 0.0, 1.2);
      row.t_meas = std::clamp(row.t_meas + noise_sigma * noise(rng), 0.0, 1.2);
    }
    data.push_back(row);
  }
  return data;
}

inline std::vector<double> log_spaced(double lo, double hi, std::size_t n) {
  std::vector<double> v(n);
  if (n == 1) {
    v[0] = lo;
    return v;
  }
  const double a = std::log10(lo);
  const double b = std::log10(hi);
  for (std::size_t i = 0; i < n; ++i) v[i] = std::pow(10.0, a + (b - a) * static_cast<double>(i) / (n - 1.0));
  return v;
}

}  // namespace sawqed::fit

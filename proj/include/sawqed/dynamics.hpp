#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "sawqed/errors.hpp"
#include "sawqed/scattering.hpp"
#include "sawqed/units.hpp"

namespace sawqed::dynamics {

using cdouble = std::complex<double>;
using Matrix = Eigen::Matrix<cdouble, Eigen::Dynamic, Eigen::Dynamic, 0, 3, 3>;

inline constexpr double kHermiticityTolerance = 1e-9;
inline constexpr double kTraceTolerance = 1e-9;
inline constexpr double kPositivityTolerance = 1e-9;
// Largest trace change accepted from a single integrator step.
inline constexpr double kStepTraceDrift = 1e-7;

// State of a two- or three-level transmon.
class DensityMatrix {
 public:
  explicit DensityMatrix(int dim = 2) : rho_(Matrix::Zero(dim, dim)) {
    if (dim != 2 && dim != 3) throw ValidationError("density matrix dimension must be 2 or 3");
    rho_(0, 0) = 1.0;
  }
  explicit DensityMatrix(const Matrix& rho) : rho_(rho) {
    if (rho.rows() != rho.cols() || (rho.rows() != 2 && rho.rows() != 3)) {
      throw ValidationError("density matrix must be 2x2 or 3x3");
    }
  }

  static DensityMatrix basis(int dim, int level) {
    DensityMatrix d(dim);
    d.rho_.setZero();
    d.rho_(level, level) = 1.0;
    return d;
  }

  int dim() const { return static_cast<int>(rho_.rows()); }
  const Matrix& matrix() const { return rho_; }
  Matrix& matrix() { return rho_; }
  cdouble operator()(int i, int j) const { return rho_(i, j); }
  double population(int level) const { return rho_(level, level).real(); }

  double trace_error() const { return std::abs(rho_.trace() - 1.0); }
  double hermiticity_error() const { return (rho_ - rho_.adjoint()).cwiseAbs().maxCoeff(); }
  double min_eigenvalue() const {
    const Matrix h = 0.5 * (rho_ + rho_.adjoint());
    Eigen::SelfAdjointEigenSolver<Matrix> solver(h, Eigen::EigenvaluesOnly);
    return solver.eigenvalues().minCoeff();
  }
  bool is_physical() const {
    return hermiticity_error() <= kHermiticityTolerance && trace_error() <= kTraceTolerance &&
           min_eigenvalue() >= -kPositivityTolerance;
  }

 private:
  Matrix rho_;
};

// Lindblad generator with a fixed set of collapse operators (angular units).
class Lindbladian {
 public:
  explicit Lindbladian(std::vector<Matrix> collapse) : collapse_(std::move(collapse)) {
    if (!collapse_.empty()) {
      const auto n = collapse_.front().rows();
      anti_ = Matrix::Zero(n, n);
      for (const auto& c : collapse_) anti_ += c.adjoint() * c;
    }
  }

  Matrix operator()(const Matrix& h, const Matrix& rho) const {
    const cdouble i(0.0, 1.0);
    Matrix out = -i * (h * rho - rho * h);
    if (collapse_.empty()) return out;
    for (const auto& c : collapse_) out += c * rho * c.adjoint();
    out -= 0.5 * (anti_ * rho + rho * anti_);
    return out;
  }

  const std::vector<Matrix>& collapse() const { return collapse_; }

 private:
  std::vector<Matrix> collapse_;
  Matrix anti_;
};

namespace detail {

inline void check_step(const Matrix& before, const Matrix& after) {
  const double drift = std::abs(after.trace() - before.trace());
  if (!(drift <= kStepTraceDrift)) {
    throw NumericalError("integrator step changed the trace by more than 1e-7; reduce dt");
  }
}

}  // namespace detail

// One classical RK4 step with the Hamiltonian sampled at t, t + dt/2, t + dt.
inline DensityMatrix rk4_step(const DensityMatrix& rho, const Matrix& h0, const Matrix& h_mid, const Matrix& h1,
                              const Lindbladian& generator, double dt) {
  const Matrix& r = rho.matrix();
  const Matrix k1 = generator(h0, r);
  const Matrix k2 = generator(h_mid, r + 0.5 * dt * k1);
  const Matrix k3 = generator(h_mid, r + 0.5 * dt * k2);
  const Matrix k4 = generator(h1, r + dt * k3);
  Matrix next = r + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  detail::check_step(r, next);
  return DensityMatrix(next);
}

// d rho / dt = -i [H, rho] + sum_k D[c_k] rho over one step of length dt with H fixed.
inline DensityMatrix lindblad_step(const DensityMatrix& rho, const Matrix& h, const std::vector<Matrix>& collapse,
                                   double dt) {
  return rk4_step(rho, h, h, h, Lindbladian(collapse), dt);
}

// Ladder transmon truncated to `dim` levels, rates in Hz.
struct TransmonModel {
  int dim = 2;
  scattering::Rates rates;

  // |1> -> |0> at Gamma_01, |2> -> |1> at 2 Gamma_01, pure dephasing Gamma_phi on each excited level.
  std::vector<Matrix> collapse_operators() const {
    std::vector<Matrix> ops;
    const double g01 = angular(rates.gamma01);
    const double gphi = angular(rates.gamma_phi);
    auto unit = [this](int i, int j) {
      Matrix m = Matrix::Zero(dim, dim);
      m(i, j) = 1.0;
      return m;
    };
    if (g01 > 0.0) ops.push_back(std::sqrt(g01) * unit(0, 1));
    if (dim == 3 && g01 > 0.0) ops.push_back(std::sqrt(2.0 * g01) * unit(1, 2));
    if (gphi > 0.0) {
      ops.push_back(std::sqrt(2.0 * gphi) * unit(1, 1));
      if (dim == 3) ops.push_back(std::sqrt(2.0 * gphi) * unit(2, 2));
    }
    return ops;
  }

  // Rotating-frame Hamiltonian; probe is a complex Rabi envelope, all inputs in Hz.
  Matrix hamiltonian(cdouble probe_rabi, double probe_detuning, double control_rabi, double control_detuning) const {
    Matrix h = Matrix::Zero(dim, dim);
    const cdouble wp = kTwoPi * probe_rabi;
    h(1, 1) = -angular(probe_detuning);
    h(1, 0) = 0.5 * wp;
    h(0, 1) = 0.5 * std::conj(wp);
    if (dim == 3) {
      const double wc = angular(control_rabi);
      h(2, 2) = -angular(probe_detuning + control_detuning);
      h(1, 2) = 0.5 * wc;
      h(2, 1) = 0.5 * wc;
    }
    return h;
  }
};

// Incident amplitude in sqrt(phonons/s) that produces a given probe Rabi rate:
// Omega = 2 sqrt(Gamma / 2) a_in in angular units.
inline cdouble incident_amplitude(cdouble probe_rabi_hz, double gamma01_hz) {
  return kTwoPi * probe_rabi_hz / std::sqrt(2.0 * angular(gamma01_hz));
}

// Input-output constant: reflected = c <sigma_01>, c = -i sqrt(Gamma / 2).
// Chosen so the driven steady state reproduces the resonant reflection formula.
inline cdouble emission_constant(double gamma01_hz) {
  return cdouble(0.0, -std::sqrt(0.5 * angular(gamma01_hz)));
}

struct DriveSchedule {
  double t0 = 0.0;
  double dt = 0.0;                   // output grid spacing, s
  std::vector<cdouble> probe_rabi;   // Hz, one per grid point
  double probe_detuning = 0.0;       // Hz, f_probe - f01
  std::vector<double> control_rabi;  // Hz, empty means no control drive
  double control_detuning = 0.0;     // Hz, f_control - f12

  std::size_t size() const { return probe_rabi.size(); }
  double time(std::size_t i) const { return t0 + dt * static_cast<double>(i); }
  bool has_control() const {
    return std::any_of(control_rabi.begin(), control_rabi.end(), [](double c) { return c != 0.0; });
  }

  static DriveSchedule constant(double duration, double dt, double probe_rabi, double probe_detuning,
                                double control_rabi = 0.0, double control_detuning = 0.0) {
    DriveSchedule s;
    s.dt = dt;
    const auto n = static_cast<std::size_t>(std::llround(duration / dt)) + 1;
    s.probe_rabi.assign(n, probe_rabi);
    s.probe_detuning = probe_detuning;
    if (control_rabi != 0.0) s.control_rabi.assign(n, control_rabi);
    s.control_detuning = control_detuning;
    return s;
  }
};

inline void validate(const DriveSchedule& s) {
  if (!(s.dt > 0.0)) throw ValidationError("schedule dt must be > 0");
  if (s.size() < 2) throw ValidationError("schedule needs at least two grid points");
  if (!s.control_rabi.empty() && s.control_rabi.size() != s.size()) {
    throw ValidationError("control envelope length must match the probe envelope");
  }
  for (double c : s.control_rabi) {
    if (!(c >= 0.0)) throw ValidationError("control envelope must be >= 0");
  }
}

struct FieldTrace {
  double t0 = 0.0;
  double dt = 0.0;
  std::vector<cdouble> incident;
  std::vector<cdouble> reflected;
  std::vector<cdouble> transmitted;

  std::size_t size() const { return incident.size(); }
  double time(std::size_t i) const { return t0 + dt * static_cast<double>(i); }
};

struct Integrity {
  double max_step_trace_drift = 0.0;
  double max_trace_error = 0.0;
  double max_hermiticity_error = 0.0;
  double min_eigenvalue = 1.0;
};

struct EvolveOptions {
  // Positivity is checked every `eigen_stride` integrator steps; 0 disables it.
  int eigen_stride = 1;
  bool keep_trajectory = true;
};

struct Evolution {
  std::vector<DensityMatrix> trajectory;  // one per grid point when kept
  DensityMatrix final_state{2};
  FieldTrace fields;
  Integrity integrity;
  double step = 0.0;  // integrator step actually used, s
};

// dt_max = 1 / (100 max(Omega_p, Omega_c, Gamma_01, gamma_01, |delta|)) with rates in Hz.
inline double max_step(const DriveSchedule& s, const scattering::Rates& rates) {
  double fastest = std::max(rates.gamma01, rates.decoherence());
  for (const auto& p : s.probe_rabi) fastest = std::max(fastest, std::abs(p));
  for (double c : s.control_rabi) fastest = std::max(fastest, c);
  fastest = std::max({fastest, std::abs(s.probe_detuning), std::abs(s.probe_detuning + s.control_detuning)});
  return 1.0 / (100.0 * fastest);
}

inline Evolution evolve(const DriveSchedule& schedule, const scattering::Rates& rates, int dim,
                        const DensityMatrix& initial, const EvolveOptions& options = {}) {
  validate(schedule);
  if (dim != 2 && dim != 3) throw ValidationError("transmon model dimension must be 2 or 3");
  if (schedule.has_control() && dim != 3) throw ValidationError("a control drive needs the three-level model");
  if (initial.dim() != dim) throw ValidationError("initial state dimension does not match the model");
  if (!(rates.gamma01 > 0.0)) throw ValidationError("field extraction needs Gamma_01 > 0");

  const TransmonModel model{dim, rates};
  const Lindbladian generator(model.collapse_operators());
  const auto substeps = static_cast<int>(std::ceil(schedule.dt / max_step(schedule, rates) - 1e-9));
  const double h = schedule.dt / substeps;
  const cdouble c = emission_constant(rates.gamma01);

  auto control_at = [&](std::size_t i) { return schedule.control_rabi.empty() ? 0.0 : schedule.control_rabi[i]; };
  auto hamiltonian_at = [&](std::size_t i, double frac) {
    const cdouble p = (1.0 - frac) * schedule.probe_rabi[i] + frac * schedule.probe_rabi[i + 1];
    const double ctl = (1.0 - frac) * control_at(i) + frac * control_at(i + 1);
    return model.hamiltonian(p, schedule.probe_detuning, ctl, schedule.control_detuning);
  };

  Evolution out;
  out.step = h;
  const std::size_t n = schedule.size();
  FieldTrace& f = out.fields;
  f.t0 = schedule.t0;
  f.dt = schedule.dt;
  f.incident.resize(n);
  f.reflected.resize(n);
  f.transmitted.resize(n);
  if (options.keep_trajectory) out.trajectory.reserve(n);

  DensityMatrix rho = initial;
  Integrity& integ = out.integrity;
  auto record = [&](std::size_t i) {
    f.incident[i] = incident_amplitude(schedule.probe_rabi[i], rates.gamma01);
    f.reflected[i] = c * rho(1, 0);
    f.transmitted[i] = f.incident[i] + f.reflected[i];
    integ.max_trace_error = std::max(integ.max_trace_error, rho.trace_error());
    integ.max_hermiticity_error = std::max(integ.max_hermiticity_error, rho.hermiticity_error());
    if (options.keep_trajectory) out.trajectory.push_back(rho);
  };

  long step_count = 0;
  if (options.eigen_stride > 0) integ.min_eigenvalue = rho.min_eigenvalue();
  record(0);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    for (int s = 0; s < substeps; ++s) {
      const double a = static_cast<double>(s) / substeps;
      const double b = (s + 0.5) / substeps;
      const double e = static_cast<double>(s + 1) / substeps;
      const cdouble before = rho.matrix().trace();
      rho = rk4_step(rho, hamiltonian_at(i, a), hamiltonian_at(i, b), hamiltonian_at(i, e), generator, h);
      integ.max_step_trace_drift = std::max(integ.max_step_trace_drift, std::abs(rho.matrix().trace() - before));
      ++step_count;
      if (options.eigen_stride > 0 && step_count % options.eigen_stride == 0) {
        integ.min_eigenvalue = std::min(integ.min_eigenvalue, rho.min_eigenvalue());
      }
    }
    record(i + 1);
  }
  out.final_state = rho;
  return out;
}

inline Evolution evolve(const DriveSchedule& schedule, const scattering::Rates& rates, int dim,
                        const EvolveOptions& options = {}) {
  return evolve(schedule, rates, dim, DensityMatrix(dim), options);
}

// Reflection coefficient read off a field trace at sample i.
inline cdouble reflection_at(const FieldTrace& f, std::size_t i) {
  if (std::abs(f.incident[i]) == 0.0) throw NumericalError("no incident field at the requested sample");
  return f.reflected[i] / f.incident[i];
}

// Steady state from the null space of the Liouvillian (constant drives).
inline DensityMatrix steady_state(const TransmonModel& model, cdouble probe_rabi, double probe_detuning,
                                  double control_rabi = 0.0, double control_detuning = 0.0) {
  const int d = model.dim;
  const int n = d * d;
  const Lindbladian generator(model.collapse_operators());
  const Matrix h = model.hamiltonian(probe_rabi, probe_detuning, control_rabi, control_detuning);
  Eigen::MatrixXcd super(n, n);
  for (int col = 0; col < n; ++col) {
    Matrix e = Matrix::Zero(d, d);
    e(col % d, col / d) = 1.0;
    const Matrix image = generator(h, e);
    for (int row = 0; row < n; ++row) super(row, col) = image(row % d, row / d);
  }
  Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(n);
  // Replace the first equation with the trace condition.
  for (int col = 0; col < n; ++col) super(0, col) = (col % d == col / d) ? 1.0 : 0.0;
  rhs(0) = 1.0;
  const Eigen::VectorXcd x = super.fullPivLu().solve(rhs);
  Matrix rho(d, d);
  for (int k = 0; k < n; ++k) rho(k % d, k / d) = x(k);
  return DensityMatrix(rho);
}

// Reflection of a weak or strong constant probe from the Liouvillian steady state.
inline cdouble steady_reflection(const TransmonModel& model, double probe_rabi, double probe_detuning,
                                 double control_rabi = 0.0, double control_detuning = 0.0) {
  const auto rho = steady_state(model, probe_rabi, probe_detuning, control_rabi, control_detuning);
  return emission_constant(model.rates.gamma01) * rho(1, 0) / incident_amplitude(probe_rabi, model.rates.gamma01);
}

struct AutlerTownesPoint {
  double probe_detuning = 0.0;
  double control_rabi = 0.0;
  double transmittance = 0.0;
};

// Probe transmission versus probe detuning with a constant control tone on the 1-2 transition.
inline std::vector<AutlerTownesPoint> autler_townes_spectrum(const scattering::Rates& rates, double probe_rabi,
                                                             const std::vector<double>& control_rabis,
                                                             const std::vector<double>& probe_detunings,
                                                             double control_detuning = 0.0) {
  if (!(probe_rabi > 0.0)) throw ValidationError("probe_rabi must be > 0");
  const TransmonModel model{3, rates};
  std::vector<AutlerTownesPoint> out;
  out.reserve(control_rabis.size() * probe_detunings.size());
  for (double ctl : control_rabis) {
    for (double det : probe_detunings) {
      const cdouble r = steady_reflection(model, probe_rabi, det, ctl, control_detuning);
      out.push_back({det, ctl, std::norm(1.0 + r)});
    }
  }
  return out;
}

// Local minima of y(x), refined by a parabola through each minimum and its neighbours.
inline std::vector<double> local_minima(const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<double> out;
  for (std::size_t i = 1; i + 1 < y.size(); ++i) {
    if (y[i] < y[i - 1] && y[i] <= y[i + 1]) {
      const double h = x[i + 1] - x[i];
      const double denom = y[i - 1] - 2.0 * y[i] + y[i + 1];
      const double shift = denom > 0.0 ? 0.5 * h * (y[i - 1] - y[i + 1]) / denom : 0.0;
      out.push_back(x[i] + shift);
    }
  }
  return out;
}

}  // namespace sawqed::dynamics

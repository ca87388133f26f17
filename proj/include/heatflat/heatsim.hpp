#pragma once

#include <complex>
#include <string>
#include <vector>

#include "heatflat/gevrey.hpp"

namespace heatflat::heatsim {

using cplx = std::complex<double>;

enum class KernelRep { Eigen, Poisson, Auto };

// k(t) = 1 + 2 sum_j (-1)^j exp(-(j pi)^2 t) = (pi t)^{-1/2} sum_m exp(-(m + 1/2)^2 / t)
// The eigen form cancels catastrophically for small t and is summed in MPFR
// there; it is refused below kEigenMinT.
constexpr double kEigenMinT = 1e-5;
double kernel_k(double t, KernelRep rep = KernelRep::Auto);

// int_0^inf e^{-st} k(t) dt: Gauss-Legendre on [0, a] plus the exact tail beyond a.
double kernel_laplace(double s, double a = 2.0, int panels = 64);

enum class TransferTag { NeuDir, NeuNeu, DirNeu, DirDir, InteriorX0 };

struct TransferKind {
  TransferTag tag = TransferTag::NeuDir;
  double x0 = 0.0;
  TransferKind() = default;
  TransferKind(TransferTag t, double x = 0.0);
  static TransferKind interior(double x0) { return {TransferTag::InteriorX0, x0}; }
};

const char* to_string(TransferTag t);
TransferTag transfer_tag_from_string(const std::string& s);

cplx transfer(const TransferKind& kind, cplx s);

// Fourier weight characterizing the trackable outputs. NeuDir and InteriorX0
// weigh the derivative of the output; the other kinds use exp(|xi/2|^{1/2})
// with polynomial factor (1+|xi|)^gamma, gamma = 0 (NeuNeu, DirDir) or -1/2 (DirNeu).
double log_omega_characterization(double xi, const TransferKind& kind);
double omega_characterization(double xi, const TransferKind& kind);

struct SimConfig {
  int J = 128;
  double dt = 1e-3;
  double T = 1.0;
  std::vector<double> x_grid;
  int hermite_order = 1;        // 1, 3 or 5: piecewise polynomial input
  bool tail_correction = true;  // quasi-static response of the modes j >= J
  double tail_tol = 1e-8;

  void validate() const;
};

struct SimResult {
  std::vector<double> t;
  std::vector<double> y;
  std::vector<double> x_grid;
  std::vector<double> z;        // row-major, z[m * x_grid.size() + i]
  int hermite_order = 1;
  double tail_uncorrected = 0;  // size of the modes j >= J without correction
  double tail_estimate = 0;     // first neglected term after correction
  bool tail_flag = false;       // tail_estimate above cfg.tail_tol

  double z_at(int m, int i) const { return z[m * x_grid.size() + i]; }
  std::string y_csv() const;
  std::string z_csv() const;
};

// u and its first max_deriv derivatives at t (max_deriv = 0: values only).
SimResult simulate(const gevrey::DerivsFn& u, int max_deriv, const SimConfig& cfg);
// Signals with a derivative provider feed the requested order; sampled
// signals are interpolated linearly.
SimResult simulate(const gevrey::Signal& u, const SimConfig& cfg);

struct RefineReport {
  double base_max;     // max |y|
  double dJ;           // max |y(J) - y(2J)| over common times
  double ddt;          // max |y(dt) - y(dt/2)| over common times
};

RefineReport refine_check(const gevrey::DerivsFn& u, int max_deriv, const SimConfig& cfg);

}  // namespace heatflat::heatsim

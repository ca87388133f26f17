#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "heatflat/gevrey.hpp"
#include "heatflat/numkit.hpp"

namespace heatflat::plancherel {

using gevrey::GevreyParams;
using numkit::LogScalar;

constexpr int kMaxConvolution = 5000;

struct VarpiParams {
  double alpha;  // 2 s
  double beta;   // -gamma s
};

// Requires gamma < 0 and R = 1.
VarpiParams varpi_params(const GevreyParams& p);

// a_k = 1 / Gamma(alpha k + beta + 1), k = 0..N
std::vector<LogScalar> varpi_coeffs(const GevreyParams& p, int N);

// ln varpi(xi) = ln sum_k a_k xi^{2k}, summed until the tail is negligible.
double log_varpi(const GevreyParams& p, double xi);

// A_n = sum_{k=0}^n a_k a_{n-k}, n = 0..N, by sorted log-sum per n.
std::vector<LogScalar> convolution_An(const GevreyParams& p, int N, int max_n = kMaxConvolution);

// ln of (2e/(alpha n))^{alpha n} n^{-2 beta - 1/2}
double log_An_model(const VarpiParams& v, int n);

struct BridgeReport {
  std::vector<double> gap;  // ln M_n + (1/2) ln A_n
  double median;
  double width;             // max |gap - median|
};

BridgeReport an_vs_Mn_bridge(const GevreyParams& p, int N);

template <class Real>
struct LaplaceResult {
  Real sum;         // (1/n) sum_k exp(-n (u(k/n) - u(x0)))
  Real prediction;  // sqrt(2 pi / (u''(x0) n))
  Real rel_err;
  Real log_sum;     // ln of the unshifted sum
  Real log_prediction;
};

// Discrete Laplace sum against its Gaussian prediction. The common factor
// exp(-n u(x0)) is divided out of both sides.
template <class Real, class U, class U2>
LaplaceResult<Real> discrete_laplace(U&& u, U2&& u2, Real x0, long n) {
  using std::exp;
  using std::log;
  using std::sqrt;
  using std::abs;
  using std::acos;
  if (n < 1) throw std::domain_error("discrete_laplace: n must be positive");
  if (!(x0 > 0) || !(x0 < 1)) throw std::domain_error("discrete_laplace: x0 must be interior");
  const Real curv = u2(x0);
  if (!(curv > 0)) throw std::domain_error("discrete_laplace: u''(x0) must be positive");
  const Real u0 = u(x0);
  const Real N(n);
  std::vector<Real> terms;
  terms.reserve(n + 1);
  for (long k = 0; k <= n; ++k) {
    Real d = u(Real(k) / N) - u0;
    if (d < 0) throw std::domain_error("discrete_laplace: x0 is not the global minimum");
    terms.push_back(exp(-N * d));
  }
  // largest terms first: they sit closest to x0
  const long kc = static_cast<long>(std::llround(static_cast<double>(x0) * n));
  Real s = terms[std::min(std::max(kc, 0L), n)];
  for (long j = 1; j <= n; ++j) {
    if (kc + j <= n) s += terms[kc + j];
    if (kc - j >= 0) s += terms[kc - j];
  }
  const Real pi = acos(Real(-1));
  LaplaceResult<Real> r;
  r.sum = s / N;
  r.prediction = sqrt(2 * pi / (curv * N));
  r.rel_err = abs(r.sum / r.prediction - 1);
  r.log_sum = log(r.sum) - N * u0;
  r.log_prediction = log(r.prediction) - N * u0;
  return r;
}

// u = log h, h(x) = x^{alpha x} (1-x)^{alpha (1-x)}
double log_h(double alpha, double x);
double log_h_second(double alpha, double x);

struct RemainderSplit {
  double near;  // |k/n - 1/2| <= eps_n, normalized by 2^{alpha n}/sqrt(n)
  double far;   // |k/n - 1/2| >  eps_n, same normalization
  double eps;
  double g_half;
};

// g_n(x) = [(1/n + x)(1/n + 1 - x)]^{-beta - 1/2}
double g_n(double beta, long n, double x);

RemainderSplit laplace_remainder_split(const VarpiParams& v, long n, double mu);

struct NamedSignal {
  std::string name;
  gevrey::Signal signal;
};
// Gaussians, shifted compact bumps and their sums, on grids wide enough to decay.
std::vector<NamedSignal> ratio_family();

struct RatioRow {
  std::string name;
  double fourier;  // weighted_fourier_norm
  double time;     // gevrey_norm_time partial sum
  double ratio;
  bool converged;
};
std::vector<RatioRow> norm_ratios(const std::vector<NamedSignal>& family, const GevreyParams& p, int N);
// smallest C with every ratio in [1/C, C]
double ratio_band(const std::vector<RatioRow>& rows);

}  // namespace heatflat::plancherel

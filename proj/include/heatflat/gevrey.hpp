#pragma once

#include <functional>
#include <string>
#include <vector>

#include "heatflat/numkit.hpp"
#include "json.hpp"

namespace heatflat::gevrey {

struct GevreyParams {
  double s;
  double R;
  double gamma;
  GevreyParams(double s_, double R_, double gamma_);
};

// out[0..K] <- phi(t), phi'(t), ..., phi^{(K)}(t)
using DerivsFn = std::function<void(double t, int K, double* out)>;

class Signal {
 public:
  Signal() = default;
  Signal(double t0, double t1, int npts, DerivsFn derivs, bool compact, nlohmann::json descriptor);
  // Sampled data only; no derivative provider.
  Signal(double t0, double t1, std::vector<double> values, bool compact);

  double t0() const { return t0_; }
  double t1() const { return t1_; }
  double step() const { return (t1_ - t0_) / (npts() - 1); }
  int npts() const { return static_cast<int>(values_.size()); }
  double time(int i) const { return i + 1 == npts() ? t1_ : t0_ + i * step(); }
  const std::vector<double>& values() const { return values_; }
  bool compact() const { return compact_; }
  bool has_deriv() const { return static_cast<bool>(derivs_); }
  const nlohmann::json& descriptor() const { return descriptor_; }
  const DerivsFn& derivs_fn() const { return derivs_; }

  double deriv(int n, double t) const;
  void derivs(double t, int K, double* out) const;
  std::vector<double> derivs(double t, int K) const;

  // Same analytic signal resampled on a different grid.
  Signal regrid(double t0, double t1, int npts) const;

  std::string to_csv() const;

 private:
  double t0_ = 0.0, t1_ = 1.0;
  std::vector<double> values_;
  DerivsFn derivs_;
  bool compact_ = false;
  nlohmann::json descriptor_;
};

numkit::LogScalar weight_Mn(const GevreyParams& p, int n);
std::vector<double> log_weights(const GevreyParams& p, int N);

// Test-signal families. Grids are uniform with npts points.
Signal gaussian(double sigma, double center, double t0, double t1, int npts, double amplitude = 1.0);
// exp(-1/t^g) for t > 0, zero otherwise.
Signal bump_gevrey(double gamma_exp, double t0 = -1.0, double t1 = 2.0, int npts = 3001);
// exp(-((t-a)/w)^-g) * exp(-((b-t)/w)^-g), supported in [a, b].
Signal compact_bump(double gamma_exp, double a, double b, double width, double t0, double t1, int npts);
Signal gevrey_cutoff(double t_a, double t_b, double order_s, double t0 = -1.0, double t1 = 2.0, int npts = 3001);

// Signal algebra, exact on the derivative providers. Grids follow the first argument.
Signal sum(const Signal& a, const Signal& b);
Signal scale(const Signal& a, double c);
Signal product(const Signal& a, const Signal& b);
Signal shift(const Signal& a, double tau);        // t -> a(t - tau)
Signal dilate(const Signal& a, double c);         // t -> a(c t)
Signal derivative(const Signal& a, int m = 1);    // t -> a^{(m)}(t)

struct L2Norms {
  std::vector<double> norm2;  // ||phi^{(n)}||^2 for n = 0..N-1
  int panels;
  double rel_change;
};

// Composite Simpson with step halving on the signal interval.
L2Norms derivative_l2_norms(const Signal& sig, int N, double tol = 1e-8);

struct NormSeries {
  std::vector<double> partial;    // partial sums of (||phi^{(n)}|| / M_n)^2
  std::vector<double> increment;
  bool converged;
  double tail_estimate;
  double quad_rel_change;
};

bool geometric_decay(const std::vector<double>& increments, double* tail = nullptr);

NormSeries gevrey_norm_time(const Signal& sig, const GevreyParams& p, int N);
// Same series from precomputed squared L2 norms.
NormSeries gevrey_series_from_norms(const std::vector<double>& norm2, const GevreyParams& p);

double log_omega(double xi, const GevreyParams& p);

// Squared weighted norm: int |F phi(xi)|^2 omega(xi)^2 dxi, F phi = (2 pi)^{-1/2} int e^{-i t xi} phi.
double weighted_fourier_norm(const Signal& sig, const GevreyParams& p);

struct Spectrum {
  std::vector<double> xi;   // xi >= 0
  std::vector<double> mag;  // |F phi(xi)|
};

// Zero-padded FFT, padding factor >= 4, length a power of two.
Spectrum fourier_magnitude(const Signal& sig, int pad_factor = 4);

enum class DecayShape { Consistent, FasterThanModel, SlowerThanModel };

struct DecayFit {
  double delta;
  double intercept;
  double rel_residual;
  double curvature;
  DecayShape shape;
  int points;
};

DecayFit fourier_decay_fit(const Signal& sig, double order_s, double residual_threshold = 0.01);

const char* to_string(DecayShape s);

}  // namespace heatflat::gevrey

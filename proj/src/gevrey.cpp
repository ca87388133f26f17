#include "heatflat/gevrey.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>
#include <sstream>
#include <stdexcept>

#include "heatflat/quad.hpp"

namespace heatflat::gevrey {

using numkit::kPi;
using numkit::LogScalar;
using quad::composite_gl;
using quad::gauss_legendre;

namespace {

const std::vector<std::vector<double>>& binomials() {
  static const std::vector<std::vector<double>> table = [] {
    std::vector<std::vector<double>> b(161);
    for (int n = 0; n <= 160; ++n) {
      b[n].assign(n + 1, 1.0);
      for (int k = 1; k < n; ++k) b[n][k] = b[n - 1][k - 1] + b[n - 1][k];
    }
    return b;
  }();
  return table;
}

double binom(int n, int k) {
  if (n > 160) throw std::out_of_range("binomial table exceeded");
  return binomials()[n][k];
}

// Derivatives of exp(-t^{-g}) at t > 0 through f' = g' f (Faa di Bruno).
void bump_derivs(double g, double t, int K, double* out) {
  if (t <= 0.0) {
    std::fill(out, out + K + 1, 0.0);
    return;
  }
  const double f0 = std::exp(-std::pow(t, -g));
  if (f0 == 0.0) {
    std::fill(out, out + K + 1, 0.0);
    return;
  }
  // gd[m] = d^m/dt^m (-t^{-g}) for m >= 1
  std::vector<double> gd(K + 1, 0.0);
  double c = -1.0, tp = std::pow(t, -g);
  for (int m = 1; m <= K; ++m) {
    c *= (-g - (m - 1));
    tp /= t;
    gd[m] = c * tp;
  }
  out[0] = f0;
  for (int n = 0; n < K; ++n) {
    double acc = 0.0;
    for (int k = 0; k <= n; ++k) acc += binom(n, k) * gd[k + 1] * out[n - k];
    out[n + 1] = acc;
  }
}

std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace

GevreyParams::GevreyParams(double s_, double R_, double gamma_) : s(s_), R(R_), gamma(gamma_) {
  if (!(s_ > 0.0)) throw std::domain_error("GevreyParams: s must be positive");
  if (!(R_ > 0.0)) throw std::domain_error("GevreyParams: R must be positive");
}

Signal::Signal(double t0, double t1, int npts, DerivsFn derivs, bool compact, nlohmann::json descriptor)
    : t0_(t0), t1_(t1), derivs_(std::move(derivs)), compact_(compact), descriptor_(std::move(descriptor)) {
  if (!(t1 > t0) || npts < 2) throw std::invalid_argument("Signal: need t1 > t0 and at least 2 points");
  values_.resize(npts);
  for (int i = 0; i < npts; ++i) values_[i] = deriv(0, time(i));
}

Signal::Signal(double t0, double t1, std::vector<double> values, bool compact)
    : t0_(t0), t1_(t1), values_(std::move(values)), compact_(compact), descriptor_({{"family", "samples"}}) {
  if (!(t1 > t0) || values_.size() < 2) throw std::invalid_argument("Signal: need t1 > t0 and at least 2 points");
}

double Signal::deriv(int n, double t) const {
  if (!derivs_) throw std::logic_error("Signal: no derivative provider");
  std::vector<double> buf(n + 1);
  derivs_(t, n, buf.data());
  return buf[n];
}

void Signal::derivs(double t, int K, double* out) const {
  if (!derivs_) throw std::logic_error("Signal: no derivative provider");
  derivs_(t, K, out);
}

std::vector<double> Signal::derivs(double t, int K) const {
  std::vector<double> out(K + 1);
  derivs(t, K, out.data());
  return out;
}

Signal Signal::regrid(double t0, double t1, int npts) const {
  if (!derivs_) throw std::logic_error("Signal::regrid: no derivative provider");
  return Signal(t0, t1, npts, derivs_, compact_, descriptor_);
}

std::string Signal::to_csv() const {
  std::ostringstream os;
  os << "t,value\n";
  for (int i = 0; i < npts(); ++i) os << fmt17(time(i)) << ',' << fmt17(values_[i]) << '\n';
  return os.str();
}

LogScalar weight_Mn(const GevreyParams& p, int n) {
  if (n < 0) throw std::domain_error("weight_Mn: n must be non-negative");
  double ns = n * p.s;
  double lm = numkit::log_gamma(ns + 1.0) - ns * std::log(p.R) - (p.s * p.gamma + 0.25) * std::log1p(n);
  return LogScalar::from_log(lm);
}

std::vector<double> log_weights(const GevreyParams& p, int N) {
  std::vector<double> out(N);
  for (int n = 0; n < N; ++n) out[n] = weight_Mn(p, n).log_mag;
  return out;
}

Signal gaussian(double sigma, double center, double t0, double t1, int npts, double amplitude) {
  if (!(sigma > 0.0)) throw std::domain_error("gaussian: sigma must be positive");
  DerivsFn d = [=](double t, int K, double* out) {
    // (-1)^n He_n(x) e^{-x^2/2} sigma^{-n}
    double x = (t - center) / sigma;
    double e = amplitude * std::exp(-0.5 * x * x);
    double hm1 = 0.0, h = 1.0, sc = 1.0;
    for (int n = 0; n <= K; ++n) {
      out[n] = ((n & 1) ? -1.0 : 1.0) * h * e * sc;
      double hn = x * h - n * hm1;
      hm1 = h;
      h = hn;
      sc /= sigma;
    }
  };
  nlohmann::json desc = {{"family", "gaussian"}, {"sigma", sigma}, {"center", center}, {"amplitude", amplitude}};
  return Signal(t0, t1, npts, d, false, desc);
}

Signal bump_gevrey(double gamma_exp, double t0, double t1, int npts) {
  if (!(gamma_exp > 0.0)) throw std::domain_error("bump_gevrey: exponent must be positive");
  DerivsFn d = [=](double t, int K, double* out) { bump_derivs(gamma_exp, t, K, out); };
  nlohmann::json desc = {{"family", "bump_gevrey"}, {"gamma_exp", gamma_exp}, {"order_s", 1.0 + 1.0 / gamma_exp}};
  return Signal(t0, t1, npts, d, false, desc);
}

Signal compact_bump(double gamma_exp, double a, double b, double width, double t0, double t1, int npts) {
  if (!(gamma_exp > 0.0) || !(b > a) || !(width > 0.0)) throw std::domain_error("compact_bump: bad parameters");
  DerivsFn d = [=](double t, int K, double* out) {
    std::vector<double> l(K + 1), r(K + 1);
    bump_derivs(gamma_exp, (t - a) / width, K, l.data());
    bump_derivs(gamma_exp, (b - t) / width, K, r.data());
    double sc = 1.0;
    for (int n = 0; n <= K; ++n) {
      double acc = 0.0;
      for (int k = 0; k <= n; ++k) acc += binom(n, k) * l[k] * ((n - k) & 1 ? -r[n - k] : r[n - k]);
      out[n] = acc * sc;
      sc /= width;
    }
  };
  nlohmann::json desc = {{"family", "compact_bump"}, {"gamma_exp", gamma_exp}, {"a", a}, {"b", b}, {"width", width}};
  return Signal(t0, t1, npts, d, true, desc);
}

Signal gevrey_cutoff(double t_a, double t_b, double order_s, double t0, double t1, int npts) {
  if (!(t_a < t_b)) throw std::domain_error("gevrey_cutoff: need t_a < t_b");
  if (!(order_s > 1.0 && order_s < 2.0)) throw std::domain_error("gevrey_cutoff: order must lie in (1, 2)");
  const double g = 1.0 / (order_s - 1.0);
  auto B = [=](double t, int K, double* out) {
    std::vector<double> l(K + 1), r(K + 1);
    bump_derivs(g, t - t_a, K, l.data());
    bump_derivs(g, t_b - t, K, r.data());
    for (int n = 0; n <= K; ++n) {
      double acc = 0.0;
      for (int k = 0; k <= n; ++k) acc += binom(n, k) * l[k] * ((n - k) & 1 ? -r[n - k] : r[n - k]);
      out[n] = acc;
    }
  };
  auto b0 = [=](double t) {
    double v;
    B(t, 0, &v);
    return v;
  };
  const int panels = 256;
  const double I = composite_gl(b0, t_a, t_b, panels);
  DerivsFn d = [=](double t, int K, double* out) {
    if (t <= t_a) {
      out[0] = 1.0;
      std::fill(out + 1, out + K + 1, 0.0);
      return;
    }
    if (t >= t_b) {
      std::fill(out, out + K + 1, 0.0);
      return;
    }
    // integrate over the shorter side so values near either end keep full relative accuracy
    double mid = 0.5 * (t_a + t_b);
    if (t <= mid) {
      int np = std::max(1, static_cast<int>(std::ceil(panels * (t - t_a) / (t_b - t_a))));
      out[0] = 1.0 - composite_gl(b0, t_a, t, np) / I;
    } else {
      int np = std::max(1, static_cast<int>(std::ceil(panels * (t_b - t) / (t_b - t_a))));
      out[0] = composite_gl(b0, t, t_b, np) / I;
    }
    if (K >= 1) {
      std::vector<double> bd(K);
      B(t, K - 1, bd.data());
      for (int n = 1; n <= K; ++n) out[n] = -bd[n - 1] / I;
    }
  };
  nlohmann::json desc = {{"family", "gevrey_cutoff"}, {"t_a", t_a}, {"t_b", t_b}, {"order_s", order_s}};
  return Signal(t0, t1, npts, d, false, desc);
}

Signal sum(const Signal& a, const Signal& b) {
  auto fa = a.derivs_fn(), fb = b.derivs_fn();
  DerivsFn d = [=](double t, int K, double* out) {
    std::vector<double> tmp(K + 1);
    fa(t, K, out);
    fb(t, K, tmp.data());
    for (int n = 0; n <= K; ++n) out[n] += tmp[n];
  };
  nlohmann::json desc = {{"op", "sum"}, {"args", {a.descriptor(), b.descriptor()}}};
  return Signal(a.t0(), a.t1(), a.npts(), d, a.compact() && b.compact(), desc);
}

Signal scale(const Signal& a, double c) {
  auto fa = a.derivs_fn();
  DerivsFn d = [=](double t, int K, double* out) {
    fa(t, K, out);
    for (int n = 0; n <= K; ++n) out[n] *= c;
  };
  nlohmann::json desc = {{"op", "scale"}, {"factor", c}, {"args", {a.descriptor()}}};
  return Signal(a.t0(), a.t1(), a.npts(), d, a.compact(), desc);
}

Signal product(const Signal& a, const Signal& b) {
  auto fa = a.derivs_fn(), fb = b.derivs_fn();
  DerivsFn d = [=](double t, int K, double* out) {
    std::vector<double> x(K + 1), y(K + 1);
    fa(t, K, x.data());
    fb(t, K, y.data());
    for (int n = 0; n <= K; ++n) {
      double acc = 0.0;
      for (int k = 0; k <= n; ++k) acc += binom(n, k) * x[k] * y[n - k];
      out[n] = acc;
    }
  };
  nlohmann::json desc = {{"op", "product"}, {"args", {a.descriptor(), b.descriptor()}}};
  return Signal(a.t0(), a.t1(), a.npts(), d, a.compact() || b.compact(), desc);
}

Signal shift(const Signal& a, double tau) {
  auto fa = a.derivs_fn();
  DerivsFn d = [=](double t, int K, double* out) { fa(t - tau, K, out); };
  nlohmann::json desc = {{"op", "shift"}, {"tau", tau}, {"args", {a.descriptor()}}};
  return Signal(a.t0() + tau, a.t1() + tau, a.npts(), d, a.compact(), desc);
}

Signal dilate(const Signal& a, double c) {
  if (!(c > 0.0)) throw std::domain_error("dilate: factor must be positive");
  auto fa = a.derivs_fn();
  DerivsFn d = [=](double t, int K, double* out) {
    fa(c * t, K, out);
    double sc = 1.0;
    for (int n = 0; n <= K; ++n) {
      out[n] *= sc;
      sc *= c;
    }
  };
  nlohmann::json desc = {{"op", "dilate"}, {"factor", c}, {"args", {a.descriptor()}}};
  return Signal(a.t0() / c, a.t1() / c, a.npts(), d, a.compact(), desc);
}

Signal derivative(const Signal& a, int m) {
  if (m < 0) throw std::domain_error("derivative: order must be non-negative");
  auto fa = a.derivs_fn();
  DerivsFn d = [=](double t, int K, double* out) {
    std::vector<double> tmp(K + m + 1);
    fa(t, K + m, tmp.data());
    std::copy(tmp.begin() + m, tmp.end(), out);
  };
  nlohmann::json desc = {{"op", "derivative"}, {"order", m}, {"args", {a.descriptor()}}};
  return Signal(a.t0(), a.t1(), a.npts(), d, a.compact(), desc);
}

L2Norms derivative_l2_norms(const Signal& sig, int N, double tol) {
  if (!sig.has_deriv()) throw std::invalid_argument("derivative_l2_norms: signal has no derivative provider");
  if (N < 1) throw std::invalid_argument("derivative_l2_norms: N must be positive");
  const double a = sig.t0(), b = sig.t1();
  std::vector<double> buf(N);
  auto accumulate = [&](double t, double w, std::vector<double>& acc) {
    sig.derivs(t, N - 1, buf.data());
    for (int n = 0; n < N; ++n) acc[n] += w * buf[n] * buf[n];
  };
  // trapezoid sums f(a)/2 + f(b)/2 + interior, refined by halving
  int m = 128;
  std::vector<double> tsum(N, 0.0);
  accumulate(a, 0.5, tsum);
  accumulate(b, 0.5, tsum);
  for (int i = 1; i < m; ++i) accumulate(a + (b - a) * i / m, 1.0, tsum);
  std::vector<double> T_prev(N), S_prev(N, -1.0), S(N);
  for (int n = 0; n < N; ++n) T_prev[n] = tsum[n] * (b - a) / m;
  double change = 1.0;
  for (int level = 0; level < 14; ++level) {
    for (int i = 0; i < m; ++i) accumulate(a + (b - a) * (i + 0.5) / m, 1.0, tsum);
    m *= 2;
    change = 0.0;
    for (int n = 0; n < N; ++n) {
      double T = tsum[n] * (b - a) / m;
      S[n] = (4.0 * T - T_prev[n]) / 3.0;
      T_prev[n] = T;
      if (S_prev[n] >= 0.0) {
        double d = std::fabs(S[n] - S_prev[n]);
        double scale = std::max(std::fabs(S[n]), 1e-300);
        change = std::max(change, S[n] == 0.0 && d == 0.0 ? 0.0 : d / scale);
      } else {
        change = 1.0;
      }
    }
    if (level > 0 && change < tol) return {S, m, change};
    S_prev = S;
  }
  throw std::runtime_error("derivative_l2_norms: quadrature did not reach tolerance");
}

bool geometric_decay(const std::vector<double>& inc, double* tail) {
  if (tail) *tail = 0.0;
  if (inc.size() < 5) return false;
  const size_t n = inc.size();
  double rmax = 0.0;
  for (size_t i = n - 4; i < n; ++i) {
    if (inc[i] == 0.0) continue;
    if (inc[i - 1] == 0.0) return false;
    double r = inc[i] / inc[i - 1];
    if (!(r <= 0.95)) return false;
    rmax = std::max(rmax, r);
  }
  if (tail) *tail = inc.back() * rmax / (1.0 - rmax);
  return true;
}

NormSeries gevrey_series_from_norms(const std::vector<double>& norm2, const GevreyParams& p) {
  NormSeries out{};
  auto lw = log_weights(p, static_cast<int>(norm2.size()));
  double acc = 0.0;
  for (size_t n = 0; n < norm2.size(); ++n) {
    double inc = norm2[n] > 0.0 ? std::exp(std::log(norm2[n]) - 2.0 * lw[n]) : 0.0;
    out.increment.push_back(inc);
    acc += inc;
    out.partial.push_back(acc);
  }
  out.converged = geometric_decay(out.increment, &out.tail_estimate);
  return out;
}

NormSeries gevrey_norm_time(const Signal& sig, const GevreyParams& p, int N) {
  if (N < 1) throw std::invalid_argument("gevrey_norm_time: N must be positive");
  auto l2 = derivative_l2_norms(sig, N);
  auto out = gevrey_series_from_norms(l2.norm2, p);
  out.quad_rel_change = l2.rel_change;
  return out;
}

double log_omega(double xi, const GevreyParams& p) {
  double a = std::fabs(xi);
  return p.gamma * std::log1p(a) + p.R * std::pow(a, 1.0 / p.s);
}

Spectrum fourier_magnitude(const Signal& sig, int pad_factor) {
  if (pad_factor < 4) throw std::invalid_argument("fourier_magnitude: padding factor must be at least 4");
  const int n = sig.npts();
  int M = 1;
  while (M < pad_factor * n) M <<= 1;
  const double h = sig.step();
  std::unique_ptr<double, decltype(&fftw_free)> in(fftw_alloc_real(M), fftw_free);
  std::unique_ptr<fftw_complex, decltype(&fftw_free)> out(fftw_alloc_complex(M / 2 + 1), fftw_free);
  fftw_plan plan = fftw_plan_dft_r2c_1d(M, in.get(), out.get(), FFTW_ESTIMATE);
  std::fill(in.get(), in.get() + M, 0.0);
  const auto& v = sig.values();
  for (int i = 0; i < n; ++i) in.get()[i] = v[i] * (i == 0 || i == n - 1 ? 0.5 : 1.0);
  fftw_execute(plan);
  fftw_destroy_plan(plan);
  Spectrum s;
  const double c = h / std::sqrt(2.0 * kPi);
  for (int k = 0; k <= M / 2; ++k) {
    s.xi.push_back(2.0 * kPi * k / (M * h));
    s.mag.push_back(c * std::hypot(out.get()[k][0], out.get()[k][1]));
  }
  return s;
}

double weighted_fourier_norm(const Signal& sig, const GevreyParams& p) {
  const auto& v = sig.values();
  double vmax = 0.0;
  for (double x : v) vmax = std::max(vmax, std::fabs(x));
  if (vmax == 0.0) return 0.0;
  if (std::fabs(v.front()) > 1e-14 * vmax || std::fabs(v.back()) > 1e-14 * vmax)
    throw std::invalid_argument("weighted_fourier_norm: signal does not decay at the grid ends");

  auto spec = fourier_magnitude(sig, 4);
  std::vector<double> integrand(spec.xi.size());
  double imax = 0.0;
  for (size_t k = 0; k < spec.xi.size(); ++k) {
    integrand[k] = spec.mag[k] * spec.mag[k] * std::exp(2.0 * log_omega(spec.xi[k], p));
    imax = std::max(imax, integrand[k]);
  }
  size_t last = 0;
  for (size_t k = 0; k < integrand.size(); ++k)
    if (integrand[k] >= 1e-16 * imax) last = k;
  const double xi_end = spec.xi[std::min(last + 1, spec.xi.size() - 1)];

  // Trapezoidal Fourier sum evaluated off the FFT grid, by phase rotation.
  const int n = sig.npts();
  const double h = sig.step(), t0 = sig.t0();
  const double c = h / std::sqrt(2.0 * kPi);
  auto F2 = [&](double xi) {
    numkit::cplx rot = std::polar(1.0, -xi * h), ph = std::polar(1.0, -xi * t0);
    double re = 0.0, im = 0.0;
    for (int j = 0; j < n; ++j) {
      double w = v[j] * (j == 0 || j == n - 1 ? 0.5 : 1.0);
      re += w * ph.real();
      im += w * ph.imag();
      ph *= rot;
    }
    return c * c * (re * re + im * im);
  };
  auto wsq = [&](double xi) { return std::exp(2.0 * log_omega(xi, p)); };

  // [0, xi_c] in v = xi^{1/s} absorbs the cusp of omega at the origin.
  const double xi_c = std::min(1.0, xi_end);
  auto gv = [&](double vv) {
    if (vv <= 0.0) return 0.0;
    double xi = std::pow(vv, p.s);
    return F2(xi) * wsq(xi) * p.s * std::pow(vv, p.s - 1.0);
  };
  double total = composite_gl(gv, 0.0, std::pow(xi_c, 1.0 / p.s), 8);
  if (xi_end > xi_c) {
    // half an oscillation period of |F|^2 per panel
    const double width = sig.t1() - sig.t0();
    int panels = std::max(4, static_cast<int>(std::ceil((xi_end - xi_c) * width / kPi)));
    total += composite_gl([&](double xi) { return F2(xi) * wsq(xi); }, xi_c, xi_end, panels);
  }
  return 2.0 * total;
}

const char* to_string(DecayShape s) {
  switch (s) {
    case DecayShape::Consistent: return "consistent";
    case DecayShape::FasterThanModel: return "faster_than_model";
    case DecayShape::SlowerThanModel: return "slower_than_model";
  }
  return "unknown";
}

DecayFit fourier_decay_fit(const Signal& sig, double order_s, double residual_threshold) {
  if (!(order_s > 0.0)) throw std::domain_error("fourier_decay_fit: order must be positive");
  auto spec = fourier_magnitude(sig, 4);
  const size_t K = spec.xi.size();
  double mx = *std::max_element(spec.mag.begin(), spec.mag.end());
  if (mx == 0.0) throw std::invalid_argument("fourier_decay_fit: zero signal");
  // upper monotone envelope: points exceeding everything to their right
  std::vector<double> xs, ys;
  double right = 0.0;
  std::vector<char> keep(K, 0);
  for (size_t k = K; k-- > 1;) {
    if (spec.mag[k] > right) {
      keep[k] = 1;
      right = spec.mag[k];
    }
  }
  for (size_t k = 1; k < K; ++k) {
    if (!keep[k]) continue;
    double r = spec.mag[k] / mx;
    if (r <= 1e-3 && r >= 1e-12) {
      xs.push_back(std::pow(spec.xi[k], 1.0 / order_s));
      ys.push_back(-std::log(r));
    }
  }
  if (xs.size() < 5) throw std::runtime_error("fourier_decay_fit: too few envelope points in the fit window");
  const size_t n = xs.size();
  double sx = 0, sy = 0;
  for (size_t i = 0; i < n; ++i) {
    sx += xs[i];
    sy += ys[i];
  }
  double mxv = sx / n, myv = sy / n, sxx = 0, sxy = 0;
  for (size_t i = 0; i < n; ++i) {
    sxx += (xs[i] - mxv) * (xs[i] - mxv);
    sxy += (xs[i] - mxv) * (ys[i] - myv);
  }
  DecayFit f{};
  f.delta = sxy / sxx;
  f.intercept = myv - f.delta * mxv;
  f.points = static_cast<int>(n);
  double ss = 0, ymin = ys[0], ymax = ys[0];
  for (size_t i = 0; i < n; ++i) {
    double r = ys[i] - f.intercept - f.delta * xs[i];
    ss += r * r;
    ymin = std::min(ymin, ys[i]);
    ymax = std::max(ymax, ys[i]);
  }
  f.rel_residual = std::sqrt(ss / n) / (ymax - ymin);
  // quadratic coefficient on the centred abscissa, normalized to the window
  double s2 = 0, s3 = 0, s4 = 0, sy2 = 0;
  for (size_t i = 0; i < n; ++i) {
    double d = xs[i] - mxv;
    s2 += d * d;
    s3 += d * d * d;
    s4 += d * d * d * d;
    sy2 += d * d * (ys[i] - myv);
  }
  double q1 = s2 / n;
  double denom = s4 - s2 * q1 - s3 * s3 / s2;
  double cq = (sy2 - s3 * sxy / s2) / denom;
  double xr = xs.back() - xs.front();
  f.curvature = cq * xr * xr / (ymax - ymin);
  if (f.rel_residual <= residual_threshold)
    f.shape = DecayShape::Consistent;
  else
    f.shape = f.curvature > 0 ? DecayShape::FasterThanModel : DecayShape::SlowerThanModel;
  return f;
}

}  // namespace heatflat::gevrey

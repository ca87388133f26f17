#include "heatflat/numkit.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "heatflat/mp.hpp"

namespace heatflat::numkit {

namespace {

struct Neumaier {
  double s = 0.0, c = 0.0;
  void add(double x) {
    double t = s + x;
    if (std::fabs(s) >= std::fabs(x))
      c += (s - t) + x;
    else
      c += (x - t) + s;
    s = t;
  }
  double value() const { return s + c; }
};

struct CNeumaier {
  Neumaier re, im;
  void add(cplx z) {
    re.add(z.real());
    im.add(z.imag());
  }
  cplx value() const { return {re.value(), im.value()}; }
};

}  // namespace

LogScalar LogScalar::from_double(double x) {
  if (x == 0.0) return {};
  return {std::log(std::fabs(x)), cplx(x < 0 ? -1.0 : 1.0, 0.0)};
}

LogScalar LogScalar::from_complex(cplx z) {
  double a = std::abs(z);
  if (a == 0.0) return {};
  return {std::log(a), z / a};
}

double LogScalar::to_double() const {
  if (is_zero()) return 0.0;
  return phase.real() * std::exp(log_mag);
}

cplx LogScalar::to_complex() const {
  if (is_zero()) return {0.0, 0.0};
  return phase * std::exp(log_mag);
}

LogScalar LogScalar::pow(double p) const {
  if (is_zero()) return p > 0 ? LogScalar{} : throw std::domain_error("LogScalar::pow: zero to non-positive power");
  if (phase.real() < 0 || phase.imag() != 0.0) throw std::domain_error("LogScalar::pow: positive real data only");
  return {p * log_mag, phase};
}

LogScalar operator*(const LogScalar& a, const LogScalar& b) {
  if (a.is_zero() || b.is_zero()) return {};
  return {a.log_mag + b.log_mag, a.phase * b.phase};
}

LogScalar operator/(const LogScalar& a, const LogScalar& b) {
  if (b.is_zero()) throw std::domain_error("LogScalar: division by zero");
  if (a.is_zero()) return {};
  return {a.log_mag - b.log_mag, a.phase * std::conj(b.phase)};
}

LogScalar operator+(const LogScalar& a, const LogScalar& b) {
  if (a.is_zero()) return b;
  if (b.is_zero()) return a;
  const LogScalar& hi = a.log_mag >= b.log_mag ? a : b;
  const LogScalar& lo = a.log_mag >= b.log_mag ? b : a;
  cplx z = hi.phase + lo.phase * std::exp(lo.log_mag - hi.log_mag);
  double m = std::abs(z);
  if (m == 0.0) return {};
  return {hi.log_mag + std::log(m), z / m};
}

LogScalar operator-(const LogScalar& a, const LogScalar& b) { return a + (-b); }

double log_sum_exp(std::vector<double> xs) {
  if (xs.empty()) return kNegInf;
  std::sort(xs.begin(), xs.end(), std::greater<>());
  double m = xs.front();
  if (m == kNegInf) return kNegInf;
  if (std::isinf(m)) return m;
  Neumaier acc;
  for (double x : xs) acc.add(std::exp(x - m));
  return m + std::log(acc.value());
}

LogScalar log_sum(std::vector<LogScalar> xs) {
  std::sort(xs.begin(), xs.end(), [](const LogScalar& a, const LogScalar& b) { return a.log_mag > b.log_mag; });
  if (xs.empty() || xs.front().is_zero()) return {};
  double m = xs.front().log_mag;
  CNeumaier acc;
  for (const auto& x : xs) {
    if (x.is_zero()) break;
    acc.add(x.phase * std::exp(x.log_mag - m));
  }
  cplx z = acc.value();
  double a = std::abs(z);
  if (a == 0.0) return {};
  return {m + std::log(a), z / a};
}

double log_gamma(double x) {
  if (!(x > 0.0)) throw std::domain_error("log_gamma: argument must be positive");
  int sg = 0;
  return lgamma_r(x, &sg);
}

double log_abs_gamma(double x, int* sign) {
  if (x <= 0.0 && x == std::floor(x)) throw std::domain_error("log_abs_gamma: pole");
  int sg = 1;
  double v = lgamma_r(x, &sg);
  if (sign) *sign = sg;
  return v;
}

MLParams::MLParams(double a, double b) : alpha(a), beta(b) {
  if (!(a > 0.0) || !(b > 0.0)) throw std::domain_error("MLParams: alpha and beta must be positive");
}

LogScalar mittag_leffler_series(const MLParams& p, double x) {
  if (!(x >= 0.0)) throw std::domain_error("mittag_leffler: x must be non-negative");
  if (x == 0.0) return LogScalar::from_log(-log_gamma(p.beta));
  const double lx = std::log(x);
  std::vector<double> terms;
  double lmax = kNegInf;
  for (int k = 0; k < 200000; ++k) {
    double l = k * lx - log_gamma(p.alpha * k + p.beta);
    terms.push_back(l);
    lmax = std::max(lmax, l);
    // Terms are log-concave in k, so the next ratio bounds all later ones.
    double lnext = (k + 1) * lx - log_gamma(p.alpha * (k + 1) + p.beta);
    double r = std::exp(lnext - l);
    if (r < 1.0 && lnext - std::log1p(-r) - lmax < std::log(1e-17)) break;
  }
  return LogScalar::from_log(log_sum_exp(terms));
}

LogScalar mittag_leffler_asymptotic(const MLParams& p, double x) {
  if (!(x > 0.0)) throw std::domain_error("mittag_leffler_asymptotic: x must be positive");
  const double y = std::pow(x, 1.0 / p.alpha);
  const double lead = -std::log(p.alpha) + (1.0 - p.beta) / p.alpha * std::log(x) + y;
  // Subdominant saddles z^{1/alpha} e^{2 pi i m / alpha}, |2 pi m| <= 3 pi alpha / 4.
  Neumaier rel;
  rel.add(1.0);
  const int mmax = static_cast<int>(std::floor(3.0 * p.alpha / 8.0));
  for (int m = 1; m <= mmax; ++m) {
    double th = 2.0 * kPi * m / p.alpha;
    cplx zm = std::polar(y, th);
    cplx w = std::pow(zm / y, 1.0 - p.beta) * std::exp(zm - y);
    rel.add(2.0 * w.real());
  }
  // Algebraic part: -sum_k x^{-k} / Gamma(beta - alpha k).
  for (int k = 1; k <= 6; ++k) {
    double arg = p.beta - p.alpha * k;
    if (arg <= 0.0 && arg == std::floor(arg)) continue;
    int sg = 1;
    double lg = log_abs_gamma(arg, &sg);
    double t = std::exp(-k * std::log(x) - lg - lead);
    rel.add(-sg * t);
  }
  double r = rel.value();
  return {lead + std::log(std::fabs(r)), cplx(r < 0 ? -1.0 : 1.0, 0.0)};
}

LogScalar mittag_leffler(const MLParams& p, double x, double switch_point) {
  if (!(x >= 0.0)) throw std::domain_error("mittag_leffler: x must be non-negative");
  if (x > 0.0 && std::pow(x, 1.0 / p.alpha) >= switch_point) return mittag_leffler_asymptotic(p, x);
  return mittag_leffler_series(p, x);
}

ImagAxisValue mittag_imaginary(double beta, double y) {
  if (!(beta > 0.0)) throw std::domain_error("mittag_imaginary: beta must be positive");
  if (y == 0.0) return {0.0, 0.0, 1};
  const double ly = std::log(std::fabs(y));
  // Peak of k ln|y| - lnGamma(beta k + 1) sits near k = |y|^{1/beta} / beta.
  const double kpk = std::pow(std::fabs(y), 1.0 / beta) / beta;
  const double L = std::max(0.0, kpk * ly - log_gamma(beta * kpk + 1.0));
  static const cplx ipow[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  const int sgn = y < 0 ? -1 : 1;
  CNeumaier acc;
  int k = 0;
  double tail = 0.0;
  for (;; ++k) {
    double l = k * ly - log_gamma(beta * k + 1.0);
    int q = ((sgn * k) % 4 + 4) % 4;
    acc.add(ipow[q] * std::exp(l - L));
    if (k > kpk + 2) {
      double ln = (k + 1) * ly - log_gamma(beta * (k + 1) + 1.0);
      double r = std::exp(ln - l);
      if (r < 1.0) {
        tail = std::exp(ln - L) / (1.0 - r);
        if (tail < 1e-17 * std::abs(acc.value())) break;
      }
    }
    if (k > 10000000) throw std::runtime_error("mittag_imaginary: series did not terminate");
  }
  double a = std::abs(acc.value());
  return {L + std::log(a), tail / a, k + 1};
}

TypeFit mittag_type_imaginary(double beta, const std::vector<double>& y_grid) {
  if (!(beta > 1.0)) throw std::domain_error("mittag_type_imaginary: beta must exceed 1");
  if (y_grid.size() < 3) throw std::invalid_argument("mittag_type_imaginary: need at least 3 grid points");
  for (size_t i = 1; i < y_grid.size(); ++i)
    if (!(y_grid[i] > y_grid[i - 1])) throw std::invalid_argument("mittag_type_imaginary: grid must increase");
  double ymax = std::fabs(y_grid.back());
  if (std::pow(ymax, 1.0 / beta) < 20.0)
    throw std::invalid_argument("mittag_type_imaginary: grid range too short, need max |y|^{1/beta} >= 20");
  TypeFit f{};
  for (double y : y_grid) {
    auto v = mittag_imaginary(beta, y);
    if (v.tail_bound > 1e-12) throw std::runtime_error("mittag_type_imaginary: tail bound not met");
    f.abscissa.push_back(std::pow(std::fabs(y), 1.0 / beta));
    f.log_abs.push_back(v.log_abs);
  }
  const size_t n = f.abscissa.size();
  double mx = 0, my = 0;
  for (size_t i = 0; i < n; ++i) {
    mx += f.abscissa[i];
    my += f.log_abs[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0;
  for (size_t i = 0; i < n; ++i) {
    sxx += (f.abscissa[i] - mx) * (f.abscissa[i] - mx);
    sxy += (f.abscissa[i] - mx) * (f.log_abs[i] - my);
  }
  f.type = sxy / sxx;
  f.intercept = my - f.type * mx;
  double ss = 0;
  for (size_t i = 0; i < n; ++i) {
    double r = f.log_abs[i] - f.intercept - f.type * f.abscissa[i];
    ss += r * r;
  }
  f.rms_residual = std::sqrt(ss / n);
  return f;
}

cplx polylog(double s, cplx zeta) {
  const double az = std::abs(zeta);
  if (!(az < 1.0)) throw std::domain_error("polylog: requires |zeta| < 1");
  if (az == 0.0) return {0.0, 0.0};
  const double tol = az > 0.999 ? 1e-10 : 1e-16;
  const double lz = std::log(az);
  const double th = std::arg(zeta);
  CNeumaier acc;
  for (long n = 1;; ++n) {
    double l = n * lz - s * std::log(static_cast<double>(n));
    cplx t = std::polar(std::exp(l), std::fmod(n * th, 2.0 * kPi));
    acc.add(t);
    // Sup of later term ratios: |zeta| when s >= 0, the current ratio when s < 0.
    double r = az * std::max(1.0, std::pow((n + 1.0) / n, -s));
    if (r < 1.0) {
      double tail = std::exp(l) * r / (1.0 - r);
      if (tail <= tol * std::abs(acc.value())) break;
    }
    if (n > 400000000L) throw std::runtime_error("polylog: too many terms");
  }
  return acc.value();
}

ThetaSum theta_gauss_sum(int n, double a, double b) {
  if (n < 1 || !(a > 0.0)) throw std::domain_error("theta_gauss_sum: need n >= 1, a > 0");
  const double nb = n * b;
  const long k0 = std::lround(nb);
  auto term = [&](long k) {
    double d = (k - nb) / n;
    return std::exp(-n * (a / 2.0) * d * d);
  };
  std::vector<double> up, down;
  double mx = term(k0);
  double last_up = 0, last_dn = 0;
  for (long j = 1;; ++j) {
    double t = term(k0 + j);
    up.push_back(t);
    mx = std::max(mx, t);
    last_up = t;
    if (t < 1e-18 * mx && (k0 + j) > nb) break;
  }
  for (long j = 1;; ++j) {
    double t = term(k0 - j);
    down.push_back(t);
    mx = std::max(mx, t);
    last_dn = t;
    if (t < 1e-18 * mx && (k0 - j) < nb) break;
  }
  // Sum smallest first within each wing, then the center.
  Neumaier acc;
  for (auto it = up.rbegin(); it != up.rend(); ++it) acc.add(*it);
  for (auto it = down.rbegin(); it != down.rend(); ++it) acc.add(*it);
  acc.add(term(k0));
  // Gaussian wings decay faster than geometric with ratio exp(-a/n * j).
  double q = std::exp(-a / (2.0 * n));
  double tb = (last_up + last_dn) * q / (1.0 - q);
  return {acc.value(), std::sqrt(2.0 * n * kPi / a), tb};
}

ThetaGap theta_gauss_gap(int n, double a, double b) {
  if (n < 1 || !(a > 0.0)) throw std::domain_error("theta_gauss_gap: need n >= 1, a > 0");
  const double log_bound = -2.0 * n * kPi * kPi / a;
  const long bits = static_cast<long>(std::ceil(-log_bound / std::log(2.0) * 1.15)) + 192;
  MpPrecision guard(MpPrecision::digits_for_bits(bits));
  const mpreal eps = boost::multiprecision::pow(mpreal(2), -bits);
  const mpreal N(n), A(a), B(b);
  const mpreal nb = N * B;
  const long k0 = std::lround(n * b);
  auto term = [&](long k) {
    mpreal d = (mpreal(k) - nb) / N;
    return mpreal(exp(-N * (A / 2) * d * d));
  };
  mpreal sum = term(k0);
  const mpreal mx = sum;
  for (int dir : {1, -1}) {
    for (long j = 1;; ++j) {
      mpreal t = term(k0 + dir * j);
      sum += t;
      if (t < eps * mx && (dir * (k0 + dir * j - nb)) > 0) break;
    }
  }
  mpreal pred = sqrt(mpreal(2) * N * boost::math::constants::pi<mpreal>() / A);
  mpreal gap = abs(sum / pred - 1);
  ThetaGap g{};
  g.log_bound = log_bound;
  g.precision_bits = bits;
  if (gap == 0) {
    g.log_gap = kNegInf;
    g.constant = 0.0;
  } else {
    g.log_gap = static_cast<double>(log(gap));
    g.constant = std::exp(g.log_gap - log_bound);
  }
  return g;
}

}  // namespace heatflat::numkit

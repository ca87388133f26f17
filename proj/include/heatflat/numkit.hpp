#pragma once

#include <complex>
#include <limits>
#include <stdexcept>
#include <vector>

namespace heatflat::numkit {

using cplx = std::complex<double>;

constexpr double kPi = 3.14159265358979323846;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Value stored as phase * exp(log_mag). Zero is log_mag = -inf.
struct LogScalar {
  double log_mag = kNegInf;
  cplx phase{1.0, 0.0};

  LogScalar() = default;
  LogScalar(double lm, cplx ph) : log_mag(lm), phase(ph) {}

  static LogScalar from_log(double lm, double sign = 1.0) { return {lm, cplx(sign < 0 ? -1.0 : 1.0, 0.0)}; }
  static LogScalar from_double(double x);
  static LogScalar from_complex(cplx z);
  static LogScalar zero() { return {}; }
  static LogScalar one() { return {0.0, cplx(1.0, 0.0)}; }

  bool is_zero() const { return log_mag == kNegInf; }
  double sign() const { return phase.real() < 0 ? -1.0 : 1.0; }
  double to_double() const;
  cplx to_complex() const;

  LogScalar operator-() const { return {log_mag, -phase}; }
  LogScalar conj() const { return {log_mag, std::conj(phase)}; }
  LogScalar pow(double p) const;  // positive real data only
};

LogScalar operator*(const LogScalar& a, const LogScalar& b);
LogScalar operator/(const LogScalar& a, const LogScalar& b);
LogScalar operator+(const LogScalar& a, const LogScalar& b);
LogScalar operator-(const LogScalar& a, const LogScalar& b);

// ln(sum exp(x_i)) with terms accumulated largest first.
double log_sum_exp(std::vector<double> xs);
// Signed/complex sum of LogScalars, largest magnitude first, compensated.
LogScalar log_sum(std::vector<LogScalar> xs);

double log_gamma(double x);
// ln|Gamma(x)| for any non-pole real x, with the sign of Gamma(x).
double log_abs_gamma(double x, int* sign);

struct MLParams {
  double alpha;
  double beta;
  MLParams(double a, double b);
};

constexpr double kMittagSwitch = 35.0;

LogScalar mittag_leffler_series(const MLParams& p, double x);
LogScalar mittag_leffler_asymptotic(const MLParams& p, double x);
// E_{a,b}(x) for x >= 0; asymptotic form once x^{1/alpha} >= switch_point.
LogScalar mittag_leffler(const MLParams& p, double x, double switch_point = kMittagSwitch);

struct ImagAxisValue {
  double log_abs;     // ln|E_beta(iy)|
  double tail_bound;  // bound on |truncated tail| / |E_beta(iy)|
  int terms;
};

// E_beta(iy) = sum (iy)^k / Gamma(beta k + 1)
ImagAxisValue mittag_imaginary(double beta, double y);

struct TypeFit {
  double type;       // slope of ln|E| against |y|^{1/beta}
  double intercept;
  double rms_residual;
  std::vector<double> abscissa;  // |y|^{1/beta}
  std::vector<double> log_abs;
};

TypeFit mittag_type_imaginary(double beta, const std::vector<double>& y_grid);

cplx polylog(double s, cplx zeta);

struct ThetaSum {
  double sum;
  double predicted;
  double tail_bound;
};

// sum_k exp(-n (a/2) (k/n - b)^2) against sqrt(2 n pi / a)
ThetaSum theta_gauss_sum(int n, double a, double b);

struct ThetaGap {
  double log_gap;    // ln|sum/predicted - 1|
  double log_bound;  // -2 n pi^2 / a
  double constant;   // gap / bound
  long precision_bits;
};

// Same sum in MPFR, precision sized so the exponentially small gap is resolved.
ThetaGap theta_gauss_gap(int n, double a, double b);

}  // namespace heatflat::numkit

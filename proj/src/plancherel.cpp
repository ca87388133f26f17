#include "heatflat/plancherel.hpp"

#include <algorithm>

namespace heatflat::plancherel {

using numkit::log_gamma;
using numkit::log_sum_exp;

VarpiParams varpi_params(const GevreyParams& p) {
  if (!(p.gamma < 0.0)) throw std::domain_error("varpi: requires gamma < 0");
  if (p.R != 1.0) throw std::domain_error("varpi: requires R = 1 (rescale first)");
  return {2.0 * p.s, -p.gamma * p.s};
}

std::vector<LogScalar> varpi_coeffs(const GevreyParams& p, int N) {
  auto v = varpi_params(p);
  std::vector<LogScalar> a;
  a.reserve(N + 1);
  for (int k = 0; k <= N; ++k) a.push_back(LogScalar::from_log(-log_gamma(v.alpha * k + v.beta + 1.0)));
  return a;
}

double log_varpi(const GevreyParams& p, double xi) {
  auto v = varpi_params(p);
  if (xi == 0.0) return -log_gamma(v.beta + 1.0);
  const double l2 = 2.0 * std::log(std::fabs(xi));
  std::vector<double> terms;
  double lmax = numkit::kNegInf;
  for (int k = 0;; ++k) {
    double l = k * l2 - log_gamma(v.alpha * k + v.beta + 1.0);
    terms.push_back(l);
    lmax = std::max(lmax, l);
    double ln = (k + 1) * l2 - log_gamma(v.alpha * (k + 1) + v.beta + 1.0);
    double r = std::exp(ln - l);
    if (r < 1.0 && ln - std::log1p(-r) - lmax < std::log(1e-17)) break;
    if (k > 10000000) throw std::runtime_error("log_varpi: series did not terminate");
  }
  return log_sum_exp(std::move(terms));
}

std::vector<LogScalar> convolution_An(const GevreyParams& p, int N, int max_n) {
  if (N < 0) throw std::invalid_argument("convolution_An: N must be non-negative");
  if (N > max_n) throw std::invalid_argument("convolution_An: N exceeds the configured cap");
  auto v = varpi_params(p);
  std::vector<double> la(N + 1);
  for (int k = 0; k <= N; ++k) la[k] = -log_gamma(v.alpha * k + v.beta + 1.0);
  std::vector<LogScalar> A;
  A.reserve(N + 1);
  std::vector<double> row;
  for (int n = 0; n <= N; ++n) {
    row.resize(n + 1);
    for (int k = 0; k <= n; ++k) row[k] = la[k] + la[n - k];
    A.push_back(LogScalar::from_log(log_sum_exp(row)));
  }
  return A;
}

double log_An_model(const VarpiParams& v, int n) {
  double an = v.alpha * n;
  return an * std::log(2.0 * std::exp(1.0) / an) - (2.0 * v.beta + 0.5) * std::log(static_cast<double>(n));
}

BridgeReport an_vs_Mn_bridge(const GevreyParams& p, int N) {
  auto A = convolution_An(p, N);
  BridgeReport r;
  for (int n = 0; n <= N; ++n) r.gap.push_back(gevrey::weight_Mn(p, n).log_mag + 0.5 * A[n].log_mag);
  std::vector<double> sorted = r.gap;
  std::sort(sorted.begin(), sorted.end());
  size_t m = sorted.size();
  r.median = m % 2 ? sorted[m / 2] : 0.5 * (sorted[m / 2 - 1] + sorted[m / 2]);
  r.width = 0.0;
  for (double g : r.gap) r.width = std::max(r.width, std::fabs(g - r.median));
  return r;
}

double log_h(double alpha, double x) {
  if (x < 0.0 || x > 1.0) throw std::domain_error("log_h: x outside [0, 1]");
  double a = x > 0.0 ? x * std::log(x) : 0.0;
  double b = x < 1.0 ? (1.0 - x) * std::log1p(-x) : 0.0;
  return alpha * (a + b);
}

double log_h_second(double alpha, double x) { return alpha / (x * (1.0 - x)); }

double g_n(double beta, long n, double x) {
  double i = (1.0 / n + x) * (1.0 / n + 1.0 - x);
  return std::pow(i, -beta - 0.5);
}

RemainderSplit laplace_remainder_split(const VarpiParams& v, long n, double mu) {
  if (!(mu > 0.25 && mu < 0.5)) throw std::domain_error("laplace_remainder_split: mu must lie in (1/4, 1/2)");
  if (n < 2) throw std::domain_error("laplace_remainder_split: n must be at least 2");
  RemainderSplit r{};
  r.eps = std::pow(static_cast<double>(n), -mu);
  r.g_half = g_n(v.beta, n, 0.5);
  std::vector<double> near, far;
  for (long k = 0; k <= n; ++k) {
    double x = static_cast<double>(k) / n;
    double d = std::fabs(g_n(v.beta, n, x) - r.g_half);
    if (d == 0.0) continue;
    double l = std::log(d) - n * log_h(v.alpha, x);
    (std::fabs(x - 0.5) <= r.eps ? near : far).push_back(l);
  }
  const double norm = v.alpha * n * std::log(2.0) - 0.5 * std::log(static_cast<double>(n));
  const double ln = std::log(static_cast<double>(n));
  r.near = near.empty() ? 0.0 : std::exp(log_sum_exp(near) - ln - norm);
  r.far = far.empty() ? 0.0 : std::exp(log_sum_exp(far) - ln - norm);
  return r;
}

std::vector<NamedSignal> ratio_family() {
  using namespace gevrey;
  const double a = -9.0, b = 9.0;
  const int n = 3601;
  auto g1 = gaussian(1.0, 0.0, a, b, n);
  auto g2 = gaussian(0.5, 0.0, a, b, n);
  auto g3 = gaussian(0.7, 1.0, a, b, n);
  auto b1 = compact_bump(1.5, -1.0, 1.0, 1.0, a, b, n);
  auto b2 = compact_bump(1.5, 0.5, 2.5, 1.0, a, b, n);
  auto b3 = compact_bump(2.0, -2.0, 0.0, 1.0, a, b, n);
  return {{"gaussian(1,0)", g1},
          {"gaussian(0.5,0)", g2},
          {"gaussian(0.7,1)", g3},
          {"bump(1.5,[-1,1])", b1},
          {"bump(1.5,[0.5,2.5])", b2},
          {"bump(2,[-2,0])", b3},
          {"gaussian(1,0)+gaussian(0.7,1)", sum(g1, g3)},
          {"bump(1.5,[-1,1])+bump(1.5,[0.5,2.5])", sum(b1, b2)},
          {"gaussian(0.5,0)+bump(2,[-2,0])", sum(g2, b3)}};
}

std::vector<RatioRow> norm_ratios(const std::vector<NamedSignal>& family, const GevreyParams& p, int N) {
  std::vector<RatioRow> rows;
  for (const auto& ns : family) {
    RatioRow r;
    r.name = ns.name;
    r.fourier = gevrey::weighted_fourier_norm(ns.signal, p);
    auto t = gevrey::gevrey_norm_time(ns.signal, p, N);
    r.time = t.partial.back();
    r.converged = t.converged;
    r.ratio = r.fourier / r.time;
    rows.push_back(r);
  }
  return rows;
}

double ratio_band(const std::vector<RatioRow>& rows) {
  double c = 1.0;
  for (const auto& r : rows) c = std::max({c, r.ratio, 1.0 / r.ratio});
  return c;
}

}  // namespace heatflat::plancherel

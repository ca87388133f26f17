#pragma once

#include <complex>
#include <optional>
#include <string>
#include <vector>

#include "heatflat/numkit.hpp"
#include "json.hpp"

namespace heatflat::holo {

using cplx = std::complex<double>;
using numkit::LogScalar;

// The tilted square {|Re z| + |Im z| < 1} and its exhaustion (1 - eps) * Omega.
struct OmegaDomain {
  static constexpr double area = 2.0;
  static bool contains(cplx z, double eps = 0.0) { return std::fabs(z.real()) + std::fabs(z.imag()) < 1.0 - eps; }
  static std::vector<double> default_margins() { return {0.2, 0.1, 0.05, 0.025, 0.0125}; }
  // 0.2 * 2^{-i}, i = 0..9
  static std::vector<double> fine_margins();
};

enum class Parity { Even, Odd };

// a_k for k = 0..N-1. Even: sum a_k z^{2k}/(2k)!; odd: sum a_k z^{2k+1}/(2k+1)!.
struct CoeffSeq {
  std::vector<LogScalar> a;
  Parity parity = Parity::Even;

  bool all_zero() const;
  CoeffSeq shifted(int p) const;  // (a_{k+p})
  static CoeffSeq from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

// Named generators, N terms.
CoeffSeq seq_factorial(int N);                // 4^n b_n, b_0 = 1, b_{n+1} = n!(n+1)!
CoeffSeq seq_geometric(double c, int N);      // (2k)! c^k
CoeffSeq seq_polylog(double s, int N);        // (2k)! k^{-s}, a_0 = 0
CoeffSeq seq_edge_polylog(int N);             // (2k)! 2^k i^k k^{-1/2}, a_0 = 0
// "factorial", "geometric(c)", "polylog(s)", "edge_polylog"
CoeffSeq seq_from_name(const std::string& name, int N);

// Power series g(x) = sum c_k x^k in a normalized variable, with direct
// summation inside its disc and robust Pade continuation outside.
class SeriesEvaluator {
 public:
  SeriesEvaluator(const CoeffSeq& c, double R_scale, int pade_degree = 40);

  struct Value {
    cplx f;
    double tail;     // last-term proxy (direct) or agreement of two Pade orders
    bool direct;
    bool diverging;  // terms not decreasing at the cutoff
  };
  Value eval(cplx z) const;
  cplx operator()(cplx z) const { return eval(z).f; }

  double log_radius_w() const { return log_rho_; }        // ln of the radius in w = 2 R^2 z^2
  std::optional<cplx> dominant_singularity() const;        // in z (one of the pair +-z)
  std::vector<cplx> stable_poles() const;                  // Pade poles in z, both orders agreeing
  double pade_check() const { return pade_check_; }        // max |pade - direct| / max|direct| on |x| = 0.8

 private:
  cplx w_of(cplx z) const;
  cplx eval_direct(cplx x, double* tail, bool* ok, bool* diverging) const;
  cplx eval_pade(cplx x, int which) const;

  Parity parity_;
  double R_;
  bool zero_ = false;
  double log_rho_ = 0.0;        // normalization: x = w / rho
  std::vector<cplx> c_;         // c_k rho^k
  std::vector<double> suffix_;  // max_{j >= k} |c_j rho^j|
  std::vector<cplx> pa_[2], pb_[2];
  std::optional<cplx> sing_w_;
  double pade_check_ = 0.0;
};

struct PadeResult {
  std::vector<cplx> num, den;  // den[0] = 1
};
// Robust Pade approximant of type [m/n] from coefficients c_0..c_{m+n}, SVD based.
PadeResult robust_pade(const std::vector<cplx>& c, int m, int n, double tol = 1e-13);
std::vector<cplx> polynomial_roots(const std::vector<cplx>& p);

struct EvalResult {
  cplx value;
  double tail;
  bool diverging;
  bool direct;
};
EvalResult eval_series(const CoeffSeq& c, cplx z, double R_scale);

enum class Membership { Convergent, Divergent, Undecided };
const char* to_string(Membership m);

struct BergmanReport {
  std::vector<double> margins;
  std::vector<double> norm2;       // integral of |f|^2 over (1 - eps) Omega; NaN after an early verdict
  std::vector<double> quad_error;
  std::vector<int> evaluations;
  Membership verdict = Membership::Undecided;
  double slope = 0.0;              // log-log slope of increments against 1/eps
  double last_ratio = 0.0;         // last increment ratio
  std::string reason;
  std::optional<cplx> singularity;
  double pade_check = 0.0;
  nlohmann::json to_json() const;
};

struct BergmanOptions {
  double rel_tol = 1e-10;
  long max_evals = 300000;
  double diverge_slope = 0.5;
  double converge_ratio = 0.7;
};

BergmanReport bergman_norm_estimate(const CoeffSeq& c, double R_scale, const std::vector<double>& margins,
                                    const BergmanOptions& opt = {});

struct RadiusReport {
  double lo = 0.0, hi = 0.0;
  bool unbounded = false;
  bool widened = false;  // an undecided classification stopped the bisection early
  std::vector<std::pair<double, Membership>> probes;
  nlohmann::json to_json() const;
};

RadiusReport radius_Ra(const CoeffSeq& c, double tol = 0.02, const std::vector<double>& margins = OmegaDomain::fine_margins());

struct CounterexampleReport {
  double residual_slope;            // fit of ln(a_n/(2n)! - sqrt(pi/n)) against ln n
  double residual_intercept;
  std::vector<double> q;            // a_n sqrt(1+n)/(2n)!, n = 1..N
  double q_max;
  BergmanReport function_norm;      // sum a_n z^{2n}/(2n)!
  BergmanReport derivative_norm;    // its derivative, the H^1 part
  Membership verdict;               // from the derivative
  nlohmann::json to_json() const;
};

CounterexampleReport counterexample_factorial(int N);

struct LossRow {
  double s, rho, Gamma, rho_mrr, diff;  // diff = rho_mrr - rho
  int sign;
  double bridge_gap;                    // |rho - Gamma^{-1/s}|
};
std::vector<LossRow> loss_factors(const std::vector<double>& s_grid);
// Root of cos(pi/2s) = exp(-1/(e s)) in (3, 4).
double loss_crossover(double tol = 1e-10);

BergmanReport borel_range_test(const CoeffSeq& c, int p, Parity parity, double R,
                               const std::vector<double>& margins = OmegaDomain::default_margins());

}  // namespace heatflat::holo

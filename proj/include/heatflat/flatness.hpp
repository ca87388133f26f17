#pragma once

#include <string>
#include <vector>

#include "heatflat/gevrey.hpp"
#include "heatflat/heatsim.hpp"
#include "heatflat/holo.hpp"

namespace heatflat::flatness {

constexpr int kDefaultK = 25;

struct SeriesValue {
  double value = 0.0;
  double tail = 0.0;       // magnitude of the last term
  bool diverging = false;  // terms not decreasing at the cutoff
};

// z(t, x) = sum_{k<=K} y^{(k)}(t) x^{2k}/(2k)!
SeriesValue flat_state(const gevrey::DerivsFn& y, double t, double x, int K = kDefaultK);
// u(t) = sum_{k=1}^{K} y^{(k)}(t)/(2k-1)!
SeriesValue flat_control(const gevrey::DerivsFn& y, double t, int K = kDefaultK);
// u and its first two derivatives, for the simulator.
gevrey::DerivsFn control_provider(const gevrey::DerivsFn& y, int K = kDefaultK);

struct TrackingResult {
  std::vector<double> t, y_target, y_sim, u;
  double max_error = 0.0;
  double max_tail = 0.0;     // largest control tail proxy on the grid
  bool diverging = false;    // control series diverging somewhere on the grid
  bool sim_tail_flag = false;
  std::string to_csv() const;  // t,y_target,y_sim,u
};

// Requires y flat at 0 and defined on [0, T]; simulates with quintic Hermite input.
TrackingResult tracking_experiment(const gevrey::Signal& y, const heatsim::SimConfig& cfg, int K = kDefaultK);

struct RefinementStep {
  int K;
  double dt;
  double max_error;
};
// levels of simultaneous refinement K -> 2K, dt -> dt/2
std::vector<RefinementStep> tracking_refinement(const gevrey::Signal& y, const heatsim::SimConfig& cfg, int K, int levels);

// Partial sums of sum_k (||y^{(k+1)}|| / [(2k)! 2^k (1+k)^{3/4}])^2.
gevrey::NormSeries check_trackable_infinite(const gevrey::Signal& y, int N);

struct FiniteReport {
  gevrey::NormSeries regularity;        // same series on the signal interval
  holo::BergmanReport terminal;         // sum y^{(k)}(T) z^{2k}/(2k)!
  holo::BergmanReport terminal_deriv;   // its z-derivative
  holo::Membership membership = holo::Membership::Undecided;
  nlohmann::json to_json() const;
};

// Terminal state given directly by its coefficients a_k = y^{(k)}(T).
FiniteReport check_terminal_state(const holo::CoeffSeq& a);
FiniteReport check_trackable_finite(const gevrey::Signal& y, int N, int K);

}  // namespace heatflat::flatness

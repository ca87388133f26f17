#pragma once

#include <boost/multiprecision/mpfr.hpp>

namespace heatflat {

using mpreal = boost::multiprecision::mpfr_float;

// Boost 1.74 keeps the variable MPFR precision in a process-wide default,
// so extended-precision paths are serialized through this guard.
class MpPrecision {
 public:
  explicit MpPrecision(unsigned digits10) : saved_(mpreal::default_precision()) {
    mpreal::default_precision(digits10);
  }
  ~MpPrecision() { mpreal::default_precision(saved_); }
  MpPrecision(const MpPrecision&) = delete;
  MpPrecision& operator=(const MpPrecision&) = delete;

  static unsigned digits_for_bits(long bits) { return static_cast<unsigned>(bits * 0.30103) + 10; }

 private:
  unsigned saved_;
};

}  // namespace heatflat

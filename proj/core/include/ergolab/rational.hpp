#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <cstdint>
#include <string>

namespace ergolab {

// Exact integer and rational types. Cardinalities of the interval sets used
// by the covering suite exceed 64 bits by a wide margin, so everything that
// certifies an inequality runs on these. Floating point is confined to the
// Monte Carlo estimators.
using Int = boost::multiprecision::cpp_int;
using Rat = boost::multiprecision::cpp_rational;

inline double to_double(const Rat& r) { return r.convert_to<double>(); }
inline double to_double(const Int& n) { return n.convert_to<double>(); }

inline Int ceil_div(const Int& a, const Int& b) {
  Int q = a / b, r = a % b;
  if (r != 0 && ((a < 0) == (b < 0))) ++q;
  return q;
}

// quota for an eps-disjoint witness: ceil((1-eps)*n)
inline Int witness_quota(const Int& n, const Rat& eps) {
  Rat need = (Rat(1) - eps) * n;
  return ceil_div(numerator(need), denominator(need));
}

// "p/q" (or "p" when integral)
inline std::string rat_str(const Rat& r) {
  if (denominator(r) == 1) return numerator(r).str();
  return numerator(r).str() + "/" + denominator(r).str();
}

}  // namespace ergolab

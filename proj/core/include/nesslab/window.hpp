#pragma once

#include <functional>
#include <string_view>

namespace nesslab {

/// Test function supported on [-T, T].
struct WindowFunction {
  enum class Kind { hann, truncated_gaussian };

  Kind kind = Kind::hann;
  double T = 2.0;
  double sigma = 0.0;  // gaussian width; <= 0 selects T / 3

  void validate() const;
  double value(double t) const;
  /// (1/sqrt(2 pi)) int f(t) e^{i eps t} dt; real because f is even.
  double transform(double eps) const;
  double width() const { return sigma > 0.0 ? sigma : T / 3.0; }
};

std::string_view to_string(WindowFunction::Kind k);
WindowFunction::Kind window_kind_from_string(std::string_view s);

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;  // difference between the last two refinements
  int panels = 0;
};

/// Composite 16-point Gauss-Legendre on [a, b], starting from at least four
/// panels per unit length and doubling until successive results agree to
/// `tol` (absolute).
QuadratureResult integrate(const std::function<double(double)>& f, double a, double b, double tol = 1e-8,
                           int max_doublings = 12);

}  // namespace nesslab

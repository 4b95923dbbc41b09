#include "nesslab/window.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include <boost/math/quadrature/gauss.hpp>

#include "nesslab/types.hpp"

namespace nesslab {

namespace {

double sinc(double x) {
  if (std::abs(x) < 1e-4) return 1.0 - x * x / 6.0;
  return std::sin(x) / x;
}

}  // namespace

void WindowFunction::validate() const {
  if (!(T > 0.0) || !std::isfinite(T)) throw PreconditionError("window half-width must be positive");
  if (kind == Kind::truncated_gaussian && !(width() > 0.0)) throw PreconditionError("gaussian width must be positive");
}

double WindowFunction::value(double t) const {
  if (std::abs(t) > T) return 0.0;
  switch (kind) {
    case Kind::hann: {
      const double c = std::cos(std::numbers::pi * t / (2.0 * T));
      return c * c;
    }
    case Kind::truncated_gaussian: {
      const double s = width();
      return std::exp(-t * t / (2.0 * s * s));
    }
  }
  return 0.0;
}

double WindowFunction::transform(double eps) const {
  validate();
  if (kind == Kind::hann) {
    const double a = std::numbers::pi / T;
    const double full = T * (sinc(eps * T) + 0.5 * sinc((eps + a) * T) + 0.5 * sinc((eps - a) * T));
    return full / std::sqrt(2.0 * std::numbers::pi);
  }
  // even integrand: 2 int_0^T f(t) cos(eps t) dt, panels scaled with |eps|
  const auto q = integrate([&](double t) { return value(t) * std::cos(eps * t); }, 0.0, T, 1e-13);
  return 2.0 * q.value / std::sqrt(2.0 * std::numbers::pi);
}

std::string_view to_string(WindowFunction::Kind k) {
  return k == WindowFunction::Kind::hann ? "hann" : "truncated_gaussian";
}

WindowFunction::Kind window_kind_from_string(std::string_view s) {
  if (s == "hann") return WindowFunction::Kind::hann;
  if (s == "truncated_gaussian") return WindowFunction::Kind::truncated_gaussian;
  throw ConfigError("unknown window kind '" + std::string(s) + "'");
}

QuadratureResult integrate(const std::function<double(double)>& f, double a, double b, double tol, int max_doublings) {
  using gauss = boost::math::quadrature::gauss<double, 16>;
  if (!(b > a)) return {0.0, 0.0, 0};
  auto composite = [&](int panels) {
    const double h = (b - a) / panels;
    double acc = 0.0;
    for (int p = 0; p < panels; ++p) acc += gauss::integrate(f, a + p * h, a + (p + 1) * h);
    return acc;
  };
  int panels = std::max(1, static_cast<int>(std::ceil(4.0 * (b - a))));
  double prev = composite(panels);
  for (int k = 0; k < max_doublings; ++k) {
    panels *= 2;
    const double next = composite(panels);
    const double err = std::abs(next - prev);
    if (err <= tol) return {next, err, panels};
    prev = next;
  }
  throw NumericalError("quadrature did not reach the requested tolerance");
}

}  // namespace nesslab

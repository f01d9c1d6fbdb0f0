#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

#include "catk/errors.hpp"

namespace catk {

/// Parametric order-placement distribution with an evaluable CDF, a
/// quantile function for inverse-CDF sampling, and a power-law tail
/// T(M) = (M / x_min)^(-a) defined for M >= x_min.
///
/// Families:
///   pareto(a, x_min): support [x_min, inf), survival equal to T everywhere;
///   lomax(a, x_min):  support [0, inf), smooth body, survival (1 + M/x_min)^(-a)
///                     asymptotically equivalent to T;
///   point(v):         degenerate point mass (no tail; tail() is a domain error).
class PlacementModel {
 public:
  enum class Family { Pareto, Lomax, Point };

  static PlacementModel pareto(double exponent, double scale) {
    require_positive(exponent, scale);
    return PlacementModel(Family::Pareto, exponent, scale);
  }
  static PlacementModel lomax(double exponent, double scale) {
    require_positive(exponent, scale);
    return PlacementModel(Family::Lomax, exponent, scale);
  }
  static PlacementModel point(double value) { return PlacementModel(Family::Point, 0.0, value); }

  double cdf(double x) const {
    switch (family_) {
      case Family::Pareto:
        return x < xmin_ ? 0.0 : 1.0 - std::pow(x / xmin_, -a_);
      case Family::Lomax:
        return x < 0.0 ? 0.0 : 1.0 - std::pow(1.0 + x / xmin_, -a_);
      case Family::Point:
        return x >= xmin_ ? 1.0 : 0.0;
    }
    return 0.0;
  }

  /// Inverse CDF; u in [0, 1).
  double quantile(double u) const {
    if (u < 0.0 || u >= 1.0) throw std::domain_error("quantile: u must be in [0, 1)");
    switch (family_) {
      case Family::Pareto:
        return xmin_ * std::pow(1.0 - u, -1.0 / a_);
      case Family::Lomax:
        return xmin_ * (std::pow(1.0 - u, -1.0 / a_) - 1.0);
      case Family::Point:
        return xmin_;
    }
    return 0.0;
  }

  /// Tail function T(M) = (M / x_min)^(-a); only defined from the tail
  /// onset upward.
  double tail(double m) const {
    if (family_ == Family::Point) throw std::domain_error("tail: point mass has no power tail");
    if (m < xmin_) throw std::domain_error("tail: M below the tail onset x_min");
    return std::pow(m / xmin_, -a_);
  }

  Family family() const { return family_; }
  double tail_exponent() const {
    if (family_ == Family::Point) throw std::domain_error("tail_exponent: point mass has no power tail");
    return a_;
  }
  double tail_scale() const { return xmin_; }

 private:
  PlacementModel(Family family, double a, double xmin) : family_(family), a_(a), xmin_(xmin) {}

  static void require_positive(double exponent, double scale) {
    if (!(exponent > 0.0)) throw std::domain_error("placement: tail exponent must be positive");
    if (!(scale > 0.0)) throw std::domain_error("placement: tail scale must be positive");
  }

  Family family_;
  double a_;
  double xmin_;  // doubles as the point value for Family::Point
};

}  // namespace catk

#pragma once

#include <stdexcept>
#include <string>

namespace catk {

/// Base class for all toolkit errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// The auction has no finite clearing interval (imbalance outside the
/// admissible range, or a book side is effectively empty).
struct FailedAuction : Error {
  using Error::Error;
};

/// A fit window resolved to fewer points than the minimum required.
struct InsufficientTailData : Error {
  using Error::Error;
};

/// A log-scale operation was requested on non-positive values.
struct NonPositiveValues : Error {
  using Error::Error;
};

/// A sample that must have positive dispersion is constant.
struct ZeroVariance : Error {
  using Error::Error;
};

/// Not enough observations to run an estimator.
struct InsufficientData : Error {
  using Error::Error;
};

/// Simulation configuration or sampling failure (e.g. resampling budget
/// exhausted because the counts pmf is concentrated on the diagonal).
struct SimulationError : Error {
  using Error::Error;
};

/// Malformed or inconsistent input files.
struct DataFormatError : Error {
  using Error::Error;
};

/// The reference-price window contains no trades.
struct NoTradesInWindow : Error {
  using Error::Error;
};

}  // namespace catk

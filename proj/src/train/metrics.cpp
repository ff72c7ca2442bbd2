// SPDX-License-Identifier: Apache-2.0
#include "aesmpn/train/metrics.hpp"

#include <cmath>

#include "aesmpn/numerics/error.hpp"

namespace aesmpn::train {
namespace {

void check_lengths(std::span<const double> targets, std::span<const double> preds, const char* metric) {
  if (targets.size() != preds.size()) {
    throw DimensionError(std::string(metric) + ": " + std::to_string(targets.size()) + " targets vs " +
                         std::to_string(preds.size()) + " predictions");
  }
  if (targets.empty()) throw ContractError(std::string(metric) + " of empty vectors");
}

template <typename Term>
double mean_of(std::span<const double> targets, std::span<const double> preds, Term term) {
  double s = 0.0;
  for (std::size_t i = 0; i < targets.size(); ++i) s += term(targets[i], preds[i]);
  return s / static_cast<double>(targets.size());
}

}  // namespace

double mape(std::span<const double> targets, std::span<const double> preds) {
  check_lengths(targets, preds, "mape");
  for (double y : targets) {
    if (y == 0.0) throw ContractError("mape with a zero target");
  }
  return 100.0 * mean_of(targets, preds, [](double y, double p) { return std::fabs(y - p) / std::fabs(y); });
}

double mae(std::span<const double> targets, std::span<const double> preds) {
  check_lengths(targets, preds, "mae");
  return mean_of(targets, preds, [](double y, double p) { return std::fabs(y - p); });
}

double mse(std::span<const double> targets, std::span<const double> preds) {
  check_lengths(targets, preds, "mse");
  return mean_of(targets, preds, [](double y, double p) { return (y - p) * (y - p); });
}

double msle(std::span<const double> targets, std::span<const double> preds) {
  check_lengths(targets, preds, "msle");
  for (std::size_t i = 0; i < targets.size(); ++i) {
    if (!(targets[i] > -1.0) || !(preds[i] > -1.0)) throw ContractError("msle needs values > -1");
  }
  return mean_of(targets, preds, [](double y, double p) {
    const double d = std::log1p(y) - std::log1p(p);
    return d * d;
  });
}

MetricsReport compute_metrics(std::string split, std::span<const double> targets, std::span<const double> preds) {
  return MetricsReport{std::move(split), mape(targets, preds), mae(targets, preds), mse(targets, preds),
                       msle(targets, preds)};
}

}  // namespace aesmpn::train

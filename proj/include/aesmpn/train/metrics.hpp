// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <string>

namespace aesmpn::train {

/// 100 * mean(|y - yhat| / |y|). Targets must be nonzero.
double mape(std::span<const double> targets, std::span<const double> preds);
double mae(std::span<const double> targets, std::span<const double> preds);
double mse(std::span<const double> targets, std::span<const double> preds);
/// mean((log(1+y) - log(1+yhat))^2); all values must exceed -1.
double msle(std::span<const double> targets, std::span<const double> preds);

struct MetricsReport {
  std::string split;
  double mape_pct = 0.0;
  double mae = 0.0;
  double mse = 0.0;
  double msle = 0.0;
};

MetricsReport compute_metrics(std::string split, std::span<const double> targets, std::span<const double> preds);

}  // namespace aesmpn::train

// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace aesmpn::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;    // bad flags, invalid config or inputs
inline constexpr int kExitRuntime = 2;  // numeric failure, infeasible generation, I/O

/// Runs `gen | train | eval | predict | gradcheck`. `args` excludes the
/// program name. Progress goes to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Header of metrics.csv, one row per model.
inline constexpr const char* kMetricsHeader = "model,train_mape,val_mape,test_mape,test_mae,test_mse,test_msle";
/// Header of each model's loss.csv.
inline constexpr const char* kLossHeader = "epoch,train_mape,val_mape";
/// Header of predictions.csv.
inline constexpr const char* kPredictionsHeader = "sample_id,flow_id,predicted_delay_s";

}  // namespace aesmpn::cli

// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "rorecomp/trainer.hpp"

namespace rorecomp {

nlohmann::json step_metrics_to_json(const StepMetrics& m);
StepMetrics step_metrics_from_json(const nlohmann::json& j);

nlohmann::json config_to_json(const RunConfig& cfg);
nlohmann::json response_to_json(const Response& r);

nlohmann::json comparison_to_json(const ComparisonReport& report);
nlohmann::json sweep_to_json(std::span<const AlphaSweepRow> rows);

// Writes metrics.jsonl (one StepMetrics object per line), metrics.csv (the
// same columns) and summary.json (config echo, final summary, pass@k table)
// into out_dir. Content carries no timestamps: identical runs produce
// byte-identical files.
void emit_metrics(const RunReport& report, const std::filesystem::path& out_dir);

std::vector<StepMetrics> read_metrics_jsonl(const std::filesystem::path& path);

void write_buffer_jsonl(std::span<const Response> responses,
                        const std::filesystem::path& path);

} // namespace rorecomp

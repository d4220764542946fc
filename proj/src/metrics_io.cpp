// SPDX-License-Identifier: Apache-2.0
#include "rorecomp/metrics_io.hpp"

#include <fstream>
#include <stdexcept>

namespace rorecomp {

using nlohmann::json;

json step_metrics_to_json(const StepMetrics& m) {
    return json{{"step", m.step},
                {"mean_reward", m.mean_reward},
                {"mean_cost", m.mean_cost},
                {"p_comp", m.p_comp},
                {"n_priority_items", m.n_priority_items},
                {"n_comp_items", m.n_comp_items},
                {"buffer_size", m.buffer_size},
                {"did_comp_update", m.did_comp_update}};
}

StepMetrics step_metrics_from_json(const json& j) {
    StepMetrics m;
    m.step = j.at("step").get<long>();
    m.mean_reward = j.at("mean_reward").get<double>();
    m.mean_cost = j.at("mean_cost").get<double>();
    m.p_comp = j.at("p_comp").get<double>();
    m.n_priority_items = j.at("n_priority_items").get<long>();
    m.n_comp_items = j.at("n_comp_items").get<long>();
    m.buffer_size = j.at("buffer_size").get<long>();
    m.did_comp_update = j.at("did_comp_update").get<bool>();
    return m;
}

json config_to_json(const RunConfig& cfg) {
    return json{
        {"seed", cfg.seed},
        {"environment", env_name(cfg.environment)},
        {"total_steps", cfg.total_steps},
        {"prompts_per_step", cfg.prompts_per_step},
        {"workers", cfg.workers},
        {"temperature", cfg.sampling.temperature},
        {"max_tokens", cfg.sampling.max_tokens},
        {"group_size", cfg.sampling.group_size},
        {"advantage_mode", advantage_mode_name(cfg.optimizer.advantage_mode.kind)},
        {"gamma", cfg.optimizer.advantage_mode.gamma},
        {"lambda", cfg.optimizer.advantage_mode.lambda},
        {"clip_epsilon", cfg.optimizer.clip_epsilon},
        {"learning_rate", cfg.optimizer.learning_rate},
        {"kl_coef", cfg.optimizer.kl_coef},
        {"std_floor", cfg.optimizer.std_floor},
        {"critic_learning_rate", cfg.critic_learning_rate},
        {"recomposition_enabled", cfg.recomposition.enabled},
        {"alpha", cfg.recomposition.alpha},
        {"p_lower", cfg.recomposition.p_lower},
        {"comp_batch_size", cfg.recomposition.comp_batch_size},
        {"buffer_capacity", cfg.recomposition.buffer_capacity},
        {"retain_on_skip", cfg.recomposition.retain_on_skip},
        {"comp_enabled", cfg.recomposition.comp_enabled},
        {"comp_on_policy_loss", cfg.recomposition.comp_on_policy_loss},
        {"recompute_comp_advantages", cfg.recomposition.recompute_comp_advantages},
        {"filter_zero_variance_groups",
         cfg.recomposition.filter_zero_variance_groups},
        {"reward_mode", reward_mode_name(cfg.reward_mode)},
        {"shaping", shaping_name(cfg.shaping)},
        {"truncation_limit", cfg.truncation_limit},
        {"penalty_weight", cfg.penalty_weight},
        {"tau_correct", cfg.tau_correct},
        {"vocab_size", cfg.vocab_size},
        {"pattern_length", cfg.pattern_length},
        {"max_turns", cfg.max_turns},
        {"eval_questions", cfg.eval_questions},
        {"eval_samples", cfg.eval_samples},
        {"summary_window", cfg.summary_window},
        {"out_dir", cfg.out_dir}};
}

json response_to_json(const Response& r) {
    return json{{"question_id", r.question_id},
                {"tokens", r.tokens},
                {"states", r.states},
                {"cost", r.cost},
                {"reward", r.reward},
                {"correct", r.correct},
                {"behavior_logprobs", r.behavior_logprobs},
                {"advantage", r.advantage},
                {"born_step", r.born_step},
                {"sample_index", r.sample_index}};
}

json comparison_to_json(const ComparisonReport& report) {
    auto arm = [](const ArmSummary& s) {
        return json{{"final_mean_cost", s.cost_mean},
                    {"final_mean_cost_std", s.cost_std},
                    {"final_mean_reward", s.reward_mean},
                    {"final_mean_reward_std", s.reward_std}};
    };
    return json{{"arm_a", arm(report.arm_a)},
                {"arm_b", arm(report.arm_b)},
                {"reduction_pct_mean", report.reduction_pct_mean},
                {"reduction_pct_std", report.reduction_pct_std},
                {"reward_diff_mean", report.reward_diff_mean},
                {"seeds", report.seeds}};
}

json sweep_to_json(std::span<const AlphaSweepRow> rows) {
    json out = json::array();
    for (const AlphaSweepRow& row : rows) {
        out.push_back(json{{"alpha", row.alpha},
                           {"final_mean_cost", row.cost_mean},
                           {"final_mean_cost_std", row.cost_std},
                           {"final_mean_reward", row.reward_mean},
                           {"final_mean_reward_std", row.reward_std}});
    }
    return out;
}

namespace {

// One serializer for every numeric cell keeps the CSV and JSONL readings of
// the same value identical.
std::string cell(const json& v) { return v.dump(); }

} // namespace

void emit_metrics(const RunReport& report, const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);

    {
        std::ofstream jsonl(out_dir / "metrics.jsonl", std::ios::binary);
        if (!jsonl) {
            throw std::runtime_error("cannot write metrics.jsonl");
        }
        for (const StepMetrics& m : report.series) {
            jsonl << step_metrics_to_json(m).dump() << '\n';
        }
    }
    {
        std::ofstream csv(out_dir / "metrics.csv", std::ios::binary);
        if (!csv) {
            throw std::runtime_error("cannot write metrics.csv");
        }
        csv << "step,mean_reward,mean_cost,p_comp,n_priority_items,"
               "n_comp_items,buffer_size,did_comp_update\n";
        for (const StepMetrics& m : report.series) {
            csv << m.step << ',' << cell(json(m.mean_reward)) << ','
                << cell(json(m.mean_cost)) << ',' << cell(json(m.p_comp)) << ','
                << m.n_priority_items << ',' << m.n_comp_items << ','
                << m.buffer_size << ',' << (m.did_comp_update ? "true" : "false")
                << '\n';
        }
    }
    {
        json pass_at_k = json::object();
        for (const auto& [k, v] : report.pass_at_k_table) {
            pass_at_k[std::to_string(k)] = v;
        }
        const json summary{{"config", config_to_json(report.config)},
                           {"final_mean_cost", report.final_mean_cost},
                           {"final_mean_reward", report.final_mean_reward},
                           {"pass_at_k", pass_at_k},
                           {"n_steps", report.series.size()}};
        std::ofstream out(out_dir / "summary.json", std::ios::binary);
        if (!out) {
            throw std::runtime_error("cannot write summary.json");
        }
        out << summary.dump(2) << '\n';
    }
}

std::vector<StepMetrics> read_metrics_jsonl(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open " + path.string());
    }
    std::vector<StepMetrics> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        out.push_back(step_metrics_from_json(json::parse(line)));
    }
    return out;
}

void write_buffer_jsonl(std::span<const Response> responses,
                        const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot write " + path.string());
    }
    for (const Response& r : responses) {
        out << response_to_json(r).dump() << '\n';
    }
}

} // namespace rorecomp

// SPDX-License-Identifier: Apache-2.0
#include "rorecomp/config.hpp"

#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace rorecomp {

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) {
        return "";
    }
    const auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

class KeyValues {
public:
    explicit KeyValues(const std::string& text) {
        std::istringstream in(text);
        std::string line;
        int line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            const auto hash = line.find('#');
            if (hash != std::string::npos) {
                line = line.substr(0, hash);
            }
            line = trim(line);
            if (line.empty()) {
                continue;
            }
            const auto eq = line.find('=');
            if (eq == std::string::npos) {
                throw std::invalid_argument("config line " + std::to_string(line_no) +
                                            ": expected key = value");
            }
            const std::string key = trim(line.substr(0, eq));
            const std::string value = trim(line.substr(eq + 1));
            if (key.empty() || value.empty()) {
                throw std::invalid_argument("config line " + std::to_string(line_no) +
                                            ": empty key or value");
            }
            if (!values_.emplace(key, value).second) {
                throw std::invalid_argument("config: duplicate key '" + key + "'");
            }
        }
    }

    bool has(const std::string& key) const { return values_.count(key) != 0; }

    template <typename Fn>
    void take(const std::string& key, Fn&& fn) {
        auto it = values_.find(key);
        if (it == values_.end()) {
            return;
        }
        fn(it->second);
        values_.erase(it);
    }

    void ensure_empty() const {
        if (!values_.empty()) {
            throw std::invalid_argument("config: unknown key '" +
                                        values_.begin()->first + "'");
        }
    }

private:
    std::map<std::string, std::string> values_;
};

long to_long(const std::string& v, const std::string& key) {
    std::size_t pos = 0;
    long out = 0;
    try {
        out = std::stol(v, &pos);
    } catch (const std::exception&) {
        throw std::invalid_argument("config: bad integer for '" + key + "'");
    }
    if (pos != v.size()) {
        throw std::invalid_argument("config: bad integer for '" + key + "'");
    }
    return out;
}

double to_double(const std::string& v, const std::string& key) {
    std::size_t pos = 0;
    double out = 0.0;
    try {
        out = std::stod(v, &pos);
    } catch (const std::exception&) {
        throw std::invalid_argument("config: bad number for '" + key + "'");
    }
    if (pos != v.size()) {
        throw std::invalid_argument("config: bad number for '" + key + "'");
    }
    return out;
}

bool to_bool(const std::string& v, const std::string& key) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw std::invalid_argument("config: bad boolean for '" + key + "'");
}

} // namespace

std::string env_name(EnvId env) {
    return env == EnvId::PatternSeek ? "pattern_seek" : "tool_chain";
}

std::string advantage_mode_name(AdvantageKind kind) {
    switch (kind) {
        case AdvantageKind::GrpoStdNorm: return "grpo";
        case AdvantageKind::DrGrpoMeanOnly: return "dr_grpo";
        case AdvantageKind::PpoGae: return "ppo";
    }
    return "dr_grpo";
}

std::string reward_mode_name(RewardMode mode) {
    return mode == RewardMode::Exact ? "exact" : "f1";
}

std::string shaping_name(RewardShaping shaping) {
    switch (shaping) {
        case RewardShaping::None: return "none";
        case RewardShaping::TruncationZero: return "truncation_zero";
        case RewardShaping::LengthPenalty: return "length_penalty";
    }
    return "none";
}

RunConfig parse_config_text(const std::string& text) {
    KeyValues kv(text);
    RunConfig cfg;

    kv.take("environment", [&](const std::string& v) {
        if (v == "pattern_seek") {
            cfg.environment = EnvId::PatternSeek;
        } else if (v == "tool_chain") {
            cfg.environment = EnvId::ToolChain;
        } else {
            throw std::invalid_argument("config: unknown environment '" + v + "'");
        }
    });
    if (cfg.environment == EnvId::ToolChain) {
        cfg.reward_mode = RewardMode::F1;
        cfg.vocab_size = 12;
    }

    kv.take("seed", [&](const std::string& v) {
        cfg.seed = static_cast<std::uint64_t>(std::stoull(v));
    });
    kv.take("total_steps", [&](const std::string& v) {
        cfg.total_steps = to_long(v, "total_steps");
    });
    kv.take("prompts_per_step", [&](const std::string& v) {
        cfg.prompts_per_step = static_cast<int>(to_long(v, "prompts_per_step"));
    });
    kv.take("workers", [&](const std::string& v) {
        cfg.workers = static_cast<int>(to_long(v, "workers"));
    });

    kv.take("temperature", [&](const std::string& v) {
        cfg.sampling.temperature = to_double(v, "temperature");
    });
    kv.take("max_tokens", [&](const std::string& v) {
        cfg.sampling.max_tokens = static_cast<int>(to_long(v, "max_tokens"));
    });
    kv.take("group_size", [&](const std::string& v) {
        cfg.sampling.group_size = static_cast<int>(to_long(v, "group_size"));
    });

    kv.take("advantage_mode", [&](const std::string& v) {
        if (v == "grpo") {
            cfg.optimizer.advantage_mode.kind = AdvantageKind::GrpoStdNorm;
        } else if (v == "dr_grpo") {
            cfg.optimizer.advantage_mode.kind = AdvantageKind::DrGrpoMeanOnly;
        } else if (v == "ppo") {
            cfg.optimizer.advantage_mode.kind = AdvantageKind::PpoGae;
        } else {
            throw std::invalid_argument("config: unknown advantage_mode '" + v + "'");
        }
    });
    kv.take("gamma", [&](const std::string& v) {
        cfg.optimizer.advantage_mode.gamma = to_double(v, "gamma");
    });
    kv.take("lambda", [&](const std::string& v) {
        cfg.optimizer.advantage_mode.lambda = to_double(v, "lambda");
    });
    kv.take("clip_epsilon", [&](const std::string& v) {
        cfg.optimizer.clip_epsilon = to_double(v, "clip_epsilon");
    });
    kv.take("learning_rate", [&](const std::string& v) {
        cfg.optimizer.learning_rate = to_double(v, "learning_rate");
    });
    kv.take("kl_coef", [&](const std::string& v) {
        cfg.optimizer.kl_coef = to_double(v, "kl_coef");
    });
    kv.take("std_floor", [&](const std::string& v) {
        cfg.optimizer.std_floor = to_double(v, "std_floor");
    });
    kv.take("critic_learning_rate", [&](const std::string& v) {
        cfg.critic_learning_rate = to_double(v, "critic_learning_rate");
    });

    bool capacity_set = kv.has("buffer_capacity");
    kv.take("recomposition_enabled", [&](const std::string& v) {
        cfg.recomposition.enabled = to_bool(v, "recomposition_enabled");
    });
    kv.take("alpha", [&](const std::string& v) {
        cfg.recomposition.alpha = to_double(v, "alpha");
    });
    kv.take("p_lower", [&](const std::string& v) {
        cfg.recomposition.p_lower = to_double(v, "p_lower");
    });
    kv.take("comp_batch_size", [&](const std::string& v) {
        cfg.recomposition.comp_batch_size =
            static_cast<std::size_t>(to_long(v, "comp_batch_size"));
    });
    kv.take("buffer_capacity", [&](const std::string& v) {
        cfg.recomposition.buffer_capacity =
            static_cast<std::size_t>(to_long(v, "buffer_capacity"));
    });
    if (!capacity_set) {
        cfg.recomposition.buffer_capacity = 2 * cfg.recomposition.comp_batch_size;
    }
    kv.take("retain_on_skip", [&](const std::string& v) {
        cfg.recomposition.retain_on_skip = to_bool(v, "retain_on_skip");
    });
    kv.take("comp_enabled", [&](const std::string& v) {
        cfg.recomposition.comp_enabled = to_bool(v, "comp_enabled");
    });
    kv.take("comp_on_policy_loss", [&](const std::string& v) {
        cfg.recomposition.comp_on_policy_loss = to_bool(v, "comp_on_policy_loss");
    });
    kv.take("recompute_comp_advantages", [&](const std::string& v) {
        cfg.recomposition.recompute_comp_advantages =
            to_bool(v, "recompute_comp_advantages");
    });
    kv.take("filter_zero_variance_groups", [&](const std::string& v) {
        cfg.recomposition.filter_zero_variance_groups =
            to_bool(v, "filter_zero_variance_groups");
    });

    kv.take("reward_mode", [&](const std::string& v) {
        if (v == "exact") {
            cfg.reward_mode = RewardMode::Exact;
        } else if (v == "f1") {
            cfg.reward_mode = RewardMode::F1;
        } else {
            throw std::invalid_argument("config: unknown reward_mode '" + v + "'");
        }
    });
    kv.take("shaping", [&](const std::string& v) {
        if (v == "none") {
            cfg.shaping = RewardShaping::None;
        } else if (v == "truncation_zero") {
            cfg.shaping = RewardShaping::TruncationZero;
        } else if (v == "length_penalty") {
            cfg.shaping = RewardShaping::LengthPenalty;
        } else {
            throw std::invalid_argument("config: unknown shaping '" + v + "'");
        }
    });
    kv.take("truncation_limit", [&](const std::string& v) {
        cfg.truncation_limit = to_long(v, "truncation_limit");
    });
    kv.take("penalty_weight", [&](const std::string& v) {
        cfg.penalty_weight = to_double(v, "penalty_weight");
    });
    kv.take("tau_correct", [&](const std::string& v) {
        cfg.tau_correct = to_double(v, "tau_correct");
    });

    kv.take("vocab_size", [&](const std::string& v) {
        cfg.vocab_size = static_cast<int>(to_long(v, "vocab_size"));
    });
    kv.take("pattern_length", [&](const std::string& v) {
        cfg.pattern_length = static_cast<int>(to_long(v, "pattern_length"));
    });
    kv.take("max_turns", [&](const std::string& v) {
        cfg.max_turns = static_cast<int>(to_long(v, "max_turns"));
    });

    kv.take("eval_questions", [&](const std::string& v) {
        cfg.eval_questions = static_cast<int>(to_long(v, "eval_questions"));
    });
    kv.take("eval_samples", [&](const std::string& v) {
        cfg.eval_samples = static_cast<int>(to_long(v, "eval_samples"));
    });
    kv.take("summary_window", [&](const std::string& v) {
        cfg.summary_window = static_cast<int>(to_long(v, "summary_window"));
    });
    kv.take("out_dir", [&](const std::string& v) { cfg.out_dir = v; });

    kv.ensure_empty();
    validate(cfg);
    return cfg;
}

RunConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open config file: " + path);
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

void validate(const RunConfig& cfg) {
    auto require = [](bool ok, const char* what) {
        if (!ok) {
            throw std::invalid_argument(std::string("config: ") + what);
        }
    };
    require(cfg.total_steps >= 1, "total_steps must be >= 1");
    require(cfg.prompts_per_step >= 1, "prompts_per_step must be >= 1");
    require(cfg.workers >= 1, "workers must be >= 1");
    require(cfg.sampling.temperature > 0.0, "temperature must be > 0");
    require(cfg.sampling.max_tokens >= 1, "max_tokens must be >= 1");
    require(cfg.sampling.group_size >= 2, "group_size must be >= 2");
    require(cfg.optimizer.clip_epsilon > 0.0 && cfg.optimizer.clip_epsilon < 1.0,
            "clip_epsilon must be in (0, 1)");
    require(cfg.optimizer.learning_rate >= 0.0, "learning_rate must be >= 0");
    require(cfg.optimizer.kl_coef >= 0.0, "kl_coef must be >= 0");
    require(cfg.optimizer.std_floor > 0.0, "std_floor must be > 0");
    require(cfg.optimizer.advantage_mode.gamma >= 0.0 &&
                cfg.optimizer.advantage_mode.gamma <= 1.0,
            "gamma must be in [0, 1]");
    require(cfg.optimizer.advantage_mode.lambda >= 0.0 &&
                cfg.optimizer.advantage_mode.lambda <= 1.0,
            "lambda must be in [0, 1]");
    require(cfg.critic_learning_rate >= 0.0, "critic_learning_rate must be >= 0");
    require(cfg.recomposition.alpha > 0.0 && cfg.recomposition.alpha <= 1.0,
            "alpha must be in (0, 1]");
    require(cfg.recomposition.p_lower > 0.0 && cfg.recomposition.p_lower <= 1.0,
            "p_lower must be in (0, 1]");
    require(cfg.recomposition.comp_batch_size >= 1,
            "comp_batch_size must be >= 1");
    require(cfg.recomposition.buffer_capacity >= 1,
            "buffer_capacity must be >= 1");
    require(cfg.truncation_limit >= 1, "truncation_limit must be >= 1");
    require(cfg.penalty_weight >= 0.0, "penalty_weight must be >= 0");
    require(cfg.tau_correct > 0.0 && cfg.tau_correct <= 1.0,
            "tau_correct must be in (0, 1]");
    require(cfg.vocab_size >= 2, "vocab_size must be >= 2");
    require(cfg.pattern_length >= 1 && cfg.pattern_length <= 3,
            "pattern_length must be 1..3");
    require(cfg.max_turns >= 1, "max_turns must be >= 1");
    require(cfg.eval_questions >= 1, "eval_questions must be >= 1");
    require(cfg.eval_samples >= 2, "eval_samples must be >= 2");
    require(cfg.summary_window >= 1, "summary_window must be >= 1");
    if (cfg.environment == EnvId::PatternSeek) {
        require(cfg.reward_mode == RewardMode::Exact,
                "pattern_seek uses reward_mode = exact");
    } else {
        require(cfg.reward_mode == RewardMode::F1,
                "tool_chain uses reward_mode = f1");
        require(cfg.vocab_size >= 10,
                "tool_chain needs vocab_size >= 10 to bound blind-guess F1");
    }
}

} // namespace rorecomp

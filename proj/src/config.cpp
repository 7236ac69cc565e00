#include "fasttrack/config.hpp"

#include <sstream>

#include "fasttrack/mot_io.hpp"  // ParseError

namespace fasttrack {

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

double to_double(const std::string& value, const std::string& context) {
    std::size_t pos = 0;
    double v = 0.0;
    try {
        v = std::stod(value, &pos);
    } catch (const std::exception&) {
        throw ParseError(context + ": '" + value + "' is not a number");
    }
    if (pos != value.size()) throw ParseError(context + ": trailing characters in '" + value + "'");
    return v;
}

long long to_int(const std::string& value, const std::string& context) {
    std::size_t pos = 0;
    long long v = 0;
    try {
        v = std::stoll(value, &pos);
    } catch (const std::exception&) {
        throw ParseError(context + ": '" + value + "' is not an integer");
    }
    if (pos != value.size()) throw ParseError(context + ": trailing characters in '" + value + "'");
    return v;
}

std::uint64_t to_u64(const std::string& value, const std::string& context) {
    std::size_t pos = 0;
    unsigned long long v = 0;
    try {
        v = std::stoull(value, &pos);
    } catch (const std::exception&) {
        throw ParseError(context + ": '" + value + "' is not an unsigned integer");
    }
    if (pos != value.size()) throw ParseError(context + ": trailing characters in '" + value + "'");
    return v;
}

bool to_bool(const std::string& value, const std::string& context) {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    throw ParseError(context + ": '" + value + "' is not a boolean (true/false)");
}

QPosMode q_pos_mode_from_string(const std::string& s, const std::string& context) {
    if (s == "none") return QPosMode::none;
    if (s == "mlp") return QPosMode::mlp;
    if (s == "decoder") return QPosMode::decoder_pos;
    throw ParseError(context + ": unknown q_pos_mode '" + s + "' (none, mlp or decoder)");
}

std::string to_string(QPosMode mode) {
    switch (mode) {
        case QPosMode::none: return "none";
        case QPosMode::mlp: return "mlp";
        case QPosMode::decoder_pos: return "decoder";
    }
    return "decoder";
}

}  // namespace

std::vector<std::pair<std::string, std::string>> parse_key_value_text(
    const std::string& text, const std::string& source_name) {
    std::vector<std::pair<std::string, std::string>> pairs;
    std::istringstream in(text);
    std::string line;
    int line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        const auto comment = line.find('#');
        if (comment != std::string::npos) line = line.substr(0, comment);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ParseError(source_name + ":" + std::to_string(line_number) +
                             ": expected 'key = value'");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty()) {
            throw ParseError(source_name + ":" + std::to_string(line_number) +
                             ": empty key or value");
        }
        pairs.emplace_back(key, value);
    }
    return pairs;
}

ScenarioConfig parse_scenario_config(const std::string& text, const std::string& source_name) {
    ScenarioConfig cfg;
    for (const auto& [key, value] : parse_key_value_text(text, source_name)) {
        const std::string context = source_name + " key '" + key + "'";
        if (key == "num_objects") cfg.num_objects = static_cast<int>(to_int(value, context));
        else if (key == "num_frames") cfg.num_frames = static_cast<int>(to_int(value, context));
        else if (key == "arena_width") cfg.arena_width = to_double(value, context);
        else if (key == "arena_height") cfg.arena_height = to_double(value, context);
        else if (key == "motion") cfg.motion = motion_model_from_string(value);
        else if (key == "pos_noise_sigma") cfg.pos_noise_sigma = to_double(value, context);
        else if (key == "miss_prob") cfg.miss_prob = to_double(value, context);
        else if (key == "false_pos_rate") cfg.false_pos_rate = to_double(value, context);
        else if (key == "conf_mean_hit") cfg.conf_mean_hit = to_double(value, context);
        else if (key == "conf_mean_fp") cfg.conf_mean_fp = to_double(value, context);
        else if (key == "conf_sigma") cfg.conf_sigma = to_double(value, context);
        else if (key == "embed_dim") cfg.embed_dim = static_cast<int>(to_int(value, context));
        else if (key == "embed_noise_sigma") cfg.embed_noise_sigma = to_double(value, context);
        else if (key == "seed") cfg.seed = to_u64(value, context);
        else if (key == "box_width") cfg.box_width = to_double(value, context);
        else if (key == "box_height") cfg.box_height = to_double(value, context);
        else throw ParseError(source_name + ": unknown scenario key '" + key + "'");
    }
    validate(cfg);
    return cfg;
}

AssociationConfig parse_association_config(const std::string& text,
                                           const std::string& source_name) {
    AssociationConfig cfg;
    for (const auto& [key, value] : parse_key_value_text(text, source_name)) {
        const std::string context = source_name + " key '" + key + "'";
        if (key == "lambda_fuse") cfg.lambda_fuse = to_double(value, context);
        else if (key == "eta_ema") cfg.eta_ema = to_double(value, context);
        else if (key == "tau_high") cfg.tau_high = to_double(value, context);
        else if (key == "tau_low") cfg.tau_low = to_double(value, context);
        else if (key == "gate_chi2") cfg.gate_chi2 = to_double(value, context);
        else if (key == "cost_reject") cfg.cost_reject = to_double(value, context);
        else if (key == "max_age") cfg.max_age = static_cast<int>(to_int(value, context));
        else if (key == "n_init") cfg.n_init = static_cast<int>(to_int(value, context));
        else if (key == "enable_bistage") cfg.enable_bistage = to_bool(value, context);
        else throw ParseError(source_name + ": unknown association key '" + key + "'");
    }
    validate(cfg);
    return cfg;
}

AttentionPipelineConfig parse_attention_config(const std::string& text,
                                               const std::string& source_name) {
    AttentionPipelineConfig cfg;
    for (const auto& [key, value] : parse_key_value_text(text, source_name)) {
        const std::string context = source_name + " key '" + key + "'";
        if (key == "num_queries") cfg.num_queries = static_cast<int>(to_int(value, context));
        else if (key == "num_layers") cfg.num_layers = static_cast<int>(to_int(value, context));
        else if (key == "memory_len") cfg.memory_len = static_cast<int>(to_int(value, context));
        else if (key == "ffn_dim") cfg.ffn_dim = static_cast<int>(to_int(value, context));
        else if (key == "mask_threshold") cfg.mask_threshold = to_double(value, context);
        else if (key == "q_pos_mode") cfg.q_pos_mode = q_pos_mode_from_string(value, context);
        else if (key == "param_seed") cfg.param_seed = to_u64(value, context);
        else throw ParseError(source_name + ": unknown attention key '" + key + "'");
    }
    validate(cfg);
    return cfg;
}

std::string format_config(const ScenarioConfig& cfg) {
    std::ostringstream out;
    out << "num_objects = " << cfg.num_objects << "\n"
        << "num_frames = " << cfg.num_frames << "\n"
        << "arena_width = " << cfg.arena_width << "\n"
        << "arena_height = " << cfg.arena_height << "\n"
        << "motion = " << to_string(cfg.motion) << "\n"
        << "pos_noise_sigma = " << cfg.pos_noise_sigma << "\n"
        << "miss_prob = " << cfg.miss_prob << "\n"
        << "false_pos_rate = " << cfg.false_pos_rate << "\n"
        << "conf_mean_hit = " << cfg.conf_mean_hit << "\n"
        << "conf_mean_fp = " << cfg.conf_mean_fp << "\n"
        << "conf_sigma = " << cfg.conf_sigma << "\n"
        << "embed_dim = " << cfg.embed_dim << "\n"
        << "embed_noise_sigma = " << cfg.embed_noise_sigma << "\n"
        << "seed = " << cfg.seed << "\n"
        << "box_width = " << cfg.box_width << "\n"
        << "box_height = " << cfg.box_height << "\n";
    return out.str();
}

std::string format_config(const AssociationConfig& cfg) {
    std::ostringstream out;
    out << "lambda_fuse = " << cfg.lambda_fuse << "\n"
        << "eta_ema = " << cfg.eta_ema << "\n"
        << "tau_high = " << cfg.tau_high << "\n"
        << "tau_low = " << cfg.tau_low << "\n"
        << "gate_chi2 = " << cfg.gate_chi2 << "\n"
        << "cost_reject = " << cfg.cost_reject << "\n"
        << "max_age = " << cfg.max_age << "\n"
        << "n_init = " << cfg.n_init << "\n"
        << "enable_bistage = " << (cfg.enable_bistage ? "true" : "false") << "\n";
    return out.str();
}

std::string format_config(const AttentionPipelineConfig& cfg) {
    std::ostringstream out;
    out << "num_queries = " << cfg.num_queries << "\n"
        << "num_layers = " << cfg.num_layers << "\n"
        << "memory_len = " << cfg.memory_len << "\n"
        << "ffn_dim = " << cfg.ffn_dim << "\n"
        << "mask_threshold = " << cfg.mask_threshold << "\n"
        << "q_pos_mode = " << to_string(cfg.q_pos_mode) << "\n"
        << "param_seed = " << cfg.param_seed << "\n";
    return out.str();
}

}  // namespace fasttrack

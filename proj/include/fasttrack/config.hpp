#ifndef FASTTRACK_CONFIG_HPP
#define FASTTRACK_CONFIG_HPP

#include <string>
#include <utility>
#include <vector>

#include "fasttrack/pipeline.hpp"
#include "fasttrack/scenario.hpp"
#include "fasttrack/tracker.hpp"

namespace fasttrack {

// Flat `key = value` text: one pair per line, '#' comments, blank lines
// ignored. Unknown keys are errors so typos cannot silently fall back to
// defaults.
std::vector<std::pair<std::string, std::string>> parse_key_value_text(
    const std::string& text, const std::string& source_name);

ScenarioConfig parse_scenario_config(const std::string& text, const std::string& source_name);
AssociationConfig parse_association_config(const std::string& text,
                                           const std::string& source_name);
AttentionPipelineConfig parse_attention_config(const std::string& text,
                                               const std::string& source_name);

// Resolved-config echoes, printable and re-parseable.
std::string format_config(const ScenarioConfig& cfg);
std::string format_config(const AssociationConfig& cfg);
std::string format_config(const AttentionPipelineConfig& cfg);

}  // namespace fasttrack

#endif

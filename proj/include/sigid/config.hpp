#pragma once

#include <string>

#include "sigid/classify.hpp"
#include "sigid/pipeline.hpp"
#include "sigid/wavegen.hpp"

namespace sigid::config {

// All loaders read YAML and throw ConfigError(file, line, message) on any
// problem, including unknown keys. `source` names the text in messages.

wavegen::ScenarioSpec parse_scenario(const std::string& text, const std::string& source);
wavegen::ScenarioSpec load_scenario(const std::string& path);

classify::ChannelPlan parse_plan(const std::string& text, const std::string& source);
classify::ChannelPlan load_plan(const std::string& path);

/// Fields absent from the file keep their value in `base`. A relative `plan`
/// path is resolved against the config file's directory.
pipeline::PipelineConfig parse_pipeline_config(const std::string& text, const std::string& source,
                                               pipeline::PipelineConfig base = {});
pipeline::PipelineConfig load_pipeline_config(const std::string& path, pipeline::PipelineConfig base = {});

}  // namespace sigid::config

#pragma once

#include <string>

#include "sigid/pipeline.hpp"

namespace sigid::report {

/// Stable-order JSON, two-space indented, trailing newline. Timing fields
/// appear only when present in the report.
std::string serialize(const pipeline::IdentificationReport& report);

/// Inverse of serialize; throws FormatError on malformed input.
pipeline::IdentificationReport parse(const std::string& text);

}  // namespace sigid::report

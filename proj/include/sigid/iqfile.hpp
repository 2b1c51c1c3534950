#pragma once

#include <string>

#include "sigid/types.hpp"
#include "sigid/wavegen.hpp"

namespace sigid::iqfile {

/// Interleaved little-endian float32 I/Q pairs.
inline constexpr const char* kSampleFormat = "cf32le";

std::string meta_path(const std::string& data_path);   // <data>.meta.json
std::string truth_path(const std::string& data_path);  // <data>.truth.json

/// Writes the data file and its sidecar.
void write_recording(const std::string& data_path, const IqRecording& rec);

/// Throws FileError for missing files, FormatError for a bad sidecar and
/// LengthMismatchError when sample_count * 8 differs from the data size.
IqRecording read_recording(const std::string& data_path);

void write_truth(const std::string& path, const wavegen::GroundTruth& truth);
wavegen::GroundTruth read_truth(const std::string& path);

}  // namespace sigid::iqfile

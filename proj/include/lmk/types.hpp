#pragma once

#include <cstdint>
#include <string>

namespace lmk {

using ImageId = std::string;
using ClassId = std::int64_t;

// Labels: images whose landmark_id field is empty carry this sentinel.
inline constexpr ClassId kNonLandmark = -1;

// Prediction slots / recognition results: "no class" sentinel.
inline constexpr ClassId kNoClass = -1;

// Submission lists are truncated to this depth; mAP is evaluated at it.
inline constexpr std::size_t kSubmissionDepth = 100;

}  // namespace lmk

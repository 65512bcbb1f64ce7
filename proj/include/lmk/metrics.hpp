#pragma once

#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "lmk/recognize.hpp"
#include "lmk/types.hpp"

namespace lmk {

struct RetrievalTruth {
  std::unordered_map<ImageId, std::unordered_set<ImageId>> relevant;
};

// kNoClass marks a non-landmark query.
struct RecognitionTruth {
  std::unordered_map<ImageId, ClassId> classes;
};

using RetrievalSubmission =
    std::vector<std::pair<ImageId, std::vector<ImageId>>>;

// Mean over queries with at least one relevant item of
// AP(q) = (1 / min(m_q, 100)) * sum_k P@k * rel(k). Queries missing from
// the submission score 0; queries with no relevant items are excluded.
// Returns 0 (with a warning on stderr) when no query has relevant items.
double map_at_100(const RetrievalSubmission& submission,
                  const RetrievalTruth& truth);

// Micro-averaged precision: all non-NONE predictions sorted by confidence
// descending (ties by query id ascending); GAP = (1/M) * sum_i P@i * rel(i)
// with M the number of landmark queries in the truth.
double gap(const std::vector<RecognitionResult>& results,
           const RecognitionTruth& truth);

}  // namespace lmk

#include "lmk/metrics.hpp"

#include <algorithm>
#include <cstdio>

#include "lmk/errors.hpp"

namespace lmk {

double map_at_100(const RetrievalSubmission& submission,
                  const RetrievalTruth& truth) {
  std::size_t scored_queries = 0;
  for (const auto& [query, relevant] : truth.relevant) {
    if (!relevant.empty()) {
      ++scored_queries;
    }
  }
  if (scored_queries == 0) {
    std::fprintf(stderr,
                 "map_at_100: no query has relevant items; score is 0\n");
    return 0.0;
  }

  double ap_sum = 0.0;
  for (const auto& [query, ids] : submission) {
    if (ids.size() > kSubmissionDepth) {
      throw Error("submission list for " + query + " exceeds " +
                  std::to_string(kSubmissionDepth) + " items");
    }
    std::unordered_set<std::string_view> seen;
    seen.reserve(ids.size());
    for (const auto& id : ids) {
      if (!seen.insert(id).second) {
        throw DuplicateInListError("duplicate index id in list for " + query +
                                   ": " + id);
      }
    }
    const auto tit = truth.relevant.find(query);
    if (tit == truth.relevant.end() || tit->second.empty()) {
      continue;
    }
    const auto& relevant = tit->second;
    std::size_t hits = 0;
    double ap = 0.0;
    for (std::size_t rank = 0; rank < ids.size(); ++rank) {
      if (relevant.count(ids[rank]) > 0) {
        ++hits;
        ap += double(hits) / double(rank + 1);
      }
    }
    ap_sum += ap / double(std::min(relevant.size(), kSubmissionDepth));
  }
  return ap_sum / double(scored_queries);
}

double gap(const std::vector<RecognitionResult>& results,
           const RecognitionTruth& truth) {
  std::size_t landmark_queries = 0;
  for (const auto& [query, cls] : truth.classes) {
    if (cls != kNoClass) {
      ++landmark_queries;
    }
  }

  std::vector<const RecognitionResult*> predictions;
  predictions.reserve(results.size());
  std::unordered_set<std::string_view> seen;
  seen.reserve(results.size());
  for (const auto& result : results) {
    if (truth.classes.find(result.query_id) == truth.classes.end()) {
      throw UnknownQueryError("prediction for unknown query: " +
                              result.query_id);
    }
    if (!seen.insert(result.query_id).second) {
      throw Error("more than one prediction for query: " + result.query_id);
    }
    if (result.cls != kNoClass) {
      predictions.push_back(&result);
    }
  }

  if (landmark_queries == 0) {
    std::fprintf(stderr, "gap: truth has no landmark queries; score is 0\n");
    return 0.0;
  }

  std::sort(predictions.begin(), predictions.end(),
            [](const RecognitionResult* a, const RecognitionResult* b) {
              if (a->confidence != b->confidence) {
                return a->confidence > b->confidence;
              }
              return a->query_id < b->query_id;
            });

  std::size_t correct = 0;
  double sum = 0.0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const auto truth_cls = truth.classes.at(predictions[i]->query_id);
    if (truth_cls != kNoClass && truth_cls == predictions[i]->cls) {
      ++correct;
      sum += double(correct) / double(i + 1);
    }
  }
  return sum / double(landmark_queries);
}

}  // namespace lmk

#include "lmk/rerank.hpp"

#include <algorithm>

#include "lmk/errors.hpp"

namespace lmk {

double adjust_pair(double cos, const PredictionTriple& query_pred,
                   const PredictionTriple& index_pred,
                   const AdjustmentConfig& cfg) {
  double score = cos;
  for (std::size_t j = 0; j < 3; ++j) {
    const auto& q = query_pred.slots[j];
    if (q.cls == kNoClass) {
      continue;
    }
    for (std::size_t k = 0; k < 3; ++k) {
      const auto& s = index_pred.slots[k];
      if (s.cls == kNoClass) {
        continue;
      }
      const bool same = q.cls == s.cls;
      const double product = q.confidence * s.confidence;
      if (same) {
        score += cfg.boost[j][k] * product;
      }
      const bool penalized =
          cfg.penalty_condition == PenaltyCondition::mismatch ? !same : same;
      if (penalized) {
        score -= cfg.penalty[j][k] * product;
      }
    }
  }
  return score;
}

std::vector<RankedList> rerank_lists(const std::vector<RankedList>& lists,
                                     const TripleMap& query_preds,
                                     const TripleMap& index_preds,
                                     const AdjustmentConfig& cfg) {
  std::vector<RankedList> out;
  out.reserve(lists.size());
  for (const auto& list : lists) {
    const auto qit = query_preds.find(list.query_id);
    if (qit == query_preds.end()) {
      throw MissingPredictionError("no prediction triple for query: " +
                                   list.query_id);
    }
    RankedList adjusted;
    adjusted.query_id = list.query_id;
    adjusted.neighbors.reserve(list.neighbors.size());
    for (const auto& nb : list.neighbors) {
      const auto iit = index_preds.find(nb.index_id);
      if (iit == index_preds.end()) {
        throw MissingPredictionError("no prediction triple for index: " +
                                     nb.index_id);
      }
      adjusted.neighbors.push_back(Neighbor{
          nb.index_id, adjust_pair(nb.score, qit->second, iit->second, cfg)});
    }
    std::sort(adjusted.neighbors.begin(), adjusted.neighbors.end(),
              [](const Neighbor& a, const Neighbor& b) {
                if (a.score != b.score) {
                  return a.score > b.score;
                }
                return a.index_id < b.index_id;
              });
    if (adjusted.neighbors.size() > kSubmissionDepth) {
      adjusted.neighbors.resize(kSubmissionDepth);
    }
    out.push_back(std::move(adjusted));
  }
  return out;
}

}  // namespace lmk

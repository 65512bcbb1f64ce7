#pragma once

#include <array>
#include <vector>

#include "lmk/class_predict.hpp"
#include "lmk/knn.hpp"

namespace lmk {

using RankTable = std::array<std::array<double, 3>, 3>;

// Which (query-rank j, index-rank k) class relation triggers the penalty
// table. `mismatch` opposes the boost; `match` dampens agreeing pairs
// unconditionally.
enum class PenaltyCondition { mismatch, match };

// Rank-indexed boost table g and penalty table h over the top-3 class
// predictions of a query/index pair. Entries are non-negative weights
// multiplying the product of the two slot confidences.
struct AdjustmentConfig {
  RankTable boost{};
  RankTable penalty{};
  PenaltyCondition penalty_condition = PenaltyCondition::mismatch;
};

// cos plus boosts over class-matching slot pairs, minus penalties over the
// configured condition. Sentinel slots never fire either term.
double adjust_pair(double cos, const PredictionTriple& query_pred,
                   const PredictionTriple& index_pred,
                   const AdjustmentConfig& cfg);

// Applies adjust_pair to every neighbor, re-sorts each list (score
// descending, index_id ascending) and truncates to kSubmissionDepth.
std::vector<RankedList> rerank_lists(const std::vector<RankedList>& lists,
                                     const TripleMap& query_preds,
                                     const TripleMap& index_preds,
                                     const AdjustmentConfig& cfg);

}  // namespace lmk

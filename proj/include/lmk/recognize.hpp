#pragma once

#include <limits>
#include <optional>
#include <vector>

#include "lmk/class_predict.hpp"
#include "lmk/embed_store.hpp"
#include "lmk/knn.hpp"

namespace lmk {

// theta set to +infinity disables the hard non-landmark filter.
inline constexpr double kHardFilterDisabled =
    std::numeric_limits<double>::infinity();

struct RecognitionConfig {
  double alpha = 1.0;  // cosine-vs-probability blend, in [0,1]
  double beta = 0.0;   // non-landmark soft penalty weight
  double gamma = 0.0;  // class-count penalty weight
  double theta = 0.5;  // hard-filter threshold
  std::size_t t_nl = 5;
  std::size_t k = 10;
};

struct RecognitionResult {
  ImageId query_id;
  ClassId cls = kNoClass;
  double confidence = 0.0;
};

struct LabeledNeighbor {
  ClassId label = kNoClass;
  double score = 0.0;
};

// Pipeline intermediates that do not depend on the adjustable parameters:
// per-query labeled train neighbors and top non-landmark similarities.
// Built once, then scored under many configs (grid search) by prefix-slicing
// the neighbor and similarity lists.
struct RecognitionCache {
  std::vector<ImageId> query_ids;
  std::vector<std::vector<LabeledNeighbor>> train_neighbors;
  std::vector<std::vector<double>> nonlandmark_scores;
  std::size_t cached_k = 0;
  std::size_t cached_t = 0;
  bool has_nonlandmarks = false;
};

RecognitionCache build_recognition_cache(const EmbeddingMatrix& queries,
                                         const EmbeddingMatrix& train,
                                         const LabelTable& train_labels,
                                         const EmbeddingMatrix& nonlandmarks,
                                         std::size_t k, std::size_t t,
                                         const SearchOptions& opts = {});

// Per query: class-count penalty on neighbor similarities, clamped class
// aggregation, probability blend, soft non-landmark penalty, hard filter,
// then argmax (ties to the smaller class id).
std::vector<RecognitionResult> recognize_from_cache(
    const RecognitionCache& cache, const ClassCatalog& catalog,
    const TripleMap* external_probs, const RecognitionConfig& cfg);

std::vector<RecognitionResult> recognize(
    const EmbeddingMatrix& queries, const EmbeddingMatrix& train,
    const LabelTable& train_labels, const ClassCatalog& catalog,
    const EmbeddingMatrix& nonlandmarks, const TripleMap* external_probs,
    const RecognitionConfig& cfg, const SearchOptions& opts = {});

}  // namespace lmk

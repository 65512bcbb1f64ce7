#pragma once

#include <array>
#include <filesystem>
#include <unordered_map>
#include <vector>

#include "lmk/embed_store.hpp"
#include "lmk/knn.hpp"
#include "lmk/types.hpp"

namespace lmk {

struct ClassPrediction {
  ClassId cls = kNoClass;
  double confidence = 0.0;
};

// Exactly three slots ordered by confidence descending, class id ascending
// on ties; unused slots hold the kNoClass sentinel with confidence 0.
struct PredictionTriple {
  ImageId image_id;
  std::array<ClassPrediction, 3> slots{};
};

using TripleMap = std::unordered_map<ImageId, PredictionTriple>;

// kNN class voting: per image, take the top-K labeled train neighbors,
// score each class by the sum of its positively clamped cosines, normalize
// to sum 1, and emit the top three classes. All-zero scores yield a
// sentinel-only triple.
std::vector<PredictionTriple> predict_top3(const EmbeddingMatrix& images,
                                           const EmbeddingMatrix& train,
                                           const LabelTable& train_labels,
                                           std::size_t k,
                                           const SearchOptions& opts = {});

// CSV with header id,class,prob; at most three rows per id, prob in [0,1].
TripleMap load_external_probs(const std::filesystem::path& path);

// Orders (class, confidence) pairs per the triple invariant and fills up to
// three slots.
PredictionTriple make_triple(ImageId id, std::vector<ClassPrediction> scored);

}  // namespace lmk

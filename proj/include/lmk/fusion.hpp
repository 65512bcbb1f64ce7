#pragma once

#include <vector>

#include "lmk/embed_store.hpp"

namespace lmk {

struct FusionMember {
  const EmbeddingMatrix* matrix = nullptr;
  double weight = 1.0;
};

// Ordered ensemble members. All matrices must share the same id list in the
// same order and be normalized; at least one weight must be positive.
struct FusionSpec {
  std::vector<FusionMember> members;
};

// Concatenates weight-scaled member rows and renormalizes. For unit-norm
// members the fused pairwise cosine is sum(w^2 * cos_m) / sum(w^2).
EmbeddingMatrix fuse_concat(const FusionSpec& spec);

}  // namespace lmk

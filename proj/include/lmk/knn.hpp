#pragma once

#include <cstddef>
#include <vector>

#include "lmk/embed_store.hpp"
#include "lmk/types.hpp"

namespace lmk {

struct Neighbor {
  ImageId index_id;
  double score = 0.0;
};

// Neighbors sorted by score descending, ties broken by index_id ascending.
struct RankedList {
  ImageId query_id;
  std::vector<Neighbor> neighbors;
};

struct SearchOptions {
  int threads = 1;
  std::size_t query_block = 64;
  std::size_t gallery_block = 256;
};

// Exact top-k by dot product (cosine on normalized inputs), blocked matrix
// traversal. Output is identical for any thread count: each query is scanned
// against the full gallery in a fixed block order.
std::vector<RankedList> cosine_topk(const EmbeddingMatrix& queries,
                                    const EmbeddingMatrix& gallery,
                                    std::size_t k,
                                    const SearchOptions& opts = {});

// Per query, the t largest cosine scores against a reference set, descending.
// Returns fewer than t when the reference has fewer rows.
std::vector<std::vector<double>> cross_max_topt(
    const EmbeddingMatrix& queries, const EmbeddingMatrix& reference,
    std::size_t t, const SearchOptions& opts = {});

}  // namespace lmk

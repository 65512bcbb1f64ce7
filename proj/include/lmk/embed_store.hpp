#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "lmk/types.hpp"

namespace lmk {

// Row-aligned embedding set. Row i belongs to ids[i]; data is row-major.
// Immutable once loaded; safe for unrestricted concurrent reads.
struct EmbeddingMatrix {
  std::vector<ImageId> ids;
  std::uint32_t dim = 0;
  std::vector<float> data;

  std::size_t rows() const { return ids.size(); }

  std::span<const float> row(std::size_t i) const {
    return {data.data() + i * dim, dim};
  }
  std::span<float> row(std::size_t i) { return {data.data() + i * dim, dim}; }
};

struct LabelTable {
  std::unordered_map<ImageId, ClassId> entries;
};

struct ClassCatalog {
  std::unordered_map<ClassId, std::uint64_t> counts;
  std::uint64_t max_count = 0;
};

// Rows with Euclidean norm below this are rejected as zero vectors.
inline constexpr double kZeroNormThreshold = 1e-12;

// Binary layout (little-endian): "EMB1", u32 version = 1, u32 n, u32 dim,
// then n*dim IEEE-754 32-bit floats row-major. Sidecar: one id per line.
EmbeddingMatrix load_embeddings(const std::filesystem::path& matrix_path,
                                const std::filesystem::path& ids_path);

void save_embeddings(const EmbeddingMatrix& m,
                     const std::filesystem::path& matrix_path,
                     const std::filesystem::path& ids_path);

// Scales every row to unit norm. Rows already unit within 1e-6 are left
// bit-identical, which makes normalize exactly idempotent.
EmbeddingMatrix normalize(const EmbeddingMatrix& m);

// CSV with header id,landmark_id; empty landmark_id means non-landmark.
LabelTable load_labels(const std::filesystem::path& path);

// Per-class image counts over the non-sentinel labels.
ClassCatalog build_catalog(const LabelTable& labels);

}  // namespace lmk

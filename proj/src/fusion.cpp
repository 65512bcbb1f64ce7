#include "lmk/fusion.hpp"

#include <cmath>
#include <cstdint>

#include "lmk/errors.hpp"

namespace lmk {

EmbeddingMatrix fuse_concat(const FusionSpec& spec) {
  if (spec.members.empty()) {
    throw DegenerateWeightsError("fusion spec has no members");
  }
  bool any_positive = false;
  for (const auto& member : spec.members) {
    if (member.weight > 0.0) {
      any_positive = true;
    }
  }
  if (!any_positive) {
    throw DegenerateWeightsError("all fusion weights are zero");
  }

  const auto& first = *spec.members.front().matrix;
  std::uint64_t total_dim = 0;
  for (const auto& member : spec.members) {
    const auto& m = *member.matrix;
    if (m.ids.size() != first.ids.size()) {
      throw AlignmentError("member row counts differ: " +
                           std::to_string(m.ids.size()) + " vs " +
                           std::to_string(first.ids.size()));
    }
    for (std::size_t i = 0; i < m.ids.size(); ++i) {
      if (m.ids[i] != first.ids[i]) {
        throw AlignmentError("member id mismatch at row " + std::to_string(i) +
                             ": " + m.ids[i] + " vs " + first.ids[i]);
      }
    }
    total_dim += m.dim;
  }

  EmbeddingMatrix out;
  out.ids = first.ids;
  out.dim = static_cast<std::uint32_t>(total_dim);
  out.data.resize(out.rows() * out.dim);

  for (std::size_t i = 0; i < out.rows(); ++i) {
    auto dst = out.row(i);
    std::size_t offset = 0;
    double sq = 0.0;
    for (const auto& member : spec.members) {
      const auto src = member.matrix->row(i);
      const double w = member.weight;
      for (std::size_t j = 0; j < src.size(); ++j) {
        const double v = w * double(src[j]);
        dst[offset + j] = static_cast<float>(v);
        sq += v * v;
      }
      offset += src.size();
    }
    const double norm = std::sqrt(sq);
    if (norm < kZeroNormThreshold) {
      throw ZeroVectorError("fused row is zero for id: " + out.ids[i]);
    }
    for (float& v : dst) {
      v = static_cast<float>(double(v) / norm);
    }
  }
  return out;
}

}  // namespace lmk

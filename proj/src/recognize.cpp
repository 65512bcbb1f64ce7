#include "lmk/recognize.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "lmk/errors.hpp"

namespace lmk {

RecognitionCache build_recognition_cache(const EmbeddingMatrix& queries,
                                         const EmbeddingMatrix& train,
                                         const LabelTable& train_labels,
                                         const EmbeddingMatrix& nonlandmarks,
                                         std::size_t k, std::size_t t,
                                         const SearchOptions& opts) {
  RecognitionCache cache;
  cache.query_ids = queries.ids;
  cache.cached_k = k;
  cache.cached_t = t;
  cache.has_nonlandmarks = nonlandmarks.rows() > 0;

  std::unordered_map<std::string_view, ClassId> label_of;
  label_of.reserve(train.rows());
  for (std::size_t i = 0; i < train.rows(); ++i) {
    const auto it = train_labels.entries.find(train.ids[i]);
    if (it == train_labels.entries.end()) {
      throw MissingLabelError("train id has no label: " + train.ids[i]);
    }
    label_of.emplace(train.ids[i], it->second);
  }

  const auto lists = cosine_topk(queries, train, k, opts);
  cache.train_neighbors.reserve(lists.size());
  for (const auto& list : lists) {
    std::vector<LabeledNeighbor> neighbors;
    neighbors.reserve(list.neighbors.size());
    for (const auto& nb : list.neighbors) {
      neighbors.push_back(LabeledNeighbor{label_of.at(nb.index_id), nb.score});
    }
    cache.train_neighbors.push_back(std::move(neighbors));
  }

  if (cache.has_nonlandmarks) {
    cache.nonlandmark_scores = cross_max_topt(queries, nonlandmarks, t, opts);
  } else {
    cache.nonlandmark_scores.assign(queries.rows(), {});
  }
  return cache;
}

std::vector<RecognitionResult> recognize_from_cache(
    const RecognitionCache& cache, const ClassCatalog& catalog,
    const TripleMap* external_probs, const RecognitionConfig& cfg) {
  if (cfg.k > cache.cached_k || cfg.t_nl > cache.cached_t) {
    throw Error("recognition cache too shallow for requested K/t_nl");
  }
  const bool hard_filter = std::isfinite(cfg.theta);
  if (!cache.has_nonlandmarks && (cfg.beta > 0.0 || hard_filter)) {
    throw NonLandmarkSetError(
        "non-landmark set is empty but beta > 0 or the hard filter is on");
  }
  const double alpha = external_probs == nullptr ? 1.0 : cfg.alpha;
  const double log_max = std::log1p(double(catalog.max_count));

  std::vector<RecognitionResult> results;
  results.reserve(cache.query_ids.size());
  for (std::size_t q = 0; q < cache.query_ids.size(); ++q) {
    RecognitionResult result;
    result.query_id = cache.query_ids[q];

    const auto& nl = cache.nonlandmark_scores[q];
    if (hard_filter) {
      // t_nl-th highest non-landmark cosine, padding with -1 when the set
      // is smaller than t_nl; equality does not fire the filter.
      const double nth = nl.size() >= cfg.t_nl ? nl[cfg.t_nl - 1] : -1.0;
      if (nth > cfg.theta) {
        results.push_back(std::move(result));
        continue;
      }
    }

    const auto& neighbors = cache.train_neighbors[q];
    const std::size_t use = std::min(cfg.k, neighbors.size());
    std::map<ClassId, double> knn_scores;
    double total = 0.0;
    for (std::size_t i = 0; i < use; ++i) {
      const auto& nb = neighbors[i];
      if (nb.label == kNonLandmark) {
        continue;
      }
      const auto cit = catalog.counts.find(nb.label);
      if (cit == catalog.counts.end()) {
        throw CatalogError("no catalog entry for class " +
                           std::to_string(nb.label));
      }
      const double penalized =
          nb.score - cfg.gamma * std::log1p(double(cit->second)) / log_max;
      const double clamped = std::max(penalized, 0.0);
      knn_scores[nb.label] += clamped;
      total += clamped;
    }

    std::map<ClassId, double> conf;
    for (const auto& [cls, s] : knn_scores) {
      conf[cls] = alpha * (total > 0.0 ? s / total : 0.0);
    }
    if (external_probs != nullptr) {
      const auto pit = external_probs->find(cache.query_ids[q]);
      if (pit != external_probs->end()) {
        for (const auto& slot : pit->second.slots) {
          if (slot.cls != kNoClass) {
            conf[slot.cls] += (1.0 - alpha) * slot.confidence;
          }
        }
      }
    }

    if (cfg.beta > 0.0 && !nl.empty()) {
      const std::size_t avail = std::min(cfg.t_nl, nl.size());
      double mean = 0.0;
      for (std::size_t i = 0; i < avail; ++i) {
        mean += nl[i];
      }
      mean /= double(avail);
      for (auto& [cls, c] : conf) {
        c = std::max(0.0, c - cfg.beta * mean);
      }
    }

    for (const auto& [cls, c] : conf) {
      if (c > result.confidence) {
        result.cls = cls;
        result.confidence = c;
      }
    }
    if (result.confidence <= 0.0) {
      result.cls = kNoClass;
      result.confidence = 0.0;
    }
    results.push_back(std::move(result));
  }
  return results;
}

std::vector<RecognitionResult> recognize(
    const EmbeddingMatrix& queries, const EmbeddingMatrix& train,
    const LabelTable& train_labels, const ClassCatalog& catalog,
    const EmbeddingMatrix& nonlandmarks, const TripleMap* external_probs,
    const RecognitionConfig& cfg, const SearchOptions& opts) {
  const auto cache = build_recognition_cache(queries, train, train_labels,
                                             nonlandmarks, cfg.k, cfg.t_nl,
                                             opts);
  return recognize_from_cache(cache, catalog, external_probs, cfg);
}

}  // namespace lmk

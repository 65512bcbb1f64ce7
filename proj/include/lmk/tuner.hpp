#pragma once

#include <string>
#include <vector>

#include "lmk/config.hpp"
#include "lmk/metrics.hpp"
#include "lmk/recognize.hpp"
#include "lmk/rerank.hpp"

namespace lmk {

enum class TuneTarget { map_at_100, gap };

inline constexpr std::size_t kDefaultGridCap = 10000;

// Cartesian grid over a subset of the target's parameters. Parameter order
// is canonical (table column order); candidate values are sorted ascending,
// so enumeration order is lexicographic and ties resolve to the
// lexicographically-first config.
struct Grid {
  TuneTarget target = TuneTarget::map_at_100;
  std::vector<std::string> param_names;
  std::vector<std::vector<std::string>> param_values;
  std::size_t cap = kDefaultGridCap;
};

// Builds a grid from a [grid] section; keys must belong to the target's
// parameter set and each value list must be non-empty and parseable.
Grid make_grid(const ConfigFile& file, TuneTarget target,
               std::size_t cap = kDefaultGridCap);

// Largest value of an integer grid parameter, or `fallback` when absent.
// Used to size cached pipeline intermediates before tuning.
std::size_t grid_max_int(const Grid& grid, const std::string& name,
                         std::size_t fallback);

struct TuneRow {
  std::vector<std::string> values;
  double score = 0.0;
};

struct TuneResult {
  std::vector<std::string> param_names;
  std::vector<TuneRow> table;  // grid enumeration order
  std::size_t best_index = 0;
  double best_score = 0.0;

  ConfigFile::Entries best_entries() const;
};

AdjustmentConfig materialize_rerank(const Grid& grid,
                                    const std::vector<std::string>& values);
RecognitionConfig materialize_recognize(const Grid& grid,
                                        const std::vector<std::string>& values);

// Evaluates every grid point by reranking the cached lists and scoring
// mAP@100 against the validation truth.
TuneResult tune_rerank(const Grid& grid, const std::vector<RankedList>& base,
                       const TripleMap& query_preds,
                       const TripleMap& index_preds,
                       const RetrievalTruth& truth, int threads = 1);

// Evaluates every grid point through the recognition chain over a cache
// built at the grid's deepest K and t_nl.
TuneResult tune_recognize(const Grid& grid, const RecognitionCache& cache,
                          const ClassCatalog& catalog,
                          const TripleMap* external_probs,
                          const RecognitionTruth& truth, int threads = 1);

}  // namespace lmk

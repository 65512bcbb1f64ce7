#include "lmk/tuner.hpp"

#include <algorithm>
#include <charconv>
#include <exception>
#include <thread>

#include "lmk/errors.hpp"

namespace lmk {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t");
  if (first == std::string::npos) {
    return {};
  }
  const auto last = s.find_last_not_of(" \t");
  return s.substr(first, last - first + 1);
}

bool is_numeric_param(const std::string& name) {
  return name != "penalty_condition";
}

double numeric_value(const std::string& name, const std::string& value) {
  if (value == "inf" || value == "+inf") {
    return kHardFilterDisabled;
  }
  double v = 0.0;
  const auto* first = value.data();
  const auto* last = first + value.size();
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) {
    throw ConfigError("bad grid value for " + name + ": " + value);
  }
  return v;
}

// Validates a single candidate by applying it to a scratch config.
void check_value(TuneTarget target, const std::string& name,
                 const std::string& value) {
  if (target == TuneTarget::map_at_100) {
    AdjustmentConfig scratch;
    set_rerank_param(scratch, name, value);
  } else {
    RecognitionConfig scratch;
    set_recognize_param(scratch, name, value);
  }
}

std::size_t checked_grid_size(const Grid& grid) {
  std::size_t total = 1;
  for (const auto& values : grid.param_values) {
    if (values.empty()) {
      throw ConfigError("empty candidate list in grid");
    }
    if (total > grid.cap / values.size() + 1) {
      throw GridTooLargeError("grid size exceeds cap " +
                              std::to_string(grid.cap));
    }
    total *= values.size();
  }
  if (total > grid.cap) {
    throw GridTooLargeError("grid size " + std::to_string(total) +
                            " exceeds cap " + std::to_string(grid.cap));
  }
  return total;
}

std::vector<std::string> row_values(const Grid& grid, std::size_t index) {
  std::vector<std::string> values(grid.param_names.size());
  // Odometer decode, rightmost parameter fastest.
  for (std::size_t p = grid.param_names.size(); p-- > 0;) {
    const auto& candidates = grid.param_values[p];
    values[p] = candidates[index % candidates.size()];
    index /= candidates.size();
  }
  return values;
}

template <class Score>
TuneResult run_grid(const Grid& grid, int threads, Score&& score) {
  const std::size_t total = checked_grid_size(grid);
  TuneResult result;
  result.param_names = grid.param_names;
  result.table.resize(total);

  const std::size_t workers = std::min<std::size_t>(
      std::max(threads, 1), std::max<std::size_t>(total, 1));
  std::vector<std::exception_ptr> errors(workers);
  auto evaluate = [&](std::size_t begin, std::size_t end, std::size_t slot) {
    try {
      for (std::size_t i = begin; i < end; ++i) {
        auto values = row_values(grid, i);
        const double s = score(values);
        result.table[i] = TuneRow{std::move(values), s};
      }
    } catch (...) {
      errors[slot] = std::current_exception();
    }
  };
  if (workers <= 1) {
    evaluate(0, total, 0);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back(evaluate, total * w / workers,
                        total * (w + 1) / workers, w);
    }
    for (auto& th : pool) {
      th.join();
    }
  }
  for (const auto& err : errors) {
    if (err) {
      std::rethrow_exception(err);
    }
  }

  result.best_index = 0;
  result.best_score = result.table.empty() ? 0.0 : result.table[0].score;
  for (std::size_t i = 1; i < result.table.size(); ++i) {
    if (result.table[i].score > result.best_score) {
      result.best_index = i;
      result.best_score = result.table[i].score;
    }
  }
  return result;
}

}  // namespace

ConfigFile::Entries TuneResult::best_entries() const {
  ConfigFile::Entries entries;
  entries.reserve(param_names.size());
  for (std::size_t p = 0; p < param_names.size(); ++p) {
    entries.emplace_back(param_names[p], table[best_index].values[p]);
  }
  return entries;
}

Grid make_grid(const ConfigFile& file, TuneTarget target, std::size_t cap) {
  const auto* entries = file.find("grid");
  if (entries == nullptr) {
    throw ConfigError("grid file has no [grid] section");
  }
  const auto& names = target == TuneTarget::map_at_100
                          ? rerank_param_names()
                          : recognize_param_names();

  Grid grid;
  grid.target = target;
  grid.cap = cap;
  for (const auto& name : names) {
    const auto it = std::find_if(
        entries->begin(), entries->end(),
        [&name](const auto& entry) { return entry.first == name; });
    if (it == entries->end()) {
      continue;
    }
    std::vector<std::string> values;
    std::size_t start = 0;
    const std::string& raw = it->second;
    while (start <= raw.size()) {
      const auto comma = raw.find(',', start);
      const std::string token =
          trim(comma == std::string::npos ? raw.substr(start)
                                          : raw.substr(start, comma - start));
      if (token.empty()) {
        throw ConfigError("empty candidate for grid parameter " + name);
      }
      check_value(target, name, token);
      values.push_back(token);
      if (comma == std::string::npos) {
        break;
      }
      start = comma + 1;
    }
    if (is_numeric_param(name)) {
      std::stable_sort(values.begin(), values.end(),
                       [&name](const std::string& a, const std::string& b) {
                         return numeric_value(name, a) < numeric_value(name, b);
                       });
    } else {
      std::sort(values.begin(), values.end());
    }
    grid.param_names.push_back(name);
    grid.param_values.push_back(std::move(values));
  }
  for (const auto& [key, value] : *entries) {
    if (std::find(names.begin(), names.end(), key) == names.end()) {
      throw ConfigError("grid parameter '" + key +
                        "' is not valid for this target");
    }
  }
  if (grid.param_names.empty()) {
    throw ConfigError("grid has no parameters for this target");
  }
  checked_grid_size(grid);
  return grid;
}

std::size_t grid_max_int(const Grid& grid, const std::string& name,
                         std::size_t fallback) {
  for (std::size_t p = 0; p < grid.param_names.size(); ++p) {
    if (grid.param_names[p] == name) {
      std::size_t max_value = 0;
      for (const auto& value : grid.param_values[p]) {
        max_value = std::max(
            max_value, std::size_t(numeric_value(name, value)));
      }
      return max_value;
    }
  }
  return fallback;
}

AdjustmentConfig materialize_rerank(const Grid& grid,
                                    const std::vector<std::string>& values) {
  AdjustmentConfig cfg;
  for (std::size_t p = 0; p < grid.param_names.size(); ++p) {
    set_rerank_param(cfg, grid.param_names[p], values[p]);
  }
  return cfg;
}

RecognitionConfig materialize_recognize(const Grid& grid,
                                        const std::vector<std::string>& values) {
  RecognitionConfig cfg;
  for (std::size_t p = 0; p < grid.param_names.size(); ++p) {
    set_recognize_param(cfg, grid.param_names[p], values[p]);
  }
  return cfg;
}

TuneResult tune_rerank(const Grid& grid, const std::vector<RankedList>& base,
                       const TripleMap& query_preds,
                       const TripleMap& index_preds,
                       const RetrievalTruth& truth, int threads) {
  if (grid.target != TuneTarget::map_at_100) {
    throw ConfigError("grid target is not map_at_100");
  }
  return run_grid(grid, threads, [&](const std::vector<std::string>& values) {
    const auto cfg = materialize_rerank(grid, values);
    const auto reranked = rerank_lists(base, query_preds, index_preds, cfg);
    RetrievalSubmission submission;
    submission.reserve(reranked.size());
    for (const auto& list : reranked) {
      std::vector<ImageId> ids;
      ids.reserve(list.neighbors.size());
      for (const auto& nb : list.neighbors) {
        ids.push_back(nb.index_id);
      }
      submission.emplace_back(list.query_id, std::move(ids));
    }
    return map_at_100(submission, truth);
  });
}

TuneResult tune_recognize(const Grid& grid, const RecognitionCache& cache,
                          const ClassCatalog& catalog,
                          const TripleMap* external_probs,
                          const RecognitionTruth& truth, int threads) {
  if (grid.target != TuneTarget::gap) {
    throw ConfigError("grid target is not gap");
  }
  return run_grid(grid, threads, [&](const std::vector<std::string>& values) {
    const auto cfg = materialize_recognize(grid, values);
    const auto results =
        recognize_from_cache(cache, catalog, external_probs, cfg);
    return gap(results, truth);
  });
}

}  // namespace lmk

#include "lmk/class_predict.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>

#include "lmk/errors.hpp"

namespace lmk {

PredictionTriple make_triple(ImageId id, std::vector<ClassPrediction> scored) {
  std::sort(scored.begin(), scored.end(),
            [](const ClassPrediction& a, const ClassPrediction& b) {
              if (a.confidence != b.confidence) {
                return a.confidence > b.confidence;
              }
              return a.cls < b.cls;
            });
  PredictionTriple triple;
  triple.image_id = std::move(id);
  for (std::size_t i = 0; i < std::min<std::size_t>(3, scored.size()); ++i) {
    triple.slots[i] = scored[i];
  }
  return triple;
}

std::vector<PredictionTriple> predict_top3(const EmbeddingMatrix& images,
                                           const EmbeddingMatrix& train,
                                           const LabelTable& train_labels,
                                           std::size_t k,
                                           const SearchOptions& opts) {
  std::unordered_map<std::string_view, ClassId> label_of;
  label_of.reserve(train.rows());
  for (std::size_t i = 0; i < train.rows(); ++i) {
    const auto it = train_labels.entries.find(train.ids[i]);
    if (it == train_labels.entries.end()) {
      throw MissingLabelError("train id has no label: " + train.ids[i]);
    }
    label_of.emplace(train.ids[i], it->second);
  }

  const auto lists = cosine_topk(images, train, k, opts);

  std::vector<PredictionTriple> triples;
  triples.reserve(lists.size());
  for (const auto& list : lists) {
    // std::map keeps class ids ordered, which pins the tie-break and the
    // floating-point summation order.
    std::map<ClassId, double> scores;
    double total = 0.0;
    for (const auto& nb : list.neighbors) {
      const ClassId cls = label_of.at(nb.index_id);
      if (cls == kNonLandmark) {
        continue;
      }
      const double clamped = std::max(nb.score, 0.0);
      scores[cls] += clamped;
      total += clamped;
    }
    std::vector<ClassPrediction> scored;
    if (total > 0.0) {
      scored.reserve(scores.size());
      for (const auto& [cls, s] : scores) {
        scored.push_back(ClassPrediction{cls, s / total});
      }
    }
    triples.push_back(make_triple(list.query_id, std::move(scored)));
  }
  return triples;
}

TripleMap load_external_probs(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw FormatError("cannot open probs file: " + path.string());
  }
  std::string line;
  if (!std::getline(in, line)) {
    throw FormatError("empty probs file: " + path.string());
  }
  if (!line.empty() && line.back() == '\r') {
    line.pop_back();
  }
  if (line != "id,class,prob") {
    throw FormatError("probs header must be 'id,class,prob', got: " + line);
  }

  std::unordered_map<ImageId, std::vector<ClassPrediction>> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    if (line.empty()) {
      continue;
    }
    const auto c1 = line.find(',');
    const auto c2 = c1 == std::string::npos ? c1 : line.find(',', c1 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos ||
        line.find(',', c2 + 1) != std::string::npos) {
      throw FormatError("probs line " + std::to_string(line_no) +
                        " must have exactly three fields: " + line);
    }
    const std::string id = line.substr(0, c1);
    const std::string cls_field = line.substr(c1 + 1, c2 - c1 - 1);
    const std::string prob_field = line.substr(c2 + 1);
    if (id.empty()) {
      throw FormatError("empty id at probs line " + std::to_string(line_no));
    }

    ClassId cls = 0;
    {
      const auto* first = cls_field.data();
      const auto* last = first + cls_field.size();
      const auto [ptr, ec] = std::from_chars(first, last, cls);
      if (ec != std::errc() || ptr != last || cls < 0) {
        throw FormatError("bad class at probs line " +
                          std::to_string(line_no) + ": " + cls_field);
      }
    }
    double prob = 0.0;
    {
      const auto* first = prob_field.data();
      const auto* last = first + prob_field.size();
      const auto [ptr, ec] = std::from_chars(first, last, prob);
      if (ec != std::errc() || ptr != last || !std::isfinite(prob)) {
        throw FormatError("bad prob at probs line " + std::to_string(line_no) +
                          ": " + prob_field);
      }
    }
    if (prob < 0.0 || prob > 1.0) {
      throw RangeError("prob outside [0,1] at line " + std::to_string(line_no) +
                       ": " + prob_field);
    }

    auto& slots = rows[id];
    if (slots.size() >= 3) {
      throw CardinalityError("more than 3 prob rows for id: " + id);
    }
    for (const auto& existing : slots) {
      if (existing.cls == cls) {
        throw FormatError("duplicate class " + std::to_string(cls) +
                          " for id: " + id);
      }
    }
    slots.push_back(ClassPrediction{cls, prob});
  }

  TripleMap triples;
  triples.reserve(rows.size());
  for (auto& [id, slots] : rows) {
    triples.emplace(id, make_triple(id, std::move(slots)));
  }
  return triples;
}

}  // namespace lmk

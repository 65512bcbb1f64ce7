#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "lmk/class_predict.hpp"
#include "lmk/knn.hpp"
#include "lmk/metrics.hpp"
#include "lmk/recognize.hpp"

namespace lmk {

// CSV formats. All writers emit '\n' line endings, no trailing whitespace,
// and print scores/confidences with 6 decimal places, so identical inputs
// produce byte-identical files.

std::string format_fixed6(double v);

// query_id,index_id,rank,score — one row per neighbor, rank starting at 1.
void write_ranked_csv(const std::vector<RankedList>& lists,
                      const std::filesystem::path& path);
std::vector<RankedList> read_ranked_csv(const std::filesystem::path& path);

// id,rank,class,confidence — exactly three rows per image; sentinel slots
// have an empty class field.
void write_preds_csv(const std::vector<PredictionTriple>& triples,
                     const std::filesystem::path& path);
TripleMap read_preds_csv(const std::filesystem::path& path);

// id,images — images is a space-separated id list, best first.
void write_retrieval_submission(const std::vector<RankedList>& lists,
                                const std::filesystem::path& path);
RetrievalSubmission read_retrieval_submission(
    const std::filesystem::path& path);
RetrievalTruth read_retrieval_truth(const std::filesystem::path& path);

// id,landmarks — "class confidence" or empty for a NONE result.
void write_recognition_submission(const std::vector<RecognitionResult>& results,
                                  const std::filesystem::path& path);
std::vector<RecognitionResult> read_recognition_submission(
    const std::filesystem::path& path);
RecognitionTruth read_recognition_truth(const std::filesystem::path& path);

}  // namespace lmk

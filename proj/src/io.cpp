#include "lmk/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "lmk/errors.hpp"

namespace lmk {

namespace {

std::ifstream open_reader(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw FormatError("cannot open file: " + path.string());
  }
  return in;
}

std::ofstream open_writer(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw FormatError("cannot write file: " + path.string());
  }
  return out;
}

void finish_writer(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) {
    throw FormatError("write failed: " + path.string());
  }
}

bool next_line(std::istream& in, std::string& line) {
  if (!std::getline(in, line)) {
    return false;
  }
  if (!line.empty() && line.back() == '\r') {
    line.pop_back();
  }
  return true;
}

void expect_header(std::istream& in, const std::string& expected,
                   const std::filesystem::path& path) {
  std::string line;
  if (!next_line(in, line) || line != expected) {
    throw FormatError(path.string() + ": expected header '" + expected + "'");
  }
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    if (comma == std::string::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

std::vector<std::string> split_spaces(const std::string& s) {
  std::vector<std::string> tokens;
  std::size_t start = 0;
  while (start < s.size()) {
    const auto space = s.find(' ', start);
    if (space == std::string::npos) {
      tokens.push_back(s.substr(start));
      break;
    }
    if (space > start) {
      tokens.push_back(s.substr(start, space - start));
    }
    start = space + 1;
  }
  return tokens;
}

ClassId parse_class(const std::string& field, const std::string& context) {
  ClassId cls = 0;
  const auto* first = field.data();
  const auto* last = first + field.size();
  const auto [ptr, ec] = std::from_chars(first, last, cls);
  if (ec != std::errc() || ptr != last || cls < 0) {
    throw FormatError(context + ": bad class id '" + field + "'");
  }
  return cls;
}

double parse_number(const std::string& field, const std::string& context) {
  double v = 0.0;
  const auto* first = field.data();
  const auto* last = first + field.size();
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || !std::isfinite(v)) {
    throw FormatError(context + ": bad number '" + field + "'");
  }
  return v;
}

}  // namespace

std::string format_fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

void write_ranked_csv(const std::vector<RankedList>& lists,
                      const std::filesystem::path& path) {
  auto out = open_writer(path);
  out << "query_id,index_id,rank,score\n";
  for (const auto& list : lists) {
    for (std::size_t i = 0; i < list.neighbors.size(); ++i) {
      out << list.query_id << ',' << list.neighbors[i].index_id << ','
          << (i + 1) << ',' << format_fixed6(list.neighbors[i].score) << '\n';
    }
  }
  finish_writer(out, path);
}

std::vector<RankedList> read_ranked_csv(const std::filesystem::path& path) {
  auto in = open_reader(path);
  expect_header(in, "query_id,index_id,rank,score", path);

  std::vector<RankedList> lists;
  std::unordered_set<std::string> closed;
  std::string line;
  std::size_t line_no = 1;
  while (next_line(in, line)) {
    ++line_no;
    if (line.empty()) {
      continue;
    }
    const std::string context = path.string() + ":" + std::to_string(line_no);
    const auto fields = split_csv(line);
    if (fields.size() != 4 || fields[0].empty() || fields[1].empty()) {
      throw FormatError(context + ": expected query_id,index_id,rank,score");
    }
    if (lists.empty() || lists.back().query_id != fields[0]) {
      if (!closed.insert(fields[0]).second) {
        throw FormatError(context + ": rows for query '" + fields[0] +
                          "' are not contiguous");
      }
      lists.push_back(RankedList{fields[0], {}});
    }
    auto& list = lists.back();
    const auto rank = parse_number(fields[2], context);
    if (rank != double(list.neighbors.size() + 1)) {
      throw FormatError(context + ": rank out of sequence");
    }
    for (const auto& nb : list.neighbors) {
      if (nb.index_id == fields[1]) {
        throw DuplicateInListError(context + ": duplicate index id '" +
                                   fields[1] + "'");
      }
    }
    list.neighbors.push_back(
        Neighbor{fields[1], parse_number(fields[3], context)});
  }
  return lists;
}

void write_preds_csv(const std::vector<PredictionTriple>& triples,
                     const std::filesystem::path& path) {
  auto out = open_writer(path);
  out << "id,rank,class,confidence\n";
  for (const auto& triple : triples) {
    for (std::size_t i = 0; i < 3; ++i) {
      const auto& slot = triple.slots[i];
      out << triple.image_id << ',' << (i + 1) << ',';
      if (slot.cls != kNoClass) {
        out << slot.cls;
      }
      out << ',' << format_fixed6(slot.confidence) << '\n';
    }
  }
  finish_writer(out, path);
}

TripleMap read_preds_csv(const std::filesystem::path& path) {
  auto in = open_reader(path);
  expect_header(in, "id,rank,class,confidence", path);

  std::unordered_map<ImageId, std::vector<ClassPrediction>> rows;
  std::string line;
  std::size_t line_no = 1;
  while (next_line(in, line)) {
    ++line_no;
    if (line.empty()) {
      continue;
    }
    const std::string context = path.string() + ":" + std::to_string(line_no);
    const auto fields = split_csv(line);
    if (fields.size() != 4 || fields[0].empty()) {
      throw FormatError(context + ": expected id,rank,class,confidence");
    }
    const auto rank = parse_number(fields[1], context);
    if (rank < 1 || rank > 3) {
      throw FormatError(context + ": rank must be 1..3");
    }
    if (fields[2].empty()) {
      continue;  // sentinel slot
    }
    const ClassId cls = parse_class(fields[2], context);
    const double confidence = parse_number(fields[3], context);
    if (confidence < 0.0) {
      throw FormatError(context + ": negative confidence");
    }
    auto& slots = rows[fields[0]];
    if (slots.size() >= 3) {
      throw FormatError(context + ": more than 3 classes for id '" +
                        fields[0] + "'");
    }
    for (const auto& existing : slots) {
      if (existing.cls == cls) {
        throw FormatError(context + ": duplicate class for id '" + fields[0] +
                          "'");
      }
    }
    slots.push_back(ClassPrediction{cls, confidence});
  }

  TripleMap triples;
  triples.reserve(rows.size());
  for (auto& [id, slots] : rows) {
    triples.emplace(id, make_triple(id, std::move(slots)));
  }
  return triples;
}

void write_retrieval_submission(const std::vector<RankedList>& lists,
                                const std::filesystem::path& path) {
  auto out = open_writer(path);
  out << "id,images\n";
  for (const auto& list : lists) {
    out << list.query_id << ',';
    const std::size_t depth =
        std::min(list.neighbors.size(), kSubmissionDepth);
    for (std::size_t i = 0; i < depth; ++i) {
      if (i > 0) {
        out << ' ';
      }
      out << list.neighbors[i].index_id;
    }
    out << '\n';
  }
  finish_writer(out, path);
}

RetrievalSubmission read_retrieval_submission(
    const std::filesystem::path& path) {
  auto in = open_reader(path);
  expect_header(in, "id,images", path);

  RetrievalSubmission submission;
  std::unordered_set<std::string> seen;
  std::string line;
  std::size_t line_no = 1;
  while (next_line(in, line)) {
    ++line_no;
    if (line.empty()) {
      continue;
    }
    const std::string context = path.string() + ":" + std::to_string(line_no);
    const auto comma = line.find(',');
    if (comma == std::string::npos || comma == 0 ||
        line.find(',', comma + 1) != std::string::npos) {
      throw FormatError(context + ": expected id,images");
    }
    std::string id = line.substr(0, comma);
    if (!seen.insert(id).second) {
      throw FormatError(context + ": duplicate query id '" + id + "'");
    }
    submission.emplace_back(std::move(id), split_spaces(line.substr(comma + 1)));
  }
  return submission;
}

RetrievalTruth read_retrieval_truth(const std::filesystem::path& path) {
  RetrievalTruth truth;
  for (auto& [id, ids] : read_retrieval_submission(path)) {
    truth.relevant.emplace(std::move(id),
                           std::unordered_set<ImageId>(ids.begin(), ids.end()));
  }
  return truth;
}

void write_recognition_submission(const std::vector<RecognitionResult>& results,
                                  const std::filesystem::path& path) {
  auto out = open_writer(path);
  out << "id,landmarks\n";
  for (const auto& result : results) {
    out << result.query_id << ',';
    if (result.cls != kNoClass) {
      out << result.cls << ' ' << format_fixed6(result.confidence);
    }
    out << '\n';
  }
  finish_writer(out, path);
}

std::vector<RecognitionResult> read_recognition_submission(
    const std::filesystem::path& path) {
  auto in = open_reader(path);
  expect_header(in, "id,landmarks", path);

  std::vector<RecognitionResult> results;
  std::string line;
  std::size_t line_no = 1;
  while (next_line(in, line)) {
    ++line_no;
    if (line.empty()) {
      continue;
    }
    const std::string context = path.string() + ":" + std::to_string(line_no);
    const auto comma = line.find(',');
    if (comma == std::string::npos || comma == 0 ||
        line.find(',', comma + 1) != std::string::npos) {
      throw FormatError(context + ": expected id,landmarks");
    }
    RecognitionResult result;
    result.query_id = line.substr(0, comma);
    const auto tokens = split_spaces(line.substr(comma + 1));
    if (tokens.size() == 2) {
      result.cls = parse_class(tokens[0], context);
      result.confidence = parse_number(tokens[1], context);
      if (result.confidence < 0.0) {
        throw FormatError(context + ": negative confidence");
      }
    } else if (!tokens.empty()) {
      throw FormatError(context + ": landmarks must be 'class confidence'");
    }
    results.push_back(std::move(result));
  }
  return results;
}

RecognitionTruth read_recognition_truth(const std::filesystem::path& path) {
  auto in = open_reader(path);
  expect_header(in, "id,landmarks", path);

  RecognitionTruth truth;
  std::string line;
  std::size_t line_no = 1;
  while (next_line(in, line)) {
    ++line_no;
    if (line.empty()) {
      continue;
    }
    const std::string context = path.string() + ":" + std::to_string(line_no);
    const auto comma = line.find(',');
    if (comma == std::string::npos || comma == 0 ||
        line.find(',', comma + 1) != std::string::npos) {
      throw FormatError(context + ": expected id,landmarks");
    }
    std::string id = line.substr(0, comma);
    const std::string value = line.substr(comma + 1);
    const ClassId cls = value.empty() ? kNoClass : parse_class(value, context);
    if (!truth.classes.emplace(std::move(id), cls).second) {
      throw FormatError(context + ": duplicate query id");
    }
  }
  return truth;
}

}  // namespace lmk

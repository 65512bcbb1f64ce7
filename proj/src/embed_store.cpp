#include "lmk/embed_store.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <unordered_set>

#include "lmk/errors.hpp"

namespace lmk {

namespace {

constexpr char kMagic[4] = {'E', 'M', 'B', '1'};
constexpr std::uint32_t kVersion = 1;

static_assert(std::endian::native == std::endian::little,
              "embedding format i/o assumes a little-endian host");

std::uint32_t read_u32(std::istream& in) {
  std::uint32_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  return v;
}

void write_u32(std::ostream& out, std::uint32_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

std::vector<ImageId> read_id_lines(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw FormatError("cannot open ids file: " + path.string());
  }
  std::vector<ImageId> ids;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    if (line.empty()) {
      throw FormatError("empty id at line " + std::to_string(ids.size() + 1) +
                        " in " + path.string());
    }
    if (line.find(',') != std::string::npos) {
      throw FormatError("id contains a comma: " + line);
    }
    ids.push_back(std::move(line));
  }
  return ids;
}

void check_unique(const std::vector<ImageId>& ids, const std::string& where) {
  std::unordered_set<std::string_view> seen;
  seen.reserve(ids.size());
  for (const auto& id : ids) {
    if (!seen.insert(id).second) {
      throw DuplicateIdError("duplicate id in " + where + ": " + id);
    }
  }
}

}  // namespace

EmbeddingMatrix load_embeddings(const std::filesystem::path& matrix_path,
                                const std::filesystem::path& ids_path) {
  std::ifstream in(matrix_path, std::ios::binary);
  if (!in) {
    throw FormatError("cannot open matrix file: " + matrix_path.string());
  }

  char magic[4] = {};
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0) {
    throw FormatError("bad magic in " + matrix_path.string());
  }
  const std::uint32_t version = read_u32(in);
  if (!in || version != kVersion) {
    throw FormatError("unsupported version " + std::to_string(version) +
                      " in " + matrix_path.string());
  }
  const std::uint32_t n = read_u32(in);
  const std::uint32_t dim = read_u32(in);
  if (!in) {
    throw FormatError("incomplete header in " + matrix_path.string());
  }
  if (dim == 0) {
    throw FormatError("dim must be positive in " + matrix_path.string());
  }

  const std::uintmax_t payload =
      std::uintmax_t(n) * dim * sizeof(float);
  const std::uintmax_t expected = 16 + payload;
  const std::uintmax_t actual = std::filesystem::file_size(matrix_path);
  if (actual != expected) {
    throw TruncationError("file length " + std::to_string(actual) +
                          " does not match header n*dim (expected " +
                          std::to_string(expected) + ") in " +
                          matrix_path.string());
  }

  EmbeddingMatrix m;
  m.dim = dim;
  m.data.resize(std::size_t(n) * dim);
  in.read(reinterpret_cast<char*>(m.data.data()),
          static_cast<std::streamsize>(payload));
  if (!in && payload > 0) {
    throw TruncationError("short read of " + matrix_path.string());
  }

  m.ids = read_id_lines(ids_path);
  if (m.ids.size() != n) {
    throw CountMismatchError("ids file has " + std::to_string(m.ids.size()) +
                             " lines but header says n=" + std::to_string(n));
  }
  check_unique(m.ids, ids_path.string());
  return m;
}

void save_embeddings(const EmbeddingMatrix& m,
                     const std::filesystem::path& matrix_path,
                     const std::filesystem::path& ids_path) {
  std::ofstream out(matrix_path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw FormatError("cannot write matrix file: " + matrix_path.string());
  }
  out.write(kMagic, 4);
  write_u32(out, kVersion);
  write_u32(out, static_cast<std::uint32_t>(m.rows()));
  write_u32(out, m.dim);
  out.write(reinterpret_cast<const char*>(m.data.data()),
            static_cast<std::streamsize>(m.data.size() * sizeof(float)));
  if (!out) {
    throw FormatError("write failed: " + matrix_path.string());
  }

  std::ofstream ids_out(ids_path, std::ios::binary | std::ios::trunc);
  if (!ids_out) {
    throw FormatError("cannot write ids file: " + ids_path.string());
  }
  for (const auto& id : m.ids) {
    ids_out << id << '\n';
  }
  if (!ids_out) {
    throw FormatError("write failed: " + ids_path.string());
  }
}

EmbeddingMatrix normalize(const EmbeddingMatrix& m) {
  EmbeddingMatrix out = m;
  for (std::size_t i = 0; i < out.rows(); ++i) {
    auto row = out.row(i);
    double sq = 0.0;
    for (float v : row) {
      sq += double(v) * double(v);
    }
    const double norm = std::sqrt(sq);
    if (norm < kZeroNormThreshold) {
      throw ZeroVectorError("zero vector for id: " + out.ids[i]);
    }
    if (std::abs(norm - 1.0) <= 1e-6) {
      continue;
    }
    for (float& v : row) {
      v = static_cast<float>(double(v) / norm);
    }
  }
  return out;
}

LabelTable load_labels(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw FormatError("cannot open labels file: " + path.string());
  }
  std::string line;
  if (!std::getline(in, line)) {
    throw FormatError("empty labels file: " + path.string());
  }
  if (!line.empty() && line.back() == '\r') {
    line.pop_back();
  }
  if (line != "id,landmark_id") {
    throw FormatError("labels header must be 'id,landmark_id', got: " + line);
  }

  LabelTable table;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    if (line.empty()) {
      continue;
    }
    const auto comma = line.find(',');
    if (comma == std::string::npos ||
        line.find(',', comma + 1) != std::string::npos) {
      throw FormatError("labels line " + std::to_string(line_no) +
                        " must have exactly two fields: " + line);
    }
    std::string id = line.substr(0, comma);
    const std::string cls_field = line.substr(comma + 1);
    if (id.empty()) {
      throw FormatError("empty id at labels line " + std::to_string(line_no));
    }

    ClassId cls = kNonLandmark;
    if (!cls_field.empty()) {
      std::int64_t value = 0;
      const auto* first = cls_field.data();
      const auto* last = first + cls_field.size();
      const auto [ptr, ec] = std::from_chars(first, last, value);
      if (ec != std::errc() || ptr != last || value < 0) {
        throw FormatError("non-integer class at labels line " +
                          std::to_string(line_no) + ": " + cls_field);
      }
      cls = value;
    }
    if (!table.entries.emplace(std::move(id), cls).second) {
      throw DuplicateIdError("duplicate id in labels: " +
                             line.substr(0, comma));
    }
  }
  return table;
}

ClassCatalog build_catalog(const LabelTable& labels) {
  ClassCatalog catalog;
  for (const auto& [id, cls] : labels.entries) {
    if (cls == kNonLandmark) {
      continue;
    }
    ++catalog.counts[cls];
  }
  if (catalog.counts.empty()) {
    throw EmptyCatalogError("labels contain no landmark classes");
  }
  for (const auto& [cls, count] : catalog.counts) {
    catalog.max_count = std::max(catalog.max_count, count);
  }
  return catalog;
}

}  // namespace lmk

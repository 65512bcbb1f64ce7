#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "lmk/recognize.hpp"
#include "lmk/rerank.hpp"

namespace lmk {

// Line-oriented config: [section] headers, key = value lines, '#' comments.
// Section and key sets are validated against the pipeline schema; unknown
// names and duplicate keys are rejected.
struct ConfigFile {
  using Entries = std::vector<std::pair<std::string, std::string>>;
  std::vector<std::pair<std::string, Entries>> sections;

  const Entries* find(const std::string& name) const;
};

ConfigFile parse_config_text(const std::string& text,
                             const std::string& origin);
ConfigFile parse_config_file(const std::filesystem::path& path);

void write_config_file(const std::filesystem::path& path,
                       const std::string& section,
                       const ConfigFile::Entries& entries);

// Section readers; a missing section yields the documented defaults.
AdjustmentConfig read_rerank_section(const ConfigFile& cfg);
RecognitionConfig read_recognize_section(const ConfigFile& cfg);

struct IoSettings {
  std::optional<int> threads;
  std::optional<std::size_t> query_block;
  std::optional<std::size_t> gallery_block;
};
IoSettings read_io_section(const ConfigFile& cfg);

struct TuneSettings {
  std::optional<std::size_t> cap;
};
TuneSettings read_tune_section(const ConfigFile& cfg);

// Single-parameter setters shared by the section readers and the tuner's
// grid materialization.
void set_rerank_param(AdjustmentConfig& cfg, const std::string& key,
                      const std::string& value);
void set_recognize_param(RecognitionConfig& cfg, const std::string& key,
                         const std::string& value);

// Canonical parameter orders used for grid enumeration and table columns.
const std::vector<std::string>& rerank_param_names();
const std::vector<std::string>& recognize_param_names();

}  // namespace lmk

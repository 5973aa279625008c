#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "neuroquery/kb.hpp"

namespace fixtures {

inline std::filesystem::path data(const std::string& name) { return std::filesystem::path(NEUROQUERY_TEST_DATA) / name; }

inline std::filesystem::path query_file(const std::string& name) {
  return std::filesystem::path(NEUROQUERY_TEST_QUERIES) / name;
}

inline std::string read(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("missing fixture " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline std::string query(const std::string& name) { return read(query_file(name)); }

inline void load_catalog(neuroquery::KnowledgeBase& kb) {
  kb.load_csv(data("catalog/asin_key_properties.csv"), neuroquery::CsvKind::properties);
  kb.load_csv(data("catalog/asin_reviews.csv"), neuroquery::CsvKind::reviews);
}

}  // namespace fixtures

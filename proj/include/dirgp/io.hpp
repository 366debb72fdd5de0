#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "dirgp/gpd.hpp"

namespace dirgp {

// Shortest representation that parses back to the same double; "inf", "-inf"
// and "nan" spelled literally.
std::string format_double(double v);
double parse_double(const std::string& s);

// A delimited text file: one optional `# key=value ...` meta line, a header
// row naming the columns, then data rows. Cells are free-form tokens without
// commas; numeric cells round-trip exactly.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
  std::map<std::string, std::string> meta;

  std::size_t col(const std::string& name) const;  // IoError if absent
  double num(std::size_t row, std::size_t column) const;
};

void write_table(const std::filesystem::path& path, const Table& table);
Table read_table(const std::filesystem::path& path);

// All writes go to a temporary file first and are renamed into place, so a
// file either exists complete or not at all.
void write_text_atomic(const std::filesystem::path& path, const std::string& content);
std::string read_text(const std::filesystem::path& path);

std::uint64_t fnv1a64(const std::string& bytes);
std::string hash_hex(const std::string& bytes);  // 16 hex digits of fnv1a64

struct SampleFile {
  PeaksSample sample;
  std::string label;
  std::uint64_t seed = 0;
  std::string config_hash;
};

// Sample files carry `# case=<label> seed=<int> period=<real>` plus the
// producing config hash, then angle_deg,size rows.
void save_sample(const std::filesystem::path& path, const PeaksSample& sample,
                 const std::string& label, std::uint64_t seed,
                 const std::string& config_hash);
SampleFile load_sample(const std::filesystem::path& path);

}  // namespace dirgp

#include "dirgp/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <system_error>

#include "dirgp/errors.hpp"

namespace dirgp {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& s) {
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  const auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc{} || res.ptr != last) {
    throw IoError("cannot parse number: '" + s + "'");
  }
  return v;
}

std::size_t Table::col(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i] == name) return i;
  }
  throw IoError("table has no column '" + name + "'");
}

double Table::num(std::size_t row, std::size_t column) const {
  return parse_double(rows.at(row).at(column));
}

void write_text_atomic(const std::filesystem::path& path, const std::string& content) {
  std::error_code ec;
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + tmp.string());
    out << content;
    if (!out.flush()) throw IoError("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot rename " + tmp.string() + " to " + path.string());
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open for reading: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = line.find(sep, start);
    if (pos == std::string::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

std::string meta_line(const std::map<std::string, std::string>& meta) {
  std::string line = "#";
  for (const auto& [k, v] : meta) line += " " + k + "=" + v;
  return line;
}

std::map<std::string, std::string> parse_meta(const std::string& line) {
  std::map<std::string, std::string> meta;
  std::istringstream ss(line.substr(1));
  std::string token;
  while (ss >> token) {
    const std::size_t eq = token.find('=');
    if (eq == std::string::npos) continue;
    meta[token.substr(0, eq)] = token.substr(eq + 1);
  }
  return meta;
}

void check_cell(const std::string& cell) {
  if (cell.find(',') != std::string::npos || cell.find('\n') != std::string::npos) {
    throw IoError("table cell contains a delimiter: '" + cell + "'");
  }
}

}  // namespace

void write_table(const std::filesystem::path& path, const Table& table) {
  std::string out;
  if (!table.meta.empty()) {
    out += meta_line(table.meta);
    out += '\n';
  }
  for (std::size_t i = 0; i < table.columns.size(); ++i) {
    check_cell(table.columns[i]);
    if (i) out += ',';
    out += table.columns[i];
  }
  out += '\n';
  for (const auto& row : table.rows) {
    if (row.size() != table.columns.size()) {
      throw IoError("table row width does not match header");
    }
    for (std::size_t i = 0; i < row.size(); ++i) {
      check_cell(row[i]);
      if (i) out += ',';
      out += row[i];
    }
    out += '\n';
  }
  write_text_atomic(path, out);
}

Table read_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open for reading: " + path.string());
  Table table;
  std::string line;
  bool have_header = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      if (!have_header) {
        auto meta = parse_meta(line);
        table.meta.insert(meta.begin(), meta.end());
      }
      continue;
    }
    if (!have_header) {
      table.columns = split(line, ',');
      have_header = true;
      continue;
    }
    auto cells = split(line, ',');
    if (cells.size() != table.columns.size()) {
      throw IoError("row width mismatch in " + path.string());
    }
    table.rows.push_back(std::move(cells));
  }
  if (!have_header) throw IoError("no header row in " + path.string());
  return table;
}

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const char c : bytes) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hash_hex(const std::string& bytes) {
  const std::uint64_t h = fnv1a64(bytes);
  char buf[17];
  static const char* digits = "0123456789abcdef";
  for (int i = 0; i < 16; ++i) {
    buf[15 - i] = digits[(h >> (4 * i)) & 0xF];
  }
  buf[16] = '\0';
  return std::string(buf);
}

void save_sample(const std::filesystem::path& path, const PeaksSample& sample,
                 const std::string& label, std::uint64_t seed,
                 const std::string& config_hash) {
  sample.validate();
  std::string out = "# case=" + label + " seed=" + std::to_string(seed) +
                    " period=" + format_double(sample.period);
  if (!config_hash.empty()) out += " config_hash=" + config_hash;
  out += "\nangle_deg,size\n";
  for (Eigen::Index i = 0; i < sample.size(); ++i) {
    out += format_double(sample.angles_deg[i]);
    out += ',';
    out += format_double(sample.sizes[i]);
    out += '\n';
  }
  write_text_atomic(path, out);
}

SampleFile load_sample(const std::filesystem::path& path) {
  const Table table = read_table(path);
  if (table.columns != std::vector<std::string>{"angle_deg", "size"}) {
    throw IoError("sample file must have columns angle_deg,size: " + path.string());
  }
  SampleFile file;
  if (const auto it = table.meta.find("case"); it != table.meta.end()) file.label = it->second;
  if (const auto it = table.meta.find("seed"); it != table.meta.end()) {
    file.seed = static_cast<std::uint64_t>(std::stoull(it->second));
  }
  if (const auto it = table.meta.find("config_hash"); it != table.meta.end()) {
    file.config_hash = it->second;
  }
  file.sample.period = 1.0;
  if (const auto it = table.meta.find("period"); it != table.meta.end()) {
    file.sample.period = parse_double(it->second);
  }
  const auto n = static_cast<Eigen::Index>(table.rows.size());
  file.sample.angles_deg.resize(n);
  file.sample.sizes.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    file.sample.angles_deg[i] = table.num(static_cast<std::size_t>(i), 0);
    file.sample.sizes[i] = table.num(static_cast<std::size_t>(i), 1);
  }
  file.sample.validate();
  return file;
}

}  // namespace dirgp

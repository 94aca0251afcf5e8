#include "zpdc/csv.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <stdexcept>

namespace zpdc {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {
std::string quote_if_needed(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}
}  // namespace

CsvWriter::CsvWriter(std::ostream& os, const std::vector<std::string>& header) : os_(os) {
  for (const auto& h : header) field(h);
  end_row();
}

void CsvWriter::separator() {
  if (row_open_) os_ << ',';
  row_open_ = true;
}

CsvWriter& CsvWriter::field(double v) {
  separator();
  os_ << format_double(v);
  return *this;
}

CsvWriter& CsvWriter::field(long v) {
  separator();
  os_ << v;
  return *this;
}

CsvWriter& CsvWriter::field(const std::string& v) {
  separator();
  os_ << quote_if_needed(v);
  return *this;
}

void CsvWriter::end_row() {
  os_ << '\n';
  row_open_ = false;
}

void atomic_write_file(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  fs::rename(tmp, target);
}

}  // namespace zpdc

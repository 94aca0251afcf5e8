#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace zpdc {

/// Minimal CSV emitter. Doubles are printed with %.17g so re-reading or
/// byte-comparing runs is lossless; strings are quoted when they contain
/// a comma, quote, or newline.
class CsvWriter {
public:
  CsvWriter(std::ostream& os, const std::vector<std::string>& header);

  CsvWriter& field(double v);
  CsvWriter& field(long v);
  CsvWriter& field(const std::string& v);
  void end_row();

private:
  void separator();
  std::ostream& os_;
  bool row_open_ = false;
};

std::string format_double(double v);

/// Writes content to path via a temporary file in the same directory and an
/// atomic rename, so a failed run never leaves a partial file behind.
void atomic_write_file(const std::string& path, const std::string& content);

}  // namespace zpdc

#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "h2ad/types.hpp"

namespace h2ad {

/// Nine significant digits, the precision used by every CSV the library writes.
inline std::string format_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header)
      : os_(path), width_(header.size()), path_(path) {
    if (!os_) throw InputError("cannot write " + path.string());
    row(header);
  }

  void row(const std::vector<std::string>& cells) {
    if (cells.size() != width_) throw InputError("CSV row width mismatch in " + path_.string());
    for (size_t i = 0; i < cells.size(); ++i) os_ << (i ? "," : "") << cells[i];
    os_ << '\n';
  }

  void flush() {
    os_.flush();
    if (!os_) throw InputError("failed writing " + path_.string());
  }

 private:
  std::ofstream os_;
  size_t width_;
  std::filesystem::path path_;
};

}  // namespace h2ad

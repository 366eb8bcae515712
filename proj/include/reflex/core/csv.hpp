// Copyright 2026 The Reflex Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef REFLEX_CORE_CSV_HPP_
#define REFLEX_CORE_CSV_HPP_

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace reflex {

/// Shortest round-trip decimal for a double; locale independent. Keeps
/// benchmark outputs byte-stable across reruns.
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  for (int prec = 1; prec < 17; ++prec) {
    char probe[40];
    std::snprintf(probe, sizeof(probe), "%.*g", prec, v);
    double back = 0.0;
    std::sscanf(probe, "%lf", &back);
    if (back == v) return std::string(probe);
  }
  return std::string(buf);
}

/// Row-oriented CSV writer. Cells are appended with `col`, rows closed with
/// `end_row`; content is buffered and flushed on `save`.
class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header) {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (i > 0) body_ += ',';
      body_ += header[i];
    }
    body_ += '\n';
  }

  CsvWriter& col(const std::string& v) {
    cell(v);
    return *this;
  }
  CsvWriter& col(double v) {
    cell(format_double(v));
    return *this;
  }
  CsvWriter& col(int v) {
    cell(std::to_string(v));
    return *this;
  }
  CsvWriter& col(long v) {
    cell(std::to_string(v));
    return *this;
  }
  CsvWriter& col(std::size_t v) {
    cell(std::to_string(v));
    return *this;
  }

  void end_row() {
    body_ += '\n';
    row_open_ = false;
  }

  const std::string& str() const { return body_; }

  void save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << body_;
  }

 private:
  void cell(const std::string& v) {
    if (row_open_) body_ += ',';
    body_ += v;
    row_open_ = true;
  }

  std::string body_;
  bool row_open_ = false;
};

}  // namespace reflex

#endif  // REFLEX_CORE_CSV_HPP_

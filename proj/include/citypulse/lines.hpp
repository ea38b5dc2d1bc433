#pragma once

#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace citypulse {

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Sequential line reader over a plain or gzip-compressed file (".gz"
// extension selects the codec). Strips trailing '\r' and '\n'.
class LineReader {
 public:
  explicit LineReader(const std::string& path);
  ~LineReader();
  LineReader(LineReader&&) noexcept;
  LineReader& operator=(LineReader&&) noexcept;

  // False at end of file.
  bool next(std::string& line);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Splits on ',' without quoting; empty fields preserved.
std::vector<std::string_view> split_csv(std::string_view line);

} // namespace citypulse

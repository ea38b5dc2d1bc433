#include "citypulse/lines.hpp"

#include <zlib.h>

#include <cstdio>
#include <cstring>

namespace citypulse {

namespace {
bool has_gz_suffix(const std::string& path) {
  return path.size() > 3 && path.compare(path.size() - 3, 3, ".gz") == 0;
}
} // namespace

struct LineReader::Impl {
  std::FILE* plain = nullptr;
  gzFile gz = nullptr;
  std::string buf;

  ~Impl() {
    if (plain) std::fclose(plain);
    if (gz) gzclose(gz);
  }
};

LineReader::LineReader(const std::string& path) : impl_(new Impl) {
  if (has_gz_suffix(path)) {
    impl_->gz = gzopen(path.c_str(), "rb");
    if (!impl_->gz) throw IoError("cannot open file: " + path);
  } else {
    impl_->plain = std::fopen(path.c_str(), "rb");
    if (!impl_->plain) throw IoError("cannot open file: " + path);
  }
}

LineReader::~LineReader() = default;
LineReader::LineReader(LineReader&&) noexcept = default;
LineReader& LineReader::operator=(LineReader&&) noexcept = default;

bool LineReader::next(std::string& line) {
  line.clear();
  char chunk[4096];
  bool got_any = false;
  for (;;) {
    char* r = impl_->gz ? gzgets(impl_->gz, chunk, sizeof(chunk))
                        : std::fgets(chunk, sizeof(chunk), impl_->plain);
    if (!r) break;
    got_any = true;
    size_t n = std::strlen(chunk);
    bool eol = n > 0 && chunk[n - 1] == '\n';
    line.append(chunk, eol ? n - 1 : n);
    if (eol) break;
  }
  if (!got_any) return false;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return true;
}

std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> out;
  size_t start = 0;
  for (;;) {
    size_t pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

} // namespace citypulse

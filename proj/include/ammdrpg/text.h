#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace ammdrpg::text {

// Shortest form that still parses back to the same double (17 significant digits).
std::string fmt(double v);

// Line-oriented reader for the key/value documents used by every file format.
// Blank lines and lines starting with '#' are skipped; tokens are
// whitespace-separated.
class Reader {
 public:
  explicit Reader(std::string_view text);

  bool done() const { return pos_ >= lines_.size(); }
  std::size_t line_number() const;  // 1-based number of the current line

  // Current line tokens without consuming them.
  const std::vector<std::string>& peek() const;
  std::vector<std::string> next();

  // Consumes a line whose first token is `key` and returns the remaining
  // tokens; throws FormatError(path) when the key is missing.
  std::vector<std::string> expect(const std::string& key, const std::string& path,
                                  std::size_t n_values);
  bool next_is(const std::string& key) const;

 private:
  std::vector<std::vector<std::string>> lines_;
  std::vector<std::size_t> numbers_;
  std::size_t pos_ = 0;
};

double parse_double(const std::string& token, const std::string& path);
long parse_int(const std::string& token, const std::string& path);

std::uint64_t fnv1a(std::string_view data);

}  // namespace ammdrpg::text

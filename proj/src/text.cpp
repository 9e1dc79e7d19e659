#include "ammdrpg/text.h"

#include <cerrno>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <sstream>

#include "ammdrpg/error.h"

namespace ammdrpg::text {

std::string fmt(double v) {
  if (v == 0.0) {
    return "0";  // also folds -0
  }
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

Reader::Reader(std::string_view text) {
  std::size_t number = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) {
      end = text.size();
    }
    ++number;
    std::string line(text.substr(start, end - start));
    std::istringstream in(line);
    std::vector<std::string> tokens;
    std::string tok;
    while (in >> tok) {
      tokens.push_back(tok);
    }
    if (!tokens.empty() && tokens.front()[0] != '#') {
      lines_.push_back(std::move(tokens));
      numbers_.push_back(number);
    }
    if (end == text.size()) {
      break;
    }
    start = end + 1;
  }
}

std::size_t Reader::line_number() const {
  return pos_ < numbers_.size() ? numbers_[pos_] : (numbers_.empty() ? 0 : numbers_.back() + 1);
}

const std::vector<std::string>& Reader::peek() const {
  static const std::vector<std::string> empty;
  return done() ? empty : lines_[pos_];
}

std::vector<std::string> Reader::next() {
  if (done()) {
    throw FormatError("<document>", "unexpected end of document");
  }
  return lines_[pos_++];
}

bool Reader::next_is(const std::string& key) const {
  return !done() && lines_[pos_].front() == key;
}

std::vector<std::string> Reader::expect(const std::string& key, const std::string& path,
                                        std::size_t n_values) {
  if (!next_is(key)) {
    const std::string found = done() ? std::string("end of document") : "'" + peek().front() + "'";
    throw FormatError(path, "missing field (found " + found + " at line " +
                                std::to_string(line_number()) + ")");
  }
  auto tokens = next();
  if (tokens.size() != n_values + 1) {
    throw FormatError(path, "expected " + std::to_string(n_values) + " value(s), got " +
                                std::to_string(tokens.size() - 1));
  }
  tokens.erase(tokens.begin());
  return tokens;
}

double parse_double(const std::string& token, const std::string& path) {
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(token.c_str(), &end);
  if (end == token.c_str() || *end != '\0' || errno == ERANGE || !std::isfinite(v)) {
    throw FormatError(path, "not a finite number: '" + token + "'");
  }
  return v;
}

long parse_int(const std::string& token, const std::string& path) {
  errno = 0;
  char* end = nullptr;
  const long v = std::strtol(token.c_str(), &end, 10);
  if (end == token.c_str() || *end != '\0' || errno == ERANGE) {
    throw FormatError(path, "not an integer: '" + token + "'");
  }
  return v;
}

std::uint64_t fnv1a(std::string_view data) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace ammdrpg::text

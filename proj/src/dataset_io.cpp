#include "ebbm/dataset_io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace ebbm {

namespace {

class LineReader {
 public:
  explicit LineReader(std::string_view text) : text_(text) {}

  bool next(std::string_view& line) {
    if (pos_ >= text_.size()) return false;
    const auto end = text_.find('\n', pos_);
    const auto stop = end == std::string_view::npos ? text_.size() : end;
    line = text_.substr(pos_, stop - pos_);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    pos_ = stop + 1;
    ++number_;
    return true;
  }
  std::size_t number() const { return number_; }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t number_ = 0;
};

bool next_token(std::string_view& line, std::string_view& token) {
  const auto start = line.find_first_not_of(" \t");
  if (start == std::string_view::npos) return false;
  line.remove_prefix(start);
  const auto stop = std::min(line.find_first_of(" \t"), line.size());
  token = line.substr(0, stop);
  line.remove_prefix(stop);
  return true;
}

std::size_t parse_count(std::string_view token, std::size_t line, const char* what) {
  std::size_t v = 0;
  const auto [p, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
  if (ec != std::errc() || p != token.data() + token.size())
    throw ParseError(line, std::string("invalid ") + what + " '" + std::string(token) + "'");
  return v;
}

}  // namespace

Dataset parse_dataset(std::string_view text) {
  LineReader reader(text);
  std::string_view line, tok;
  if (!reader.next(line)) throw ParseError(1, "missing header");
  if (!next_token(line, tok)) throw ParseError(1, "missing n");
  const std::size_t n = parse_count(tok, 1, "n");
  if (!next_token(line, tok)) throw ParseError(1, "missing N");
  const std::size_t N = parse_count(tok, 1, "N");
  if (next_token(line, tok)) throw ParseError(1, "trailing token in header");
  if (n < 2) throw ParseError(1, "n must be >= 2");
  if (N < 1) throw ParseError(1, "N must be >= 1");

  std::vector<Spin> flat;
  flat.reserve(n * N);
  for (std::size_t mu = 0; mu < N; ++mu) {
    if (!reader.next(line))
      throw ParseError(reader.number() + 1, "expected " + std::to_string(N) + " rows, got " +
                                                std::to_string(mu));
    std::size_t count = 0;
    while (next_token(line, tok)) {
      if (tok == "1" || tok == "+1") {
        flat.push_back(1);
      } else if (tok == "-1") {
        flat.push_back(-1);
      } else {
        throw ParseError(reader.number(), "invalid spin '" + std::string(tok) + "'");
      }
      ++count;
    }
    if (count != n)
      throw ParseError(reader.number(), "expected " + std::to_string(n) + " spins, got " +
                                            std::to_string(count));
  }
  while (reader.next(line))
    if (next_token(line, tok)) throw ParseError(reader.number(), "unexpected extra row");
  return Dataset(n, N, std::move(flat));
}

std::string format_dataset(const Dataset& data) {
  std::string out = std::to_string(data.n()) + ' ' + std::to_string(data.N()) + '\n';
  out.reserve(out.size() + data.N() * data.n() * 3);
  for (std::size_t mu = 0; mu < data.N(); ++mu) {
    const auto s = data.sample(mu);
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (i) out += ' ';
      out += s[i] > 0 ? "1" : "-1";
    }
    out += '\n';
  }
  return out;
}

Dataset read_dataset(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_dataset(ss.str());
}

void write_dataset(const Dataset& data, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path + " for writing");
  f << format_dataset(data);
  if (!f.flush()) throw std::runtime_error("write failed: " + path);
}

std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace ebbm

#include "bloomemb/formats.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "bloomemb/error.hpp"
#include "bloomemb/io.hpp"

namespace bloomemb {

namespace {

std::string strip_cr(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

bool is_bit_string(const std::string& line) {
  return !line.empty() && line.find_first_not_of("01") == std::string::npos;
}

}  // namespace

std::vector<SparseInstance> read_instances(std::istream& in, std::size_t d) {
  std::vector<std::vector<ItemId>> rows;
  std::string line;
  std::size_t line_no = 0;
  std::size_t largest = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream fields(strip_cr(line));
    std::vector<ItemId> positions;
    std::string token;
    while (fields >> token) {
      long long value = 0;
      const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
      if (ec != std::errc{} || ptr != token.data() + token.size()) {
        throw DataError("instance line " + std::to_string(line_no) + ": malformed position '" + token + "'");
      }
      if (value < 1 || (d != 0 && static_cast<unsigned long long>(value) > d)) {
        throw DataError("instance line " + std::to_string(line_no) + ": position " + token + " out of range");
      }
      largest = std::max(largest, static_cast<std::size_t>(value));
      positions.push_back(static_cast<ItemId>(value - 1));
    }
    rows.push_back(std::move(positions));
  }
  const std::size_t dim = d != 0 ? d : largest;
  std::vector<SparseInstance> out;
  out.reserve(rows.size());
  for (auto& r : rows) out.emplace_back(dim, std::move(r));
  return out;
}

void write_instances(std::ostream& out, std::span<const SparseInstance> instances) {
  for (const auto& instance : instances) {
    const auto p = instance.positions();
    for (std::size_t i = 0; i < p.size(); ++i) {
      if (i) out << ' ';
      out << p[i] + 1;
    }
    out << '\n';
  }
}

std::vector<BloomVector> read_bloom_vectors(std::istream& in) {
  std::vector<BloomVector> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = strip_cr(line);
    if (line.empty()) continue;
    if (!is_bit_string(line)) throw DataError("vector line " + std::to_string(line_no) + ": expected only 0/1");
    if (!out.empty() && out.front().m() != line.size()) {
      throw DataError("vector line " + std::to_string(line_no) + ": inconsistent length");
    }
    BloomVector v(line.size());
    for (std::size_t r = 0; r < line.size(); ++r) {
      if (line[r] == '1') v.set(static_cast<BitIndex>(r));
    }
    out.push_back(std::move(v));
  }
  return out;
}

void write_bloom_vectors(std::ostream& out, std::span<const BloomVector> vectors) {
  std::string line;
  for (const auto& v : vectors) {
    line.assign(v.m(), '0');
    for (const BitIndex bit : v.active()) line[bit] = '1';
    out << line << '\n';
  }
}

std::vector<std::vector<double>> read_probability_vectors(std::istream& in) {
  std::vector<std::vector<double>> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = strip_cr(line);
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::vector<double> probs;
    if (is_bit_string(line)) {
      for (const char c : line) probs.push_back(c == '1' ? 1.0 : 0.0);
    } else {
      std::istringstream fields(line);
      std::string token;
      while (fields >> token) {
        double value = 0.0;
        const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
        if (ec != std::errc{} || ptr != token.data() + token.size()) {
          throw DataError("probability line " + std::to_string(line_no) + ": malformed value '" + token + "'");
        }
        probs.push_back(value);
      }
    }
    if (!out.empty() && out.front().size() != probs.size()) {
      throw DataError("probability line " + std::to_string(line_no) + ": inconsistent length");
    }
    out.push_back(std::move(probs));
  }
  return out;
}

void write_score_dump(std::ostream& out, const ItemScores& scores, std::size_t top_n) {
  char buffer[64];
  for (const ItemId item : rank(scores, top_n)) {
    std::snprintf(buffer, sizeof(buffer), "%.17g", scores.scores[item]);
    out << item + 1 << '\t' << buffer << '\n';
  }
}

std::vector<std::vector<ItemId>> read_score_dump(std::istream& in) {
  std::vector<std::vector<ItemId>> blocks;
  std::vector<ItemId> current;
  bool open = false;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = strip_cr(line);
    if (line.find_first_not_of(" \t") == std::string::npos) {
      if (open) blocks.push_back(std::move(current));
      current.clear();
      open = false;
      continue;
    }
    std::istringstream fields(line);
    long long item = 0;
    double score = 0.0;
    if (!(fields >> item >> score) || item < 1) {
      throw DataError("score dump line " + std::to_string(line_no) + ": expected `item<TAB>score`");
    }
    current.push_back(static_cast<ItemId>(item - 1));
    open = true;
  }
  if (open) blocks.push_back(std::move(current));
  return blocks;
}

void write_atomically(const std::filesystem::path& destination,
                      const std::function<void(std::ostream&)>& writer, bool binary) {
  auto temp = destination;
  temp += ".tmp";
  {
    std::ofstream out(temp, binary ? std::ios::binary | std::ios::trunc : std::ios::trunc);
    if (!out) throw DataError("cannot write " + temp.string());
    try {
      writer(out);
    } catch (...) {
      out.close();
      std::filesystem::remove(temp);
      throw;
    }
    out.flush();
    if (!out) {
      out.close();
      std::filesystem::remove(temp);
      throw DataError("write failed for " + destination.string());
    }
  }
  std::filesystem::rename(temp, destination);
}

std::ifstream open_input(const std::filesystem::path& source, bool binary) {
  std::ifstream in(source, binary ? std::ios::binary : std::ios::in);
  if (!in) throw DataError("cannot open " + source.string());
  return in;
}

}  // namespace bloomemb

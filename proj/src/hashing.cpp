#include "bloomemb/hashing.hpp"

#include <algorithm>
#include <array>
#include <cstring>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>

#include "bloomemb/error.hpp"
#include "bloomemb/io.hpp"
#include "bloomemb/rng.hpp"

namespace bloomemb {

namespace {

constexpr std::array<char, 4> kMagic = {'B', 'E', 'H', 'M'};
constexpr std::uint16_t kBinaryVersion = 1;

void check_shape(std::size_t d, std::size_t m, std::size_t k) {
  if (d < 1) throw ConfigError("hash matrix: d must be >= 1");
  if (m < 1) throw ConfigError("hash matrix: m must be >= 1");
  if (k < 1 || k > m) {
    throw ConfigError("hash matrix: k must satisfy 1 <= k <= m (k=" + std::to_string(k) +
                      ", m=" + std::to_string(m) + ")");
  }
}

template <typename T>
void put_le(std::ostream& out, T value) {
  unsigned char bytes[sizeof(T)];
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    bytes[i] = static_cast<unsigned char>(static_cast<std::uint64_t>(value) >> (8 * i));
  }
  out.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <typename T>
T get_le(std::istream& in) {
  unsigned char bytes[sizeof(T)];
  if (!in.read(reinterpret_cast<char*>(bytes), sizeof(T))) {
    throw DataError("hash matrix: truncated binary file");
  }
  std::uint64_t value = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) value |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
  return static_cast<T>(value);
}

BitIndex to_internal(long long one_based, std::size_t m) {
  if (one_based < 1 || static_cast<unsigned long long>(one_based) > m) {
    throw DataError("hash matrix: index " + std::to_string(one_based) + " outside [1, " +
                    std::to_string(m) + "]");
  }
  return static_cast<BitIndex>(one_based - 1);
}

HashMatrix read_text(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("hash matrix: missing header");
  std::istringstream header(line);
  long long d = 0, m = 0, k = 0;
  std::uint64_t seed = 0;
  if (!(header >> d >> m >> k >> seed)) throw DataError("hash matrix: malformed header '" + line + "'");
  std::string extra;
  if (header >> extra) throw DataError("hash matrix: trailing data in header");
  if (d < 1 || m < 1 || k < 1 || k > m) throw DataError("hash matrix: invalid dimensions in header");

  std::vector<BitIndex> table;
  table.reserve(static_cast<std::size_t>(d * k));
  for (long long row = 0; row < d; ++row) {
    if (!std::getline(in, line)) {
      throw DataError("hash matrix: expected " + std::to_string(d) + " rows, found " +
                      std::to_string(row));
    }
    std::istringstream fields(line);
    long long value = 0;
    long long count = 0;
    while (fields >> value) {
      table.push_back(to_internal(value, static_cast<std::size_t>(m)));
      ++count;
    }
    if (!fields.eof()) throw DataError("hash matrix: non-integer entry on row " + std::to_string(row + 1));
    if (count != k) {
      throw DataError("hash matrix: row " + std::to_string(row + 1) + " has " + std::to_string(count) +
                      " entries, header says k=" + std::to_string(k));
    }
  }
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") != std::string::npos) {
      throw DataError("hash matrix: more rows than the header declares");
    }
  }
  return HashMatrix::from_table(static_cast<std::size_t>(d), static_cast<std::size_t>(m),
                                static_cast<std::size_t>(k), seed, std::move(table));
}

HashMatrix read_binary(std::istream& in) {
  std::array<char, 4> magic{};
  in.read(magic.data(), magic.size());
  if (magic != kMagic) throw DataError("hash matrix: bad magic");
  const auto version = get_le<std::uint16_t>(in);
  if (version != kBinaryVersion) throw DataError("hash matrix: unsupported version " + std::to_string(version));
  const std::size_t k = get_le<std::uint16_t>(in);
  const std::size_t d = get_le<std::uint32_t>(in);
  const std::size_t m = get_le<std::uint32_t>(in);
  const auto seed = get_le<std::uint64_t>(in);
  if (d < 1 || m < 1 || k < 1 || k > m) throw DataError("hash matrix: invalid dimensions in header");
  std::vector<BitIndex> table(d * k);
  for (auto& entry : table) entry = to_internal(get_le<std::uint32_t>(in), m);
  if (in.peek() != std::char_traits<char>::eof()) throw DataError("hash matrix: trailing bytes");
  return HashMatrix::from_table(d, m, k, seed, std::move(table));
}

}  // namespace

HashMatrix HashMatrix::from_table(std::size_t d, std::size_t m, std::size_t k, std::uint64_t seed,
                                  std::vector<BitIndex> table) {
  if (d < 1 || m < 1 || k < 1 || k > m) throw DataError("hash matrix: invalid dimensions");
  if (table.size() != d * k) throw DataError("hash matrix: table size does not match d*k");
  std::vector<BitIndex> sorted(k);
  for (std::size_t i = 0; i < d; ++i) {
    const auto first = table.begin() + static_cast<std::ptrdiff_t>(i * k);
    std::copy(first, first + static_cast<std::ptrdiff_t>(k), sorted.begin());
    std::sort(sorted.begin(), sorted.end());
    if (sorted.back() >= m) throw DataError("hash matrix: index out of range on row " + std::to_string(i + 1));
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
      throw DataError("hash matrix: repeated index on row " + std::to_string(i + 1));
    }
  }
  return HashMatrix(d, m, k, seed, std::move(table));
}

HashMatrix build_hash_matrix(std::size_t d, std::size_t m, std::size_t k, std::uint64_t seed) {
  check_shape(d, m, k);
  Rng rng(seed);
  // Partial Fisher-Yates over a persistent pool. The pool stays a permutation
  // of 0..m-1 between rows, so each row is an exact uniform k-subset draw.
  std::vector<BitIndex> pool(m);
  std::iota(pool.begin(), pool.end(), BitIndex{0});
  std::vector<BitIndex> table(d * k);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      const auto pick = j + static_cast<std::size_t>(rng.uniform(m - j));
      std::swap(pool[j], pool[pick]);
      table[i * k + j] = pool[j];
    }
  }
  return HashMatrix::from_table(d, m, k, seed, std::move(table));
}

HashMatrix identity_hash_matrix(std::size_t d) {
  check_shape(d, d, 1);
  std::vector<BitIndex> table(d);
  std::iota(table.begin(), table.end(), BitIndex{0});
  return HashMatrix::from_table(d, d, 1, 0, std::move(table));
}

HashFamily HashFamily::precomputed(HashMatrix matrix) {
  HashFamily family;
  family.mode_ = HashMode::kPrecomputed;
  family.d_ = matrix.d();
  family.m_ = matrix.m();
  family.k_ = matrix.k();
  family.seed_ = matrix.seed();
  family.matrix_.emplace(std::move(matrix));
  return family;
}

HashFamily HashFamily::double_hashing(std::size_t d, std::size_t m, std::size_t k, std::uint64_t seed) {
  check_shape(d, m, k);
  HashFamily family;
  family.mode_ = HashMode::kDoubleHashing;
  family.d_ = d;
  family.m_ = m;
  family.k_ = k;
  family.seed_ = seed;
  return family;
}

BitIndex HashFamily::project(ItemId item, std::size_t j) const {
  if (item >= d_) throw ConfigError("project: item " + std::to_string(item) + " out of range");
  if (j >= k_) throw ConfigError("project: projection " + std::to_string(j) + " out of range");
  return project_unchecked(item, j);
}

BitIndex HashFamily::project_unchecked(ItemId item, std::size_t j) const noexcept {
  if (mode_ == HashMode::kPrecomputed) return matrix_->at(item, j);
  const std::uint64_t a = splitmix64(seed_ ^ splitmix64(item));
  const std::uint64_t h1 = a % m_;
  const std::uint64_t h2 = (splitmix64(a) | 1ULL) % m_;
  const std::uint64_t jj = j;
  const std::uint64_t cubic = ((jj * jj * jj - jj) / 6) % m_;
  return static_cast<BitIndex>((h1 + (jj * h2) % m_ + cubic) % m_);
}

void write_hash_matrix(std::ostream& out, const HashMatrix& matrix, MatrixFormat format) {
  if (format == MatrixFormat::kText) {
    out << matrix.d() << ' ' << matrix.m() << ' ' << matrix.k() << ' ' << matrix.seed() << '\n';
    for (std::size_t i = 0; i < matrix.d(); ++i) {
      const auto row = matrix.row(static_cast<ItemId>(i));
      for (std::size_t j = 0; j < row.size(); ++j) {
        if (j) out << ' ';
        out << row[j] + 1;
      }
      out << '\n';
    }
    return;
  }
  if (matrix.k() > 0xFFFF || matrix.d() > 0xFFFFFFFFULL || matrix.m() > 0xFFFFFFFFULL) {
    throw ConfigError("hash matrix: dimensions do not fit the binary header");
  }
  out.write(kMagic.data(), kMagic.size());
  put_le<std::uint16_t>(out, kBinaryVersion);
  put_le<std::uint16_t>(out, static_cast<std::uint16_t>(matrix.k()));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(matrix.d()));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(matrix.m()));
  put_le<std::uint64_t>(out, matrix.seed());
  for (const BitIndex bit : matrix.table()) put_le<std::uint32_t>(out, bit + 1);
}

HashMatrix read_hash_matrix(std::istream& in) {
  const int first = in.peek();
  if (first == kMagic[0]) return read_binary(in);
  return read_text(in);
}

void save_hash_matrix(const HashMatrix& matrix, const std::filesystem::path& destination,
                      MatrixFormat format) {
  write_atomically(
      destination, [&](std::ostream& out) { write_hash_matrix(out, matrix, format); },
      format == MatrixFormat::kBinary);
}

HashMatrix load_hash_matrix(const std::filesystem::path& source) {
  auto in = open_input(source, true);
  return read_hash_matrix(in);
}

}  // namespace bloomemb

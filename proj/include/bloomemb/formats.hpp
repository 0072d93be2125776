#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include "bloomemb/codec.hpp"

namespace bloomemb {

// Instance file: one instance per line, space-separated 1-based positions.
// An empty line is an empty instance.
//
// Embedded-vector file: one line of m '0'/'1' characters per vector.
//
// Probability file: one vector per line, either m '0'/'1' characters or
// whitespace-separated reals.
//
// Score dump: `item<TAB>score` rows (1-based item) for the top_n items of each
// instance, best first. Consecutive instances are separated by an empty line.

/// `d == 0` infers d as the largest position seen.
std::vector<SparseInstance> read_instances(std::istream& in, std::size_t d = 0);
void write_instances(std::ostream& out, std::span<const SparseInstance> instances);

std::vector<BloomVector> read_bloom_vectors(std::istream& in);
void write_bloom_vectors(std::ostream& out, std::span<const BloomVector> vectors);

std::vector<std::vector<double>> read_probability_vectors(std::istream& in);

void write_score_dump(std::ostream& out, const ItemScores& scores, std::size_t top_n);
/// Ranked item lists from a score dump, one per block.
std::vector<std::vector<ItemId>> read_score_dump(std::istream& in);

}  // namespace bloomemb

// Copyright 2026 The sybilscope Authors
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

#pragma once

// Relay uptime matrix: rows are consensuses, columns are relays. Columns are
// ordered by single-linkage clustering under d = 1 - pearson and rendered as
// binary PPM images with identical-uptime blocks in red.

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sybilscope/dirdata.hpp"

namespace sybilscope {

/// Boolean presence matrix, stored bit-packed per column.
class UptimeMatrix {
 public:
  UptimeMatrix() = default;
  UptimeMatrix(std::vector<Timestamp> timestamps, std::vector<Fingerprint> relays);

  /// Test/helper constructor: `columns[c][r]` is cell (r, c). Relays get
  /// placeholder fingerprints derived from the column index.
  static UptimeMatrix from_columns(const std::vector<std::vector<bool>>& columns);

  std::size_t rows() const { return timestamps_.size(); }
  std::size_t cols() const { return relays_.size(); }

  const std::vector<Timestamp>& timestamps() const { return timestamps_; }
  const std::vector<Fingerprint>& relays() const { return relays_; }

  bool at(std::size_t row, std::size_t col) const {
    return (bits_[col * words_ + row / 64] >> (row % 64)) & 1U;
  }
  void set(std::size_t row, std::size_t col, bool value);

  /// Packed bits of one column; bits past rows() are zero.
  std::span<const std::uint64_t> column_bits(std::size_t col) const {
    return {bits_.data() + col * words_, words_};
  }
  std::vector<bool> column(std::size_t col) const;
  std::size_t online_count(std::size_t col) const;

 private:
  std::vector<Timestamp> timestamps_;
  std::vector<Fingerprint> relays_;
  std::size_t words_ = 0;
  std::vector<std::uint64_t> bits_;
};

/// Columns are the union of fingerprints in the window, in ascending order.
/// Throws InvalidArgument on an empty or unsorted stream.
UptimeMatrix build_matrix(std::span<const Consensus> consensuses);

/// Sample correlation of two 0/1 sequences. Zero-variance rule: two constant
/// sequences give 1 if equal and -1 otherwise; a constant against a varying
/// sequence gives 0. Throws LengthMismatch.
double pearson(const std::vector<bool>& a, const std::vector<bool>& b);

/// Pearson from counts: n samples, ones in a, ones in b, ones in both.
double pearson_from_counts(std::size_t n, std::size_t ones_a, std::size_t ones_b,
                           std::size_t ones_both);

/// Correlation distance between two matrix columns, 1 - r, in [0, 2].
double column_distance(const UptimeMatrix& matrix, std::size_t a, std::size_t b);

/// One agglomeration step. Clusters are named by their lowest column index;
/// `left` < `right` and the merged cluster keeps the name `left`.
struct Merge {
  std::size_t left = 0;
  std::size_t right = 0;
  double distance = 0.0;

  friend bool operator==(const Merge&, const Merge&) = default;
};

/// [begin, end) positions in the display order.
struct ColumnRun {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t size() const { return end - begin; }
  friend bool operator==(const ColumnRun&, const ColumnRun&) = default;
};

struct ColumnOrder {
  /// permutation[k] is the column shown at display position k.
  std::vector<std::size_t> permutation;
  /// Maximal runs (length >= 2) of bitwise-identical adjacent columns.
  std::vector<ColumnRun> identical_runs;
  std::vector<Merge> merges;
};

/// Single-linkage agglomeration. The pair with the smallest distance merges
/// first; ties go to the lowest (left, right) cluster names. The merged
/// cluster lists the left cluster's leaves first.
ColumnOrder cluster_order(const UptimeMatrix& matrix);

/// Identical runs of an arbitrary display order.
std::vector<ColumnRun> find_identical_runs(const UptimeMatrix& matrix,
                                           std::span<const std::size_t> permutation);

/// 8-bit RGB raster, row-major.
struct Image {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> rgb;

  std::array<std::uint8_t, 3> pixel(std::size_t x, std::size_t y) const;
  /// Binary "P6" portable pixmap.
  std::string to_ppm() const;
};

/// Black = online, white = offline, red = online inside an identical run.
/// Display columns are split into images of at most `max_width` columns.
std::vector<Image> render(const UptimeMatrix& matrix, const ColumnOrder& order,
                          std::size_t max_width);

}  // namespace sybilscope

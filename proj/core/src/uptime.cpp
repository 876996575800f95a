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

#include "sybilscope/uptime.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>

#include "sybilscope/error.hpp"

namespace sybilscope {

UptimeMatrix::UptimeMatrix(std::vector<Timestamp> timestamps, std::vector<Fingerprint> relays)
    : timestamps_(std::move(timestamps)),
      relays_(std::move(relays)),
      words_((timestamps_.size() + 63) / 64),
      bits_(words_ * relays_.size(), 0) {}

UptimeMatrix UptimeMatrix::from_columns(const std::vector<std::vector<bool>>& columns) {
  const std::size_t rows = columns.empty() ? 0 : columns.front().size();
  std::vector<Timestamp> timestamps;
  for (std::size_t r = 0; r < rows; ++r) {
    timestamps.push_back(Timestamp{std::chrono::hours(static_cast<long>(r))});
  }
  std::vector<Fingerprint> relays;
  for (std::size_t c = 0; c < columns.size(); ++c) {
    Fingerprint::Bytes bytes{};
    for (std::size_t k = 0; k < sizeof(std::size_t); ++k) {
      bytes[19 - k] = static_cast<std::uint8_t>(c >> (8 * k));
    }
    relays.emplace_back(bytes);
  }
  UptimeMatrix m(std::move(timestamps), std::move(relays));
  for (std::size_t c = 0; c < columns.size(); ++c) {
    if (columns[c].size() != rows) throw LengthMismatch("columns differ in length");
    for (std::size_t r = 0; r < rows; ++r) m.set(r, c, columns[c][r]);
  }
  return m;
}

void UptimeMatrix::set(std::size_t row, std::size_t col, bool value) {
  std::uint64_t& word = bits_[col * words_ + row / 64];
  const std::uint64_t mask = std::uint64_t{1} << (row % 64);
  word = value ? (word | mask) : (word & ~mask);
}

std::vector<bool> UptimeMatrix::column(std::size_t col) const {
  std::vector<bool> out(rows());
  for (std::size_t r = 0; r < rows(); ++r) out[r] = at(r, col);
  return out;
}

std::size_t UptimeMatrix::online_count(std::size_t col) const {
  std::size_t n = 0;
  for (std::uint64_t w : column_bits(col)) n += static_cast<std::size_t>(std::popcount(w));
  return n;
}

UptimeMatrix build_matrix(std::span<const Consensus> consensuses) {
  if (consensuses.empty()) throw InvalidArgument("uptime matrix needs at least one consensus");
  std::vector<Timestamp> timestamps;
  std::vector<Fingerprint> relays;
  for (std::size_t i = 0; i < consensuses.size(); ++i) {
    if (i > 0 && !(consensuses[i - 1].valid_after() < consensuses[i].valid_after())) {
      throw InvalidArgument("uptime matrix: valid-after must be strictly increasing");
    }
    timestamps.push_back(consensuses[i].valid_after());
    for (const RouterStatus& s : consensuses[i]) relays.push_back(s.fingerprint);
  }
  std::sort(relays.begin(), relays.end());
  relays.erase(std::unique(relays.begin(), relays.end()), relays.end());

  UptimeMatrix m(std::move(timestamps), relays);
  for (std::size_t r = 0; r < consensuses.size(); ++r) {
    // Both sequences are sorted; walk them together.
    auto col = relays.begin();
    for (const RouterStatus& s : consensuses[r]) {
      col = std::lower_bound(col, relays.end(), s.fingerprint);
      m.set(r, static_cast<std::size_t>(col - relays.begin()), true);
    }
  }
  return m;
}

double pearson_from_counts(std::size_t n, std::size_t ones_a, std::size_t ones_b,
                           std::size_t ones_both) {
  const bool const_a = ones_a == 0 || ones_a == n;
  const bool const_b = ones_b == 0 || ones_b == n;
  if (const_a && const_b) return ones_a == ones_b ? 1.0 : -1.0;
  if (const_a || const_b) return 0.0;
  const double dn = static_cast<double>(n);
  const double a = static_cast<double>(ones_a);
  const double b = static_cast<double>(ones_b);
  const double cov = dn * static_cast<double>(ones_both) - a * b;
  const double var = a * (dn - a) * b * (dn - b);
  return std::clamp(cov / std::sqrt(var), -1.0, 1.0);
}

double pearson(const std::vector<bool>& a, const std::vector<bool>& b) {
  if (a.size() != b.size()) throw LengthMismatch("pearson: sequences differ in length");
  std::size_t ones_a = 0;
  std::size_t ones_b = 0;
  std::size_t both = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ones_a += a[i];
    ones_b += b[i];
    both += a[i] && b[i];
  }
  return pearson_from_counts(a.size(), ones_a, ones_b, both);
}

namespace {

std::size_t and_count(std::span<const std::uint64_t> a, std::span<const std::uint64_t> b) {
  std::size_t n = 0;
  for (std::size_t i = 0; i < a.size(); ++i) n += static_cast<std::size_t>(std::popcount(a[i] & b[i]));
  return n;
}

// Upper-triangular distance matrix without the diagonal.
class CondensedMatrix {
 public:
  explicit CondensedMatrix(std::size_t n) : n_(n), data_(n < 2 ? 0 : n * (n - 1) / 2) {}

  double& at(std::size_t i, std::size_t j) { return data_[index(i, j)]; }
  double at(std::size_t i, std::size_t j) const { return data_[index(i, j)]; }

 private:
  std::size_t index(std::size_t i, std::size_t j) const {
    if (i > j) std::swap(i, j);
    return i * (2 * n_ - i - 1) / 2 + (j - i - 1);
  }

  std::size_t n_;
  std::vector<double> data_;
};

constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

}  // namespace

double column_distance(const UptimeMatrix& matrix, std::size_t a, std::size_t b) {
  const std::size_t both = and_count(matrix.column_bits(a), matrix.column_bits(b));
  return 1.0 - pearson_from_counts(matrix.rows(), matrix.online_count(a), matrix.online_count(b),
                                   both);
}

std::vector<ColumnRun> find_identical_runs(const UptimeMatrix& matrix,
                                           std::span<const std::size_t> permutation) {
  std::vector<ColumnRun> runs;
  std::size_t begin = 0;
  auto same = [&](std::size_t x, std::size_t y) {
    const auto a = matrix.column_bits(x);
    const auto b = matrix.column_bits(y);
    return std::equal(a.begin(), a.end(), b.begin());
  };
  for (std::size_t k = 1; k <= permutation.size(); ++k) {
    if (k < permutation.size() && same(permutation[k - 1], permutation[k])) continue;
    if (k - begin >= 2) runs.push_back({begin, k});
    begin = k;
  }
  return runs;
}

ColumnOrder cluster_order(const UptimeMatrix& matrix) {
  const std::size_t n = matrix.cols();
  ColumnOrder order;
  if (n == 0) return order;

  std::vector<std::size_t> ones(n);
  for (std::size_t c = 0; c < n; ++c) ones[c] = matrix.online_count(c);
  CondensedMatrix dist(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto bi = matrix.column_bits(i);
    for (std::size_t j = i + 1; j < n; ++j) {
      const std::size_t both = and_count(bi, matrix.column_bits(j));
      dist.at(i, j) = 1.0 - pearson_from_counts(matrix.rows(), ones[i], ones[j], both);
    }
  }

  // Clusters are named by their lowest column. For each active cluster i the
  // cache holds its nearest active cluster j > i, ties to the smallest j, so
  // the global minimum of (distance, i) is the pair the tie rule selects.
  std::vector<bool> active(n, true);
  std::vector<std::vector<std::size_t>> leaves(n);
  for (std::size_t c = 0; c < n; ++c) leaves[c] = {c};
  std::vector<std::size_t> nn(n, kNone);
  std::vector<double> nn_dist(n, std::numeric_limits<double>::infinity());

  auto recompute = [&](std::size_t i) {
    nn[i] = kNone;
    nn_dist[i] = std::numeric_limits<double>::infinity();
    for (std::size_t j = i + 1; j < n; ++j) {
      if (active[j] && dist.at(i, j) < nn_dist[i]) {
        nn_dist[i] = dist.at(i, j);
        nn[i] = j;
      }
    }
  };
  for (std::size_t i = 0; i < n; ++i) recompute(i);

  order.merges.reserve(n - 1);
  for (std::size_t step = 0; step + 1 < n; ++step) {
    std::size_t a = kNone;
    for (std::size_t i = 0; i < n; ++i) {
      if (active[i] && nn[i] != kNone && (a == kNone || nn_dist[i] < nn_dist[a])) a = i;
    }
    const std::size_t b = nn[a];
    order.merges.push_back({a, b, nn_dist[a]});

    active[b] = false;
    leaves[a].insert(leaves[a].end(), leaves[b].begin(), leaves[b].end());
    leaves[b].clear();
    for (std::size_t k = 0; k < n; ++k) {
      if (active[k] && k != a) dist.at(a, k) = std::min(dist.at(a, k), dist.at(b, k));
    }

    recompute(a);
    for (std::size_t i = 0; i < a; ++i) {
      if (!active[i]) continue;
      // d(i, a) only shrank; the cache moves to a if a now wins or ties lower.
      const double d = dist.at(i, a);
      if (nn[i] == b || d < nn_dist[i] || (d == nn_dist[i] && a < nn[i])) {
        nn[i] = a;
        nn_dist[i] = d;
      }
    }
    for (std::size_t i = a + 1; i < b; ++i) {
      if (active[i] && nn[i] == b) recompute(i);
    }
  }

  order.permutation = std::move(leaves[0]);
  order.identical_runs = find_identical_runs(matrix, order.permutation);
  return order;
}

}  // namespace sybilscope

#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "sentibench/error.hpp"

namespace sentibench {

// Compressed sparse row matrix. Column indices are strictly increasing
// within each row; absent cells are zero; values are finite doubles.
struct CsrMatrix {
  std::vector<std::size_t> row_offsets{0};
  std::vector<std::uint32_t> col_indices;
  std::vector<double> values;
  std::size_t rows = 0;
  std::size_t cols = 0;

  CsrMatrix() = default;
  explicit CsrMatrix(std::size_t n_cols) : cols(n_cols) {}

  std::size_t nnz() const { return values.size(); }

  // entries must be sorted by column with no duplicates.
  void append_row(std::span<const std::pair<std::uint32_t, double>> entries) {
    for (std::size_t i = 0; i < entries.size(); ++i) {
      if (entries[i].first >= cols) throw Error("csr: column index out of range");
      if (i > 0 && entries[i].first <= entries[i - 1].first)
        throw Error("csr: row entries must have strictly increasing columns");
      if (!std::isfinite(entries[i].second)) throw Error("csr: non-finite value");
      col_indices.push_back(entries[i].first);
      values.push_back(entries[i].second);
    }
    ++rows;
    row_offsets.push_back(col_indices.size());
  }

  std::span<const std::uint32_t> row_cols(std::size_t r) const {
    return {col_indices.data() + row_offsets[r], row_offsets[r + 1] - row_offsets[r]};
  }
  std::span<const double> row_vals(std::size_t r) const {
    return {values.data() + row_offsets[r], row_offsets[r + 1] - row_offsets[r]};
  }

  double dot_row(std::size_t r, std::span<const double> w) const {
    double acc = 0.0;
    for (std::size_t k = row_offsets[r]; k < row_offsets[r + 1]; ++k) {
      acc += values[k] * w[col_indices[k]];
    }
    return acc;
  }

  double at(std::size_t r, std::size_t c) const {
    for (std::size_t k = row_offsets[r]; k < row_offsets[r + 1]; ++k) {
      if (col_indices[k] == c) return values[k];
      if (col_indices[k] > c) break;
    }
    return 0.0;
  }

  // Keeps the listed rows, in the given order.
  CsrMatrix take_rows(std::span<const std::size_t> idx) const {
    CsrMatrix out(cols);
    std::vector<std::pair<std::uint32_t, double>> entries;
    for (std::size_t r : idx) {
      entries.clear();
      auto cs = row_cols(r);
      auto vs = row_vals(r);
      for (std::size_t k = 0; k < cs.size(); ++k) entries.emplace_back(cs[k], vs[k]);
      out.append_row(entries);
    }
    return out;
  }

  std::vector<std::vector<double>> to_dense() const {
    std::vector<std::vector<double>> d(rows, std::vector<double>(cols, 0.0));
    for (std::size_t r = 0; r < rows; ++r) {
      auto cs = row_cols(r);
      auto vs = row_vals(r);
      for (std::size_t k = 0; k < cs.size(); ++k) d[r][cs[k]] = vs[k];
    }
    return d;
  }
};

}  // namespace sentibench

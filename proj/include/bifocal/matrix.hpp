#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "bifocal/errors.hpp"

namespace bifocal {

// One instance's fragment embeddings, one fragment per row. Scalar is float
// for stored/raw features (32-bit on disk) and double for everything the
// compute pipeline produces; accumulation is always done in double.
template <typename Scalar>
struct EmbedMatrix {
  std::size_t rows = 0;
  std::size_t dim = 0;
  std::vector<Scalar> values;  // row-major, rows * dim

  EmbedMatrix() = default;
  EmbedMatrix(std::size_t r, std::size_t d)
      : rows(r), dim(d), values(r * d, Scalar(0)) {}

  std::span<const Scalar> row(std::size_t i) const {
    return {values.data() + i * dim, dim};
  }
  std::span<Scalar> row(std::size_t i) {
    return {values.data() + i * dim, dim};
  }
  Scalar at(std::size_t i, std::size_t j) const { return values[i * dim + j]; }
  Scalar& at(std::size_t i, std::size_t j) { return values[i * dim + j]; }

  bool operator==(const EmbedMatrix&) const = default;
};

using EmbedMatrixF = EmbedMatrix<float>;
using EmbedMatrixD = EmbedMatrix<double>;

// Per-query-fragment attention rows over candidate fragments.
struct AttentionMap {
  std::size_t queries = 0;
  std::size_t candidates = 0;
  std::vector<double> weights;  // row-major, queries * candidates

  AttentionMap() = default;
  AttentionMap(std::size_t q, std::size_t c)
      : queries(q), candidates(c), weights(q * c, 0.0) {}

  std::span<const double> row(std::size_t i) const {
    return {weights.data() + i * candidates, candidates};
  }
  std::span<double> row(std::size_t i) {
    return {weights.data() + i * candidates, candidates};
  }
  double at(std::size_t i, std::size_t j) const {
    return weights[i * candidates + j];
  }

  bool operator==(const AttentionMap&) const = default;
};

// Boolean relevance matrix; also reused for synthetic ground truth.
struct FocalMask {
  std::size_t queries = 0;
  std::size_t candidates = 0;
  std::vector<std::uint8_t> bits;  // row-major, 0 or 1

  FocalMask() = default;
  FocalMask(std::size_t q, std::size_t c)
      : queries(q), candidates(c), bits(q * c, 0) {}

  std::span<const std::uint8_t> row(std::size_t i) const {
    return {bits.data() + i * candidates, candidates};
  }
  std::span<std::uint8_t> row(std::size_t i) {
    return {bits.data() + i * candidates, candidates};
  }
  bool at(std::size_t i, std::size_t j) const {
    return bits[i * candidates + j] != 0;
  }

  bool operator==(const FocalMask&) const = default;
};

// Batch pair scores, texts along rows, images along columns.
struct ScoreMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;

  ScoreMatrix() = default;
  ScoreMatrix(std::size_t r, std::size_t c)
      : rows(r), cols(c), values(r * c, 0.0) {}

  double at(std::size_t a, std::size_t b) const { return values[a * cols + b]; }
  double& at(std::size_t a, std::size_t b) { return values[a * cols + b]; }

  bool operator==(const ScoreMatrix&) const = default;
};

// t2i: text fragments query image fragments; i2t: the transpose.
enum class Direction { T2I, I2T };

namespace detail {

template <typename A, typename B>
double dot(std::span<const A> a, std::span<const B> b) {
  double acc = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    acc += static_cast<double>(a[k]) * static_cast<double>(b[k]);
  }
  return acc;
}

template <typename A>
double norm(std::span<const A> a) {
  return std::sqrt(dot(a, a));
}

template <typename A, typename B>
double cosine(std::span<const A> a, std::span<const B> b) {
  return dot(a, b) / (norm(a) * norm(b));
}

}  // namespace detail

// Structural and numeric validity of a fragment matrix. `what` names the
// owning record in error messages.
template <typename Scalar>
void validate_matrix(const EmbedMatrix<Scalar>& m, const std::string& what) {
  if (m.rows < 1 || m.dim < 1) {
    throw DataError(what + ": matrix must have at least one row and column");
  }
  if (m.values.size() != m.rows * m.dim) {
    throw DataError(what + ": value count does not match rows*dim");
  }
  for (std::size_t i = 0; i < m.rows; ++i) {
    bool all_zero = true;
    for (std::size_t j = 0; j < m.dim; ++j) {
      const double v = static_cast<double>(m.at(i, j));
      if (!std::isfinite(v)) {
        throw DataError(what + ": non-finite value in fragment " +
                        std::to_string(i));
      }
      if (v != 0.0) all_zero = false;
    }
    if (all_zero) {
      throw DataError(what + ": fragment " + std::to_string(i) +
                      " is the all-zero vector");
    }
  }
}

}  // namespace bifocal

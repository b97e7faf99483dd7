#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace losplan {

/// Dense row-major boolean matrix packed into 64-bit words.
///
/// Rows are indexed 0..rows-1 (cell i = row + 1 in 1-based grid terms).
class BitMatrix {
 public:
  BitMatrix() = default;
  BitMatrix(int rows, int cols, bool value = false);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::size_t size() const { return static_cast<std::size_t>(rows_) * static_cast<std::size_t>(cols_); }

  bool get(int r, int c) const {
    const std::size_t k = index(r, c);
    return (words_[k >> 6] >> (k & 63)) & 1u;
  }
  void set(int r, int c, bool v) {
    const std::size_t k = index(r, c);
    const std::uint64_t mask = std::uint64_t{1} << (k & 63);
    if (v) {
      words_[k >> 6] |= mask;
    } else {
      words_[k >> 6] &= ~mask;
    }
  }

  std::size_t count() const;
  bool any() const;
  bool all() const { return count() == size(); }

  BitMatrix& operator|=(const BitMatrix& other);
  BitMatrix& operator&=(const BitMatrix& other);
  BitMatrix complement() const;
  /// Number of bits set in (this & ~mask).
  std::size_t count_excluding(const BitMatrix& mask) const;

  bool same_shape(const BitMatrix& other) const { return rows_ == other.rows_ && cols_ == other.cols_; }
  friend bool operator==(const BitMatrix&, const BitMatrix&) = default;

 private:
  std::size_t index(int r, int c) const {
    return static_cast<std::size_t>(r) * static_cast<std::size_t>(cols_) + static_cast<std::size_t>(c);
  }
  void check_shape(const BitMatrix& other) const;

  int rows_ = 0;
  int cols_ = 0;
  std::vector<std::uint64_t> words_;
};

}  // namespace losplan

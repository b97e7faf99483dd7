#include "losplan/bit_matrix.hpp"

#include <bit>
#include <stdexcept>

namespace losplan {

BitMatrix::BitMatrix(int rows, int cols, bool value) : rows_(rows), cols_(cols) {
  if (rows < 0 || cols < 0) throw std::invalid_argument("BitMatrix: negative dimension");
  words_.assign((size() + 63) / 64, value ? ~std::uint64_t{0} : std::uint64_t{0});
  if (value && size() % 64 != 0) words_.back() &= (std::uint64_t{1} << (size() % 64)) - 1;
}

std::size_t BitMatrix::count() const {
  std::size_t n = 0;
  for (std::uint64_t w : words_) n += static_cast<std::size_t>(std::popcount(w));
  return n;
}

bool BitMatrix::any() const {
  for (std::uint64_t w : words_) {
    if (w != 0) return true;
  }
  return false;
}

void BitMatrix::check_shape(const BitMatrix& other) const {
  if (!same_shape(other)) throw std::invalid_argument("BitMatrix: dimension mismatch");
}

BitMatrix& BitMatrix::operator|=(const BitMatrix& other) {
  check_shape(other);
  for (std::size_t k = 0; k < words_.size(); ++k) words_[k] |= other.words_[k];
  return *this;
}

BitMatrix& BitMatrix::operator&=(const BitMatrix& other) {
  check_shape(other);
  for (std::size_t k = 0; k < words_.size(); ++k) words_[k] &= other.words_[k];
  return *this;
}

BitMatrix BitMatrix::complement() const {
  BitMatrix out = *this;
  for (auto& w : out.words_) w = ~w;
  if (size() % 64 != 0) out.words_.back() &= (std::uint64_t{1} << (size() % 64)) - 1;
  return out;
}

std::size_t BitMatrix::count_excluding(const BitMatrix& mask) const {
  check_shape(mask);
  std::size_t n = 0;
  for (std::size_t k = 0; k < words_.size(); ++k) n += static_cast<std::size_t>(std::popcount(words_[k] & ~mask.words_[k]));
  return n;
}

}  // namespace losplan

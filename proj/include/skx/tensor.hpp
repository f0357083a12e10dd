// Dense row-major tensor of doubles plus the seeded RNG used across the
// training stack. Kept deliberately small: everything downstream works on
// contiguous buffers and flattens to 2-D for the heavy math.
#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace skx {

[[noreturn]] void fail(const std::string& msg);

class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<long> shape);
  Tensor(std::vector<long> shape, std::vector<double> data);

  static Tensor zeros(std::vector<long> shape) { return Tensor(std::move(shape)); }
  static Tensor full(std::vector<long> shape, double v);

  int rank() const { return static_cast<int>(shape_.size()); }
  long dim(int i) const { return shape_[static_cast<size_t>(i)]; }
  const std::vector<long>& shape() const { return shape_; }
  long size() const { return static_cast<long>(data_.size()); }
  bool empty() const { return data_.empty(); }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }

  double& operator[](long i) { return data_[static_cast<size_t>(i)]; }
  double operator[](long i) const { return data_[static_cast<size_t>(i)]; }

  double& at(long i, long j) { return data_[static_cast<size_t>(i * shape_[1] + j)]; }
  double at(long i, long j) const { return data_[static_cast<size_t>(i * shape_[1] + j)]; }
  double& at(long i, long j, long k) {
    return data_[static_cast<size_t>((i * shape_[1] + j) * shape_[2] + k)];
  }
  double at(long i, long j, long k) const {
    return data_[static_cast<size_t>((i * shape_[1] + j) * shape_[2] + k)];
  }
  double& at(long i, long j, long k, long l) {
    return data_[static_cast<size_t>(((i * shape_[1] + j) * shape_[2] + k) * shape_[3] + l)];
  }
  double at(long i, long j, long k, long l) const {
    return data_[static_cast<size_t>(((i * shape_[1] + j) * shape_[2] + k) * shape_[3] + l)];
  }

  // Same buffer, new shape; element count must match.
  Tensor reshaped(std::vector<long> new_shape) const;

  void fill(double v);
  bool same_shape(const Tensor& o) const { return shape_ == o.shape_; }
  bool all_finite() const;
  std::string shape_str() const;

 private:
  std::vector<long> shape_;
  std::vector<double> data_;
};

// Deterministic RNG. One generator per logical stream; streams are derived
// by hashing a parent seed with a salt so reordering one consumer does not
// disturb the others.
class Rng {
 public:
  explicit Rng(uint64_t seed) : gen_(seed) {}

  uint64_t raw() { return gen_(); }
  double uniform(double lo, double hi);
  double normal(double mean, double stddev);
  long uniform_int(long n);  // [0, n)
  Rng split(uint64_t salt) const;

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (long i = static_cast<long>(v.size()) - 1; i > 0; --i) {
      long j = uniform_int(i + 1);
      std::swap(v[static_cast<size_t>(i)], v[static_cast<size_t>(j)]);
    }
  }

  std::mt19937_64& generator() { return gen_; }

 private:
  std::mt19937_64 gen_;
};

uint64_t hash_combine(uint64_t seed, uint64_t salt);
uint64_t fnv1a(const std::string& s);

}  // namespace skx

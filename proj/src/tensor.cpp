#include "skx/tensor.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

namespace skx {

void fail(const std::string& msg) { throw std::runtime_error(msg); }

static size_t checked_count(const std::vector<long>& shape) {
  size_t n = 1;
  for (long d : shape) {
    if (d < 0) fail("tensor dimension must be nonnegative");
    n *= static_cast<size_t>(d);
  }
  return n;
}

Tensor::Tensor(std::vector<long> shape) : shape_(std::move(shape)) {
  data_.assign(checked_count(shape_), 0.0);
}

Tensor::Tensor(std::vector<long> shape, std::vector<double> data) : shape_(std::move(shape)) {
  if (checked_count(shape_) != data.size()) fail("tensor shape/data size mismatch");
  data_ = std::move(data);
}

Tensor Tensor::full(std::vector<long> shape, double v) {
  Tensor t(std::move(shape));
  t.fill(v);
  return t;
}

Tensor Tensor::reshaped(std::vector<long> new_shape) const {
  if (checked_count(new_shape) != data_.size()) {
    fail("reshape element count mismatch: " + shape_str());
  }
  Tensor t;
  t.shape_ = std::move(new_shape);
  t.data_ = data_;
  return t;
}

void Tensor::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

bool Tensor::all_finite() const {
  for (double x : data_) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

std::string Tensor::shape_str() const {
  std::ostringstream os;
  os << '(';
  for (size_t i = 0; i < shape_.size(); ++i) os << (i ? "," : "") << shape_[i];
  os << ')';
  return os.str();
}

double Rng::uniform(double lo, double hi) {
  std::uniform_real_distribution<double> d(lo, hi);
  return d(gen_);
}

double Rng::normal(double mean, double stddev) {
  std::normal_distribution<double> d(mean, stddev);
  return d(gen_);
}

long Rng::uniform_int(long n) {
  if (n <= 0) fail("uniform_int needs a positive bound");
  std::uniform_int_distribution<long> d(0, n - 1);
  return d(gen_);
}

Rng Rng::split(uint64_t salt) const {
  Rng copy = *this;
  uint64_t base = copy.gen_();
  return Rng(hash_combine(base, salt));
}

uint64_t hash_combine(uint64_t seed, uint64_t salt) {
  // splitmix64 finalizer over the xor-combined words
  uint64_t z = seed ^ (salt + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2));
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

uint64_t fnv1a(const std::string& s) {
  uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace skx

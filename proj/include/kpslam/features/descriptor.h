#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

namespace kpslam::features {

inline constexpr int kDefaultDescriptorDim = 256;

struct Keypoint {
  Eigen::Vector2d position = Eigen::Vector2d::Zero();  // level-0 pixels
  int octave = 0;
  double score = 0.0;
};

struct FloatDescriptor {
  std::vector<float> values;

  int dim() const { return static_cast<int>(values.size()); }
  double norm() const;
  /// Scales to unit L2 norm; a zero vector is left unchanged.
  void normalize();
};

/// Packed D-bit sign hash of a float descriptor.
class BinaryDescriptor {
 public:
  BinaryDescriptor() = default;
  explicit BinaryDescriptor(int dim) : dim_(dim), words_((dim + 63) / 64, 0) {}

  int dim() const { return dim_; }
  bool bit(int i) const { return (words_[i / 64] >> (i % 64)) & 1u; }
  void set(int i, bool value);
  void flip(int i) { words_[i / 64] ^= std::uint64_t{1} << (i % 64); }
  const std::vector<std::uint64_t>& words() const { return words_; }

  bool operator==(const BinaryDescriptor& other) const = default;

 private:
  int dim_ = 0;
  std::vector<std::uint64_t> words_;
};

/// bit i = 1 iff values[i] >= 0.
BinaryDescriptor binarize(const FloatDescriptor& d);

/// Popcount of XOR. Throws kIncompatibleDescriptors on dimension mismatch.
int hamming(const BinaryDescriptor& a, const BinaryDescriptor& b);

BinaryDescriptor operator~(const BinaryDescriptor& d);

}  // namespace kpslam::features

#include "kpslam/features/descriptor.h"

#include <bit>
#include <cmath>

#include "kpslam/common/error.h"
#include "kpslam/common/popcount.h"

namespace kpslam::features {

double FloatDescriptor::norm() const {
  double sq = 0.0;
  for (float v : values) sq += static_cast<double>(v) * v;
  return std::sqrt(sq);
}

void FloatDescriptor::normalize() {
  const double n = norm();
  if (!(n > 0.0)) return;
  for (float& v : values) v = static_cast<float>(v / n);
}

void BinaryDescriptor::set(int i, bool value) {
  const std::uint64_t mask = std::uint64_t{1} << (i % 64);
  if (value) {
    words_[i / 64] |= mask;
  } else {
    words_[i / 64] &= ~mask;
  }
}

BinaryDescriptor binarize(const FloatDescriptor& d) {
  BinaryDescriptor out(d.dim());
  for (int i = 0; i < d.dim(); ++i) {
    if (d.values[i] >= 0.0f) out.set(i, true);
  }
  return out;
}

namespace {

KPSLAM_POPCNT_CLONES int xor_popcount(const std::uint64_t* a, const std::uint64_t* b, size_t n) {
  int count = 0;
  for (size_t i = 0; i < n; ++i) count += std::popcount(a[i] ^ b[i]);
  return count;
}

}  // namespace

int hamming(const BinaryDescriptor& a, const BinaryDescriptor& b) {
  if (a.dim() != b.dim()) {
    throw Error(ErrorCode::kIncompatibleDescriptors,
                "hamming: descriptor dimensions " + std::to_string(a.dim()) + " and " +
                    std::to_string(b.dim()) + " differ");
  }
  return xor_popcount(a.words().data(), b.words().data(), a.words().size());
}

BinaryDescriptor operator~(const BinaryDescriptor& d) {
  BinaryDescriptor out(d.dim());
  for (int i = 0; i < d.dim(); ++i) out.set(i, !d.bit(i));
  return out;
}

}  // namespace kpslam::features

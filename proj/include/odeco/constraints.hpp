#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <tuple>

#include "odeco/types.hpp"

namespace odeco {

enum class ConstraintKind { SurfaceAlign, FeatureAlign, CornerFree, Octahedral, Isotropy, Combined };

const char* to_string(ConstraintKind kind);

/// A q + b = 0 with orthonormal rows, so |A q + b| is the coefficient
/// distance from q to the affine set.
struct AffineConstraint {
  ConstraintKind kind = ConstraintKind::CornerFree;
  MatX A = MatX::Zero(0, kNumCoeffs);
  VecX b = VecX::Zero(0);

  int rows() const { return static_cast<int>(A.rows()); }
  VecX residual(const Vec15& q) const { return A * q + b; }
  /// Closest point of the affine set.
  Vec15 project(const Vec15& q) const { return q - A.transpose() * (A * q + b); }
};

/// g - A^T A g.
Vec15 project_gradient(const Vec15& g, const AffineConstraint& c);

/// Random-batch construction: samples of the defining family are stacked
/// and the rows are an orthonormal basis of the complement of their affine
/// span (singular values below threshold * sigma_max count as zero).
struct BatchOptions {
  int samples = 200;
  double threshold = 1e-9;
  int attempts = 5;
  std::uint64_t seed = 0x5eed;
};

/// Odeco tensors with eigenpair (sizing, n): 10 rows.
AffineConstraint build_alignment(const Vec3& n, double sizing, const BatchOptions& opts = {});
/// Odeco tensors with eigenpair (sizing, t); the other two axes are free.
AffineConstraint build_feature_alignment(const Vec3& t, double sizing, const BatchOptions& opts = {});
/// Unit frames in any orientation.
AffineConstraint build_octahedral(const BatchOptions& opts = {});
/// Eigenpair (1, n) with equal tangential eigenvalues: 12 rows.
AffineConstraint build_isotropy(const Vec3& n, const BatchOptions& opts = {});
AffineConstraint corner_free();

/// The constraint of the rotated family: q satisfies the result iff
/// rotate_sh(q, R^T) satisfies c.
AffineConstraint rotate_constraint(const AffineConstraint& c, const Mat3& rotation);

/// Proper rotation taking e_z to n.
Mat3 rotation_to(const Vec3& n);

/// Intersection of two affine sets as a single constraint with orthonormal
/// rows, or nullopt when they do not meet (inconsistency above `tol`).
std::optional<AffineConstraint> intersect(const AffineConstraint& a, const AffineConstraint& b, double tol = 1e-9);

/// Thread-safe memo keyed on the direction rounded to 1e-12 and the sizing.
/// With `rotate_canonical`, direction-dependent constraints are the batch
/// constraint for e_z rotated onto the requested direction (one batch per
/// sizing instead of one per direction).
class ConstraintCache {
 public:
  explicit ConstraintCache(BatchOptions opts = {}, bool rotate_canonical = true)
      : opts_(opts), rotate_canonical_(rotate_canonical) {}

  std::shared_ptr<const AffineConstraint> alignment(const Vec3& n, double sizing);
  std::shared_ptr<const AffineConstraint> feature_alignment(const Vec3& t, double sizing);
  std::shared_ptr<const AffineConstraint> isotropy(const Vec3& n);
  std::shared_ptr<const AffineConstraint> octahedral();
  std::size_t size() const;

 private:
  using Key = std::tuple<int, long long, long long, long long, long long>;
  template <class Build>
  std::shared_ptr<const AffineConstraint> lookup(const Key& key, Build&& build);
  static Key make_key(int kind, const Vec3& d, double sizing);

  BatchOptions opts_;
  bool rotate_canonical_;
  mutable std::mutex mutex_;
  std::map<Key, std::shared_ptr<const AffineConstraint>> entries_;
};

}  // namespace odeco

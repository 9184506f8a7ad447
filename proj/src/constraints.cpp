#include "odeco/constraints.hpp"

#include <cmath>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>

#include <Eigen/SVD>

#include "odeco/errors.hpp"
#include "odeco/tensor.hpp"

namespace odeco {

namespace {

Vec3 checked_unit(const Vec3& d, const char* what) {
  const double len = d.norm();
  if (!(std::abs(len - 1.0) < 1e-6)) throw Error(std::string(what) + ": direction must be a unit vector");
  return d / len;
}

void check_sizing(double s) {
  if (!(s > 0) || !std::isfinite(s)) throw Error("constraint sizing must be positive");
}

// Orthonormal basis with the given first column.
Mat3 frame_around(const Vec3& a) {
  const Vec3 helper = std::abs(a[0]) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
  const Vec3 b = (helper - helper.dot(a) * a).normalized();
  Mat3 m;
  m.col(0) = a;
  m.col(1) = b;
  m.col(2) = a.cross(b);
  return m;
}

// Random rotation of the last two columns about the first.
Mat3 spin(const Mat3& base, double angle) {
  Mat3 m = base;
  const double c = std::cos(angle), s = std::sin(angle);
  m.col(1) = c * base.col(1) + s * base.col(2);
  m.col(2) = -s * base.col(1) + c * base.col(2);
  return m;
}

using Sampler = std::function<Vec15(std::mt19937_64&)>;

AffineConstraint from_batch(ConstraintKind kind, const Sampler& sample, std::optional<int> expected_rows,
                            const BatchOptions& opts) {
  for (int attempt = 0; attempt < opts.attempts; ++attempt) {
    std::mt19937_64 rng(opts.seed + 0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(attempt));
    const Vec15 q0 = sample(rng);
    MatX diffs(opts.samples, kNumCoeffs);
    for (int i = 0; i < opts.samples; ++i) diffs.row(i) = (sample(rng) - q0).transpose();

    Eigen::JacobiSVD<MatX> svd(diffs, Eigen::ComputeFullV);
    const auto& sigma = svd.singularValues();
    const double cut = opts.threshold * sigma[0];
    int rank = 0;
    while (rank < sigma.size() && sigma[rank] >= cut) ++rank;
    const int rows = kNumCoeffs - rank;
    if (expected_rows && rows != *expected_rows) continue;
    // a clean gap between the span and its complement
    if (rank > 0 && rank < sigma.size() && sigma[rank - 1] < 1e3 * cut) continue;

    AffineConstraint c;
    c.kind = kind;
    c.A = svd.matrixV().rightCols(rows).transpose();
    c.b = -c.A * q0;
    return c;
  }
  std::ostringstream msg;
  msg << to_string(kind) << ": sample batch did not produce a stable null space";
  if (expected_rows) msg << " of dimension " << *expected_rows;
  throw RankDeficientBatch(msg.str());
}

Sampler eigenpair_family(const Vec3& d, double sizing) {
  const Mat3 base = frame_around(d);
  return [base, sizing](std::mt19937_64& rng) {
    std::uniform_real_distribution<double> size(0.1, 3.0), angle(0.0, 2 * std::numbers::pi);
    Frame f;
    f.axes = spin(base, angle(rng));
    f.eigenvalues = Vec3(sizing, size(rng), size(rng));
    return from_frame(f).coeffs();
  };
}

}  // namespace

const char* to_string(ConstraintKind kind) {
  switch (kind) {
    case ConstraintKind::SurfaceAlign: return "surface-align";
    case ConstraintKind::FeatureAlign: return "feature-align";
    case ConstraintKind::CornerFree: return "corner-free";
    case ConstraintKind::Octahedral: return "octahedral";
    case ConstraintKind::Isotropy: return "isotropy";
    case ConstraintKind::Combined: return "combined";
  }
  return "unknown";
}

Vec15 project_gradient(const Vec15& g, const AffineConstraint& c) {
  if (c.rows() == 0) return g;
  return g - c.A.transpose() * (c.A * g);
}

AffineConstraint build_alignment(const Vec3& n, double sizing, const BatchOptions& opts) {
  check_sizing(sizing);
  return from_batch(ConstraintKind::SurfaceAlign, eigenpair_family(checked_unit(n, "build_alignment"), sizing), 10,
                    opts);
}

AffineConstraint build_feature_alignment(const Vec3& t, double sizing, const BatchOptions& opts) {
  check_sizing(sizing);
  // The eigenpair (sizing, t) fixes the same affine set whichever role t
  // plays in the frame, so the row count matches surface alignment.
  return from_batch(ConstraintKind::FeatureAlign,
                    eigenpair_family(checked_unit(t, "build_feature_alignment"), sizing), 10, opts);
}

AffineConstraint build_octahedral(const BatchOptions& opts) {
  Sampler sample = [](std::mt19937_64& rng) {
    Frame f;
    f.axes = random_rotation(rng);
    return from_frame(f).coeffs();
  };
  return from_batch(ConstraintKind::Octahedral, sample, std::nullopt, opts);
}

AffineConstraint build_isotropy(const Vec3& n, const BatchOptions& opts) {
  const Mat3 base = frame_around(checked_unit(n, "build_isotropy"));
  Sampler sample = [base](std::mt19937_64& rng) {
    std::uniform_real_distribution<double> size(0.1, 3.0), angle(0.0, 2 * std::numbers::pi);
    const double a = size(rng);
    Frame f;
    f.axes = spin(base, angle(rng));
    f.eigenvalues = Vec3(1.0, a, a);
    return from_frame(f).coeffs();
  };
  return from_batch(ConstraintKind::Isotropy, sample, 12, opts);
}

AffineConstraint corner_free() { return AffineConstraint{}; }

AffineConstraint rotate_constraint(const AffineConstraint& c, const Mat3& rotation) {
  AffineConstraint out = c;
  if (c.rows() > 0) out.A = c.A * sh_rotation_matrix(rotation).transpose();
  return out;
}

Mat3 rotation_to(const Vec3& n) {
  const Mat3 f = frame_around(n.normalized());
  Mat3 r;
  r.col(0) = f.col(1);
  r.col(1) = f.col(2);
  r.col(2) = f.col(0);
  return r;
}

std::optional<AffineConstraint> intersect(const AffineConstraint& a, const AffineConstraint& b, double tol) {
  MatX stacked(a.rows() + b.rows(), kNumCoeffs);
  VecX rhs(a.rows() + b.rows());
  stacked << a.A, b.A;
  rhs << a.b, b.b;
  if (stacked.rows() == 0) return AffineConstraint{};

  Eigen::JacobiSVD<MatX> svd(stacked, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& sigma = svd.singularValues();
  int rank = 0;
  while (rank < sigma.size() && sigma[rank] > 1e-9 * sigma[0]) ++rank;

  const VecX proj = svd.matrixU().transpose() * rhs;
  if (proj.tail(proj.size() - rank).norm() > tol) return std::nullopt;

  AffineConstraint c;
  c.kind = ConstraintKind::Combined;
  c.A = svd.matrixV().leftCols(rank).transpose();
  c.b = proj.head(rank).cwiseQuotient(sigma.head(rank));
  return c;
}

ConstraintCache::Key ConstraintCache::make_key(int kind, const Vec3& d, double sizing) {
  auto r = [](double x) { return std::llround(x * 1e12); };
  return {kind, r(d[0]), r(d[1]), r(d[2]), r(sizing)};
}

template <class Build>
std::shared_ptr<const AffineConstraint> ConstraintCache::lookup(const Key& key, Build&& build) {
  {
    std::lock_guard lock(mutex_);
    auto it = entries_.find(key);
    if (it != entries_.end()) return it->second;
  }
  auto value = std::make_shared<const AffineConstraint>(build());
  std::lock_guard lock(mutex_);
  return entries_.emplace(key, std::move(value)).first->second;
}

std::shared_ptr<const AffineConstraint> ConstraintCache::alignment(const Vec3& n, double sizing) {
  return lookup(make_key(0, n, sizing), [&] {
    if (!rotate_canonical_) return build_alignment(n, sizing, opts_);
    const auto base = lookup(make_key(0, Vec3::UnitZ(), sizing), [&] { return build_alignment(Vec3::UnitZ(), sizing, opts_); });
    return rotate_constraint(*base, rotation_to(checked_unit(n, "alignment")));
  });
}

std::shared_ptr<const AffineConstraint> ConstraintCache::feature_alignment(const Vec3& t, double sizing) {
  return lookup(make_key(1, t, sizing), [&] {
    if (!rotate_canonical_) return build_feature_alignment(t, sizing, opts_);
    const auto base =
        lookup(make_key(1, Vec3::UnitZ(), sizing), [&] { return build_feature_alignment(Vec3::UnitZ(), sizing, opts_); });
    return rotate_constraint(*base, rotation_to(checked_unit(t, "feature_alignment")));
  });
}

std::shared_ptr<const AffineConstraint> ConstraintCache::isotropy(const Vec3& n) {
  return lookup(make_key(2, n, 0.0), [&] {
    if (!rotate_canonical_) return build_isotropy(n, opts_);
    const auto base = lookup(make_key(2, Vec3::UnitZ(), 0.0), [&] { return build_isotropy(Vec3::UnitZ(), opts_); });
    return rotate_constraint(*base, rotation_to(checked_unit(n, "isotropy")));
  });
}

std::shared_ptr<const AffineConstraint> ConstraintCache::octahedral() {
  return lookup(make_key(3, Vec3::Zero(), 0.0), [&] { return build_octahedral(opts_); });
}

std::size_t ConstraintCache::size() const {
  std::lock_guard lock(mutex_);
  return entries_.size();
}

}  // namespace odeco

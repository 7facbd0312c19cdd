// Copyright 2026 The freqfield Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Core>

namespace freqfield {

using Vec3 = Eigen::Vector3d;

struct Box3 {
  Vec3 lo = Vec3::Zero();
  Vec3 hi = Vec3::Ones();

  [[nodiscard]] Vec3 extent() const { return hi - lo; }
  [[nodiscard]] bool contains(const Vec3& p) const {
    return (p.array() >= lo.array()).all() && (p.array() <= hi.array()).all();
  }
  [[nodiscard]] bool strictly_contains(const Vec3& p) const {
    return (p.array() > lo.array()).all() && (p.array() < hi.array()).all();
  }
  [[nodiscard]] bool degenerate() const { return !((hi.array() > lo.array()).all()); }
};

inline bool is_unit(const Vec3& v, double tol = 1e-9) { return std::abs(v.norm() - 1.0) <= tol; }

}  // namespace freqfield

#include "iontrap/field_cache.hpp"

#include <algorithm>
#include <cmath>

#include "iontrap/error.hpp"

namespace iontrap {

CachedField::CachedField(FieldModelPtr source, const Vec3& box_min, const Vec3& box_max, int nodes)
    : source_(std::move(source)), lo_(box_min), hi_(box_max) {
  if (!source_) throw SolverError("field cache needs a source model");
  if (nodes < 4) throw SolverError("field cache needs at least 4 nodes per axis");
  for (int d = 0; d < 3; ++d) {
    if (!(hi_[d] > lo_[d])) throw SolverError("field cache box must have positive extent on every axis");
  }
  ne_ = source_->electrode_count();
  n_ = static_cast<std::size_t>(nodes);
  h_ = (1.0 / (nodes - 1)) * (hi_ - lo_);
  table_.assign(n_ * n_ * n_ * ne_ * 4, 0.0);

  const auto total = static_cast<std::ptrdiff_t>(n_ * n_ * n_);
#pragma omp parallel
  {
    std::vector<Vec3> f(ne_);
    std::vector<double> phi(ne_);
#pragma omp for schedule(dynamic, 8)
    for (std::ptrdiff_t idx = 0; idx < total; ++idx) {
      const auto u = static_cast<std::size_t>(idx);
      const std::size_t i = u / (n_ * n_), j = (u / n_) % n_, k = u % n_;
      const Vec3 p{lo_.x + i * h_.x, lo_.y + j * h_.y, lo_.z + k * h_.z};
      source_->basis_fields(p, f);
      source_->basis_potentials(p, phi);
      double* out = &table_[u * ne_ * 4];
      for (std::size_t e = 0; e < ne_; ++e) {
        out[4 * e] = f[e].x;
        out[4 * e + 1] = f[e].y;
        out[4 * e + 2] = f[e].z;
        out[4 * e + 3] = phi[e];
      }
    }
  }
}

bool CachedField::contains(const Vec3& p) const {
  return p.x >= lo_.x && p.x <= hi_.x && p.y >= lo_.y && p.y <= hi_.y && p.z >= lo_.z && p.z <= hi_.z;
}

CachedField::Stencil CachedField::stencil(const Vec3& p) const {
  Stencil s;
  for (int d = 0; d < 3; ++d) {
    const double u = (p[d] - lo_[d]) / h_[d];
    const auto cell = static_cast<long>(std::floor(u));
    const long base = std::clamp(cell - 1, 0L, static_cast<long>(n_) - 4);
    s.base[d] = static_cast<std::size_t>(base);
    const double t = u - base;  // stencil nodes at 0, 1, 2, 3
    s.w[d][0] = -(t - 1.0) * (t - 2.0) * (t - 3.0) / 6.0;
    s.w[d][1] = t * (t - 2.0) * (t - 3.0) / 2.0;
    s.w[d][2] = -t * (t - 1.0) * (t - 3.0) / 2.0;
    s.w[d][3] = t * (t - 1.0) * (t - 2.0) / 6.0;
  }
  return s;
}

Vec3 CachedField::field(const Vec3& p, std::span<const double> volts) const {
  if (!contains(p)) {
    fallbacks_.fetch_add(1, std::memory_order_relaxed);
    return source_->field(p, volts);
  }
  const Stencil s = stencil(p);
  Vec3 sum{};
  for (int a = 0; a < 4; ++a) {
    for (int b = 0; b < 4; ++b) {
      const double wab = s.w[0][a] * s.w[1][b];
      for (int c = 0; c < 4; ++c) {
        const double w = wab * s.w[2][c];
        const double* v = node(s.base[0] + a, s.base[1] + b, s.base[2] + c);
        for (std::size_t e = 0; e < ne_; ++e) {
          const double we = w * volts[e];
          sum.x += we * v[4 * e];
          sum.y += we * v[4 * e + 1];
          sum.z += we * v[4 * e + 2];
        }
      }
    }
  }
  return sum;
}

double CachedField::potential(const Vec3& p, std::span<const double> volts) const {
  if (!contains(p)) {
    fallbacks_.fetch_add(1, std::memory_order_relaxed);
    return source_->potential(p, volts);
  }
  const Stencil s = stencil(p);
  double sum = 0.0;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b)
      for (int c = 0; c < 4; ++c) {
        const double w = s.w[0][a] * s.w[1][b] * s.w[2][c];
        const double* v = node(s.base[0] + a, s.base[1] + b, s.base[2] + c);
        for (std::size_t e = 0; e < ne_; ++e) sum += w * volts[e] * v[4 * e + 3];
      }
  return sum;
}

void CachedField::basis_fields(const Vec3& p, std::span<Vec3> out) const {
  if (!contains(p)) {
    fallbacks_.fetch_add(1, std::memory_order_relaxed);
    source_->basis_fields(p, out);
    return;
  }
  const Stencil s = stencil(p);
  std::fill(out.begin(), out.end(), Vec3{});
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b)
      for (int c = 0; c < 4; ++c) {
        const double w = s.w[0][a] * s.w[1][b] * s.w[2][c];
        const double* v = node(s.base[0] + a, s.base[1] + b, s.base[2] + c);
        for (std::size_t e = 0; e < ne_; ++e) out[e] += w * Vec3{v[4 * e], v[4 * e + 1], v[4 * e + 2]};
      }
}

void CachedField::basis_potentials(const Vec3& p, std::span<double> out) const {
  if (!contains(p)) {
    fallbacks_.fetch_add(1, std::memory_order_relaxed);
    source_->basis_potentials(p, out);
    return;
  }
  const Stencil s = stencil(p);
  std::fill(out.begin(), out.end(), 0.0);
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b)
      for (int c = 0; c < 4; ++c) {
        const double w = s.w[0][a] * s.w[1][b] * s.w[2][c];
        const double* v = node(s.base[0] + a, s.base[1] + b, s.base[2] + c);
        for (std::size_t e = 0; e < ne_; ++e) out[e] += w * v[4 * e + 3];
      }
}

} // namespace iontrap

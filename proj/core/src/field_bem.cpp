#include "iontrap/field_bem.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <sstream>

#include "iontrap/constants.hpp"
#include "iontrap/error.hpp"

namespace iontrap {
namespace {

using constants::coulomb;
using constants::epsilon0;
using constants::pi;

constexpr double near_factor = 2.0;  // near field: centroid distance < 2 panel diameters
constexpr double pivot_floor = 1e-14;

bool is_near(const Panel& panel, const Vec3& target, double diameter) {
  const double lim = near_factor * diameter;
  return norm2(target - panel.centroid) < lim * lim;
}

double potential_kernel(const Panel& panel, double diameter, const Vec3& target) {
  if (!is_near(panel, target, diameter)) return coulomb * panel.area / norm(target - panel.centroid);
  double sum = 0.0;
  for (const auto& q : subdivide(panel)) sum += q.weight / norm(target - q.position);
  return coulomb * sum;
}

Vec3 field_kernel(const Panel& panel, double diameter, const Vec3& target) {
  auto point = [&](const Vec3& src, double w) {
    const Vec3 d = target - src;
    const double r2 = norm2(d);
    return (w / (r2 * std::sqrt(r2))) * d;
  };
  if (!is_near(panel, target, diameter)) return coulomb * point(panel.centroid, panel.area);
  Vec3 sum{};
  for (const auto& q : subdivide(panel)) sum += point(q.position, q.weight);
  return coulomb * sum;
}

} // namespace

double panel_potential(const Panel& panel, const Vec3& target) {
  return potential_kernel(panel, panel.diameter(), target);
}

Vec3 panel_field(const Panel& panel, const Vec3& target) { return field_kernel(panel, panel.diameter(), target); }

double self_potential(const Panel& panel) { return std::sqrt(panel.area / pi) / (2.0 * epsilon0); }

InfluenceMatrix assemble_influence_matrix(const TrapGeometry& mesh) {
  const auto& panels = mesh.panels();
  const std::size_t n = panels.size();
  if (n == 0) throw GeometryError("cannot assemble an influence matrix for an empty mesh");
  mesh.check_no_overlap();

  std::vector<double> diam(n);
  for (std::size_t j = 0; j < n; ++j) diam[j] = panels[j].diameter();

  InfluenceMatrix a(n);
#pragma omp parallel for schedule(dynamic, 16)
  for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(n); ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    const Vec3& target = panels[i].centroid;
    for (std::size_t j = 0; j < n; ++j) {
      a(i, j) = i == j ? self_potential(panels[j]) : potential_kernel(panels[j], diam[j], target);
    }
  }
  return a;
}

double ChargeBasis::max_residual() const {
  double r = 0.0;
  for (double v : residual_inf) r = std::max(r, v);
  return r;
}

ChargeBasis solve_charge_basis(const InfluenceMatrix& matrix, const TrapGeometry& mesh) {
  const std::size_t n = matrix.size();
  if (n != mesh.panels().size()) throw SolverError("influence matrix size does not match the mesh");
  const std::size_t ne = mesh.electrode_count();

  using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const Eigen::Map<const RowMatrix> a(matrix.data().data(), static_cast<Eigen::Index>(n),
                                      static_cast<Eigen::Index>(n));
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(a);

  const Eigen::VectorXd diag = lu.matrixLU().diagonal().cwiseAbs();
  const double max_pivot = diag.maxCoeff();
  Eigen::Index worst = 0;
  const double min_pivot = diag.minCoeff(&worst);
  if (!(min_pivot >= pivot_floor * max_pivot)) {
    // P maps original row i to row indices[i] of the factorized matrix
    const auto& ind = lu.permutationP().indices();
    Eigen::Index original = 0;
    for (Eigen::Index i = 0; i < ind.size(); ++i)
      if (ind[i] == worst) original = i;
    const auto& p = mesh.panels()[static_cast<std::size_t>(original)];
    std::ostringstream msg;
    msg << "influence matrix is singular or ill-conditioned: pivot ratio " << min_pivot / max_pivot << " at panel "
        << original << " (electrode '" << mesh.electrodes()[p.electrode_id].label << "', centroid " << p.centroid
        << ")";
    throw SolverError(msg.str());
  }

  ChargeBasis basis;
  basis.panel_count = n;
  basis.electrode_count = ne;
  basis.sigma.assign(n * ne, 0.0);
  basis.residual_inf.assign(ne, 0.0);
  basis.min_pivot_ratio = min_pivot / max_pivot;

  for (std::size_t e = 0; e < ne; ++e) {
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
    for (std::size_t idx : mesh.electrodes()[e].panels) rhs[static_cast<Eigen::Index>(idx)] = 1.0;
    const Eigen::VectorXd x = lu.solve(rhs);
    basis.residual_inf[e] = (a * x - rhs).cwiseAbs().maxCoeff();
    for (std::size_t j = 0; j < n; ++j) basis.sigma[j * ne + e] = x[static_cast<Eigen::Index>(j)];
  }
  return basis;
}

double total_charge(const ChargeBasis& basis, const TrapGeometry& mesh, std::span<const double> volts) {
  double q = 0.0;
  for (std::size_t j = 0; j < basis.panel_count; ++j) {
    double s = 0.0;
    for (std::size_t e = 0; e < basis.electrode_count; ++e) s += volts[e] * basis.at(j, e);
    q += s * mesh.panels()[j].area;
  }
  return q;
}

BemField::BemField(std::shared_ptr<const TrapGeometry> geometry, ChargeBasis basis)
    : geometry_(std::move(geometry)), basis_(std::move(basis)) {
  if (!geometry_) throw SolverError("BEM field needs a geometry");
  if (basis_.panel_count != geometry_->panels().size() || basis_.electrode_count != geometry_->electrode_count()) {
    throw SolverError("charge basis does not match the geometry");
  }
  diameter_.reserve(basis_.panel_count);
  for (const auto& p : geometry_->panels()) diameter_.push_back(p.diameter());
}

std::shared_ptr<BemField> BemField::solve(std::shared_ptr<const TrapGeometry> geometry) {
  const auto matrix = assemble_influence_matrix(*geometry);
  auto basis = solve_charge_basis(matrix, *geometry);
  return std::make_shared<BemField>(std::move(geometry), std::move(basis));
}

void BemField::flag_inside(const Vec3& p) const {
  if (geometry_->electrode_containing(p)) inside_count_.fetch_add(1, std::memory_order_relaxed);
}

void BemField::basis_potentials(const Vec3& p, std::span<double> out) const {
  flag_inside(p);
  const std::size_t ne = basis_.electrode_count;
  std::fill(out.begin(), out.end(), 0.0);
  const auto& panels = geometry_->panels();
  for (std::size_t j = 0; j < basis_.panel_count; ++j) {
    const double k = potential_kernel(panels[j], diameter_[j], p);
    const double* s = &basis_.sigma[j * ne];
    for (std::size_t e = 0; e < ne; ++e) out[e] += s[e] * k;
  }
}

void BemField::basis_fields(const Vec3& p, std::span<Vec3> out) const {
  flag_inside(p);
  const std::size_t ne = basis_.electrode_count;
  std::fill(out.begin(), out.end(), Vec3{});
  const auto& panels = geometry_->panels();
  for (std::size_t j = 0; j < basis_.panel_count; ++j) {
    const Vec3 k = field_kernel(panels[j], diameter_[j], p);
    const double* s = &basis_.sigma[j * ne];
    for (std::size_t e = 0; e < ne; ++e) out[e] += s[e] * k;
  }
}

double BemField::potential(const Vec3& p, std::span<const double> volts) const {
  std::vector<double> phi(basis_.electrode_count);
  basis_potentials(p, phi);
  double sum = 0.0;
  for (std::size_t e = 0; e < phi.size(); ++e) sum += volts[e] * phi[e];
  return sum;
}

Vec3 BemField::field(const Vec3& p, std::span<const double> volts) const {
  std::vector<Vec3> f(basis_.electrode_count);
  basis_fields(p, f);
  Vec3 sum{};
  for (std::size_t e = 0; e < f.size(); ++e) sum += volts[e] * f[e];
  return sum;
}

} // namespace iontrap

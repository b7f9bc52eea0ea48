#include "hepi/pde.hpp"

#include <cmath>
#include <sstream>

namespace hepi {

FemOperators assemble(const TriMesh& mesh, const NodalVectors& grad_v, real diffusion, DriftForm form) {
  const int n = mesh.num_nodes();
  if (grad_v.cols() != n) throw Error("assemble: gradient has " + std::to_string(grad_v.cols()) +
                                      " columns for " + std::to_string(n) + " nodes");
  if (diffusion < 0) throw Error("assemble: negative diffusion");
  using Triplet = Eigen::Triplet<real>;
  std::vector<Triplet> m, k, t;
  const auto nt = static_cast<std::size_t>(mesh.num_triangles());
  m.reserve(9 * nt);
  k.reserve(9 * nt);
  t.reserve(9 * nt);
  const auto& tris = mesh.triangles();
  for (int e = 0; e < mesh.num_triangles(); ++e) {
    const real area = mesh.triangle_areas()[e];
    const auto g = mesh.hat_gradients(e);
    const Vec2 gv = (grad_v.col(tris(0, e)) + grad_v.col(tris(1, e)) + grad_v.col(tris(2, e))) / 3.0;
    for (int a = 0; a < 3; ++a) {
      const int i = tris(a, e);
      for (int b = 0; b < 3; ++b) {
        const int j = tris(b, e);
        m.emplace_back(i, j, area * (a == b ? 2.0 : 1.0) / 12.0);
        k.emplace_back(i, j, diffusion * area * g.col(a).dot(g.col(b)));
        const real d = form == DriftForm::Reduced ? -gv.dot(g.col(b)) : gv.dot(g.col(a));
        if (d != 0) t.emplace_back(i, j, d * area / 3.0);
      }
    }
  }
  FemOperators ops;
  ops.mass.resize(n, n);
  ops.stiffness.resize(n, n);
  ops.drift.resize(n, n);
  ops.mass.setFromTriplets(m.begin(), m.end());
  ops.stiffness.setFromTriplets(k.begin(), k.end());
  ops.drift.setFromTriplets(t.begin(), t.end());
  ops.lumped = ops.mass * Eigen::VectorXd::Ones(n);
  ops.diffusion = diffusion;
  ops.form = form;
  return ops;
}

real effective_beta(real out_of_home_change_pct, real beta_const) {
  if (beta_const < 0) throw Error("effective_beta: beta_const must be non-negative");
  return (1.0 - out_of_home_change_pct / 100.0) * beta_const;
}

StateCounts total_mass(const Eigen::VectorXd& lumped, const CompartmentField& field) {
  if (field.values.rows() != lumped.size()) throw Error("total_mass: field size does not match the mesh");
  StateCounts out{};
  for (int c = 0; c < kNumStates; ++c) out[static_cast<std::size_t>(c)] = lumped.dot(field.values.col(c));
  return out;
}

StateCounts total_mass(const TriMesh& mesh, const CompartmentField& field) {
  return total_mass(mesh.lumped_mass(), field);
}

real sum(const StateCounts& c) {
  real s = 0;
  for (real v : c) s += v;
  return s;
}

CompartmentField initialize(const TriMesh& mesh, const NodalField& init_dist, const StateCounts& totals) {
  if (init_dist.size() != mesh.num_nodes()) throw Error("initialize: distribution size does not match the mesh");
  CompartmentField f;
  f.values.resize(mesh.num_nodes(), kNumStates);
  for (int c = 0; c < kNumStates; ++c) {
    const real total = totals[static_cast<std::size_t>(c)];
    if (total < 0) throw Error("initialize: negative total for " + std::string(to_string(kAllStates[c])));
    f.values.col(c) = total * init_dist;
  }
  return f;
}

void reaction_rhs(const Eigen::MatrixXd& u, real beta_eff, const RateSet& r, Eigen::MatrixXd& out) {
  out.resize(u.rows(), kNumStates);
  const auto S = u.col(0).array(), E = u.col(1).array(), I = u.col(2).array(), SY = u.col(3).array(),
             H = u.col(4).array(), C = u.col(5).array(), HC = u.col(6).array();
  const Eigen::ArrayXd inf = beta_eff * S * (I + SY);
  out.col(0) = -inf;
  out.col(1) = inf - r.sigma * E;
  out.col(2) = r.sigma * E - (r.phi_i + r.gamma) * I;
  out.col(3) = r.gamma * I - (r.phi_sy + r.eta) * SY;
  out.col(4) = r.eta * SY - (r.phi_h + r.kappa) * H;
  out.col(5) = r.kappa * H - r.eta_c * C;
  out.col(6) = r.eta_c * C - r.phi_hc * HC;
  out.col(7) = r.phi_i * I + r.phi_sy * SY + r.phi_h * H + r.phi_hc * HC;
}

PdeSolver::PdeSolver(const TriMesh& mesh, FemOperators ops, real dt, ReactionIntegrator integrator)
    : mesh_(&mesh), ops_(std::move(ops)), dt_(dt), integrator_(integrator) {
  if (!(dt > 0)) throw Error("PdeSolver: dt must be positive");
  if (ops_.mass.rows() != mesh.num_nodes()) throw Error("PdeSolver: operators do not match the mesh");
  system_ = ops_.mass + dt_ * (ops_.stiffness + ops_.drift);
  system_.makeCompressed();
  lu_ = std::make_unique<Eigen::SparseLU<SparseMatrix>>();
  lu_->compute(system_);
  if (lu_->info() != Eigen::Success) throw Error("PdeSolver: factorization failed: " + lu_->lastErrorMessage());
}

StepReport PdeSolver::step(CompartmentField& field, real beta_eff, const RateSet& rates) {
  const Eigen::MatrixXd& u = field.values;
  if (u.rows() != mesh_->num_nodes() || u.cols() != kNumStates) throw Error("PdeSolver: field shape mismatch");
  Eigen::MatrixXd ustar;
  if (integrator_ == ReactionIntegrator::ExplicitEuler) {
    reaction_rhs(u, beta_eff, rates, k1_);
    ustar = u + dt_ * k1_;
  } else {
    reaction_rhs(u, beta_eff, rates, k1_);
    tmp_ = u + 0.5 * dt_ * k1_;
    reaction_rhs(tmp_, beta_eff, rates, k2_);
    tmp_ = u + 0.5 * dt_ * k2_;
    reaction_rhs(tmp_, beta_eff, rates, k3_);
    tmp_ = u + dt_ * k3_;
    reaction_rhs(tmp_, beta_eff, rates, k4_);
    ustar = u + (dt_ / 6.0) * (k1_ + 2.0 * k2_ + 2.0 * k3_ + k4_);
  }
  const Eigen::MatrixXd rhs = ops_.mass * ustar;
  Eigen::MatrixXd next = lu_->solve(rhs);
  StepReport rep;
  const real rhs_norm = rhs.norm();
  rep.relative_residual = rhs_norm > 0 ? (system_ * next - rhs).norm() / rhs_norm : (system_ * next).norm();
  if (lu_->info() != Eigen::Success || !next.allFinite() || rep.relative_residual > 1e-8) {
    std::ostringstream os;
    os << "PdeSolver: linear solve failed at t=" << field.time << " (relative residual " << rep.relative_residual
       << ")";
    throw Error(os.str());
  }
  for (int c = 0; c < kNumStates; ++c)
    for (int i = 0; i < next.rows(); ++i)
      if (next(i, c) < 0) {
        rep.clipped_mass -= ops_.lumped[i] * next(i, c);
        next(i, c) = 0;
      }
  clipped_total_ += rep.clipped_mass;
  field.values = std::move(next);
  field.time += dt_;
  return rep;
}

StepReport step(CompartmentField& field, const TriMesh& mesh, const FemOperators& ops, real beta_eff,
                const RateSet& rates, real dt, ReactionIntegrator integrator) {
  PdeSolver solver(mesh, ops, dt, integrator);
  return solver.step(field, beta_eff, rates);
}

std::string field_csv_header() { return "time_days,node_id,S,E,I,SY,H,C,HC,R\n"; }

void append_field_csv(std::string& out, const CompartmentField& field) {
  const std::string t = format_real(field.time);
  for (int i = 0; i < field.num_nodes(); ++i) {
    out += t;
    out += ',';
    out += std::to_string(i);
    for (int c = 0; c < kNumStates; ++c) {
      out += ',';
      out += format_real(field.values(i, c));
    }
    out += '\n';
  }
}

}  // namespace hepi

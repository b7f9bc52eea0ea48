#ifndef HEPI_PDE_HPP
#define HEPI_PDE_HPP

#include "hepi/common.hpp"
#include "hepi/health.hpp"
#include "hepi/mesh.hpp"

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include <memory>

namespace hepi {

using SparseMatrix = Eigen::SparseMatrix<real>;

/// How the drift term of the continuum transport is discretized.
enum class DriftForm {
  /// Non-divergence form grad V . grad u tested against the hat functions
  /// (drops the Laplacian of V). Not exactly mass-conservative when grad V
  /// varies between triangles.
  Reduced,
  /// Divergence form div(u grad V) with the flux integrated by parts
  /// (no-flux boundary). Column sums vanish, so mass is conserved.
  Conservative,
};

/// P1 operators for M du/dt = -(K + T) u + M_L r(u).
struct FemOperators {
  SparseMatrix mass;       // consistent mass M
  SparseMatrix stiffness;  // K = D * int grad phi_i . grad phi_j
  SparseMatrix drift;      // T, see DriftForm
  Eigen::VectorXd lumped;  // row sums of M
  real diffusion = 0;
  DriftForm form = DriftForm::Conservative;
};

/// Assembles M, K and T. grad V is taken per triangle as the mean of its three
/// nodal gradients.
FemOperators assemble(const TriMesh& mesh, const NodalVectors& grad_v, real diffusion,
                      DriftForm form = DriftForm::Conservative);

/// Lumped nodal infection coefficient: (1 - pct / 100) * beta_const.
real effective_beta(real out_of_home_change_pct, real beta_const);

/// Nodal densities (persons / m^2) of the eight compartments, one column per
/// state in HealthState order.
struct CompartmentField {
  Eigen::MatrixXd values;
  real time = 0;  // days

  int num_nodes() const { return static_cast<int>(values.rows()); }
  auto column(HealthState s) { return values.col(index_of(s)); }
  auto column(HealthState s) const { return values.col(index_of(s)); }
};

/// P1 integral (lumped mass inner product) of every compartment.
StateCounts total_mass(const TriMesh& mesh, const CompartmentField& field);
StateCounts total_mass(const Eigen::VectorXd& lumped, const CompartmentField& field);
real sum(const StateCounts& c);

/// Compartment c = totals[c] * init_dist.
CompartmentField initialize(const TriMesh& mesh, const NodalField& init_dist, const StateCounts& totals);

/// Right-hand side of the local compartment system at every node.
void reaction_rhs(const Eigen::MatrixXd& u, real beta_eff, const RateSet& rates, Eigen::MatrixXd& out);

enum class ReactionIntegrator {
  /// u* = u + dt r(u); reaction explicit, transport implicit Euler.
  ExplicitEuler,
  /// Classical fourth-order Runge-Kutta over one step.
  RungeKutta4,
};

struct StepReport {
  real clipped_mass = 0;  // persons removed by clipping negative values
  real relative_residual = 0;
};

/// Time stepper with the factorized transport matrix M + dt (K + T).
///
/// Each step first integrates the nodal reactions over dt (u*), then solves the
/// transport implicitly from there:
///   (M + dt (K + T)) u^{n+1} = M u*.
/// Folding the reaction increment in with M_L instead couples it through
/// M^{-1} M_L, which undershoots below zero next to sharp density peaks.
class PdeSolver {
 public:
  PdeSolver(const TriMesh& mesh, FemOperators ops, real dt,
            ReactionIntegrator integrator = ReactionIntegrator::RungeKutta4);

  StepReport step(CompartmentField& field, real beta_eff, const RateSet& rates);

  const FemOperators& operators() const { return ops_; }
  real dt() const { return dt_; }
  real clipped_total() const { return clipped_total_; }

 private:
  const TriMesh* mesh_;
  FemOperators ops_;
  real dt_;
  ReactionIntegrator integrator_;
  SparseMatrix system_;
  std::unique_ptr<Eigen::SparseLU<SparseMatrix>> lu_;
  real clipped_total_ = 0;
  Eigen::MatrixXd k1_, k2_, k3_, k4_, tmp_;
};

/// One step without keeping the factorization around.
StepReport step(CompartmentField& field, const TriMesh& mesh, const FemOperators& ops, real beta_eff,
                const RateSet& rates, real dt, ReactionIntegrator integrator = ReactionIntegrator::RungeKutta4);

// Per-node dump: `time_days,node_id,S,E,I,SY,H,C,HC,R`.
std::string field_csv_header();
void append_field_csv(std::string& out, const CompartmentField& field);

}  // namespace hepi

#endif  // HEPI_PDE_HPP

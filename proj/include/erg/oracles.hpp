#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "erg/lyapunov_geometry.hpp"
#include "erg/plants.hpp"

namespace erg::oracles {

/// One brute-force check: computed vs reference value with the tolerance it
/// was judged at. pass == (abs_err <= tol_abs or rel_err <= tol_rel).
struct OracleReport {
  std::string name;
  double computed = 0.0;
  double reference = 0.0;
  double abs_err = 0.0;
  double rel_err = 0.0;
  double tol_abs = 0.0;
  double tol_rel = 0.0;
  bool pass = false;
};

OracleReport make_report(std::string name, double computed, double reference, double tol_abs,
                         double tol_rel);

/// Minimum of (x-x_g)'P(x-x_g) on the hyperplane c_x'x + c_g'x_g + d = 0 via
/// the bordered KKT linear system (a direct solve, no use of the threshold
/// formula).
double min_v_on_hyperplane_kkt(const QuadraticForm& form, const PolytopicConstraint& constraint,
                               const Eigen::VectorXd& x_g);

/// Same minimum by multi-start projected gradient descent.
double min_v_on_hyperplane_multistart(const QuadraticForm& form,
                                      const PolytopicConstraint& constraint,
                                      const Eigen::VectorXd& x_g, std::mt19937_64& rng,
                                      int starts = 12, int iterations = 400);

/// Central differences of V along a uniformly sampled segment; one value per
/// interior sample.
std::vector<double> finite_difference_vdot(const std::function<double(const Eigen::VectorXd&)>& v,
                                           const std::vector<Eigen::VectorXd>& segment, double dt);

struct PsdGridResult {
  bool pass = false;
  double worst_eigenvalue = 0.0;
  Eigen::VectorXd worst_point;
};

/// lambda_min(S(q)) >= -1e-10 at every grid point; reports the worst one.
PsdGridResult psd_grid_check(const std::function<Eigen::MatrixXd(const Eigen::VectorXd&)>& s,
                             const std::vector<Eigen::VectorXd>& grid);

/// Signature of the threshold implementation under test; campaigns take it as
/// a parameter so a deliberately corrupted implementation must be caught.
using GammaFn = std::function<double(const PolytopicConstraint&, const QuadraticForm&,
                                     const Eigen::VectorXd&)>;

/// Random feasible instances (n in {2..6}): gamma vs the KKT hyperplane
/// minimum at 1e-8 relative, plus a KKT vs multi-start cross-check.
std::vector<OracleReport> gamma_formula_campaign(std::uint64_t seed, int count,
                                                 const GammaFn& gamma_impl);
std::vector<OracleReport> gamma_formula_campaign(std::uint64_t seed, int count);

/// Random stable systems: Lyapunov solution residual at 1e-9 relative.
std::vector<OracleReport> lyapunov_residual_campaign(std::uint64_t seed, int count);

/// Random double-integrator states: nu_linear optimality (Vdot equals the
/// worst active threshold derivative, checked analytically and by finite
/// differences along the governed flow, plus the largest-nu property).
std::vector<OracleReport> nu_linear_campaign(std::uint64_t seed, int count);

/// Same for the two-link arm and nu_robot, with the full energy Lyapunov
/// function differentiated numerically.
std::vector<OracleReport> nu_robot_campaign(std::uint64_t seed, int count);

/// Arm model sanity: Mdot - 2C skew symmetry, closed-loop energy balance,
/// mass lower bound PSD on a fine grid, and the non-PSD counterexample of
/// the naive constant bound.
std::vector<OracleReport> robot_model_campaign(std::uint64_t seed);

/// Every campaign with sizes scaled by count (count == 0 yields nothing).
std::vector<OracleReport> run_all_campaigns(std::uint64_t seed, int count);

/// Helpers shared with tests.
Eigen::MatrixXd random_spd(int n, std::mt19937_64& rng, double eig_min = 0.3, double eig_max = 3.0);
Eigen::MatrixXd random_hurwitz(int n, std::mt19937_64& rng);

}  // namespace erg::oracles

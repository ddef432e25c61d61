#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bellbox/cmatrix.hpp"
#include "bellbox/scenario.hpp"

namespace bellbox {

/// Bipartite density operator on C^dA (x) C^dB.
class QuantumState {
public:
  /// Checks Hermiticity (1e-12), unit trace (1e-12) and positivity (smallest
  /// eigenvalue >= -1e-10); ValidationError otherwise.
  QuantumState(int dim_a, int dim_b, CMatrix rho);

  static QuantumState pure(int dim_a, int dim_b, const std::vector<Complex>& psi);

  int dim_a() const { return dim_a_; }
  int dim_b() const { return dim_b_; }
  const CMatrix& rho() const { return rho_; }

private:
  int dim_a_;
  int dim_b_;
  CMatrix rho_;
};

/// One POVM per input; effects are ordered by output.
class MeasurementSet {
public:
  /// Each effect Hermitian and PSD within 1e-10; effects of every input sum to
  /// the identity within 1e-10.
  explicit MeasurementSet(std::vector<std::vector<CMatrix>> effects);

  int dimension() const { return dimension_; }
  int inputs() const { return static_cast<int>(effects_.size()); }
  int outputs(int input) const { return static_cast<int>(effects_.at(input).size()); }
  const CMatrix& effect(int input, int output) const { return effects_.at(input).at(output); }
  const std::vector<std::vector<CMatrix>>& effects() const { return effects_; }

private:
  std::vector<std::vector<CMatrix>> effects_;
  int dimension_ = 0;
};

class BellSetup {
public:
  BellSetup(QuantumState state, MeasurementSet alice, MeasurementSet bob);

  const QuantumState& state() const { return state_; }
  const MeasurementSet& alice() const { return alice_; }
  const MeasurementSet& bob() const { return bob_; }

  /// Two parties; inputs = number of POVMs, outputs = effects per POVM.
  Scenario scenario() const;

private:
  QuantumState state_;
  MeasurementSet alice_;
  MeasurementSet bob_;
};

/// Born rule P(a,b|x,y) = Tr[rho (A_a^x (x) B_b^y)].
Behavior behavior_from_setup(const BellSetup& setup);

/// Detector efficiency eta: every effect M becomes eta*M and a no-click effect
/// (1-eta)*I is appended as the last output of every input.
MeasurementSet lift_with_efficiency(const MeasurementSet& measurements, double eta);

/// Both sides lifted with the same efficiency.
BellSetup lift_setup(const BellSetup& setup, double eta);

/// Qubit projectors (I + s n.sigma)/2 with n = (sin t, 0, cos t), s = +1 for
/// output 0 unless `flip`.
std::vector<CMatrix> qubit_projective(double angle, bool flip = false);

/// |psi-> = (|01> - |10>)/sqrt 2.
QuantumState singlet();

/// Catalog:
///   "singlet_chsh"  singlet; Alice at {0, pi/2}, Bob at {pi/4, -pi/4}. Bob's
///                   output 0 is the anti-aligned projector so that
///                   E00 + E01 + E10 - E11 = +2 sqrt 2.
///   "werner"        param v: v*singlet + (1-v)*I/4, same measurements.
///   "product_basis" |00>, one computational-basis measurement per side.
/// "werner(0.5)" is accepted as a spelling of ("werner", 0.5).
BellSetup named_setup(const std::string& name, double param = 1.0);

/// Reproducible random setup. Stream definition (std::mt19937_64 seeded with
/// `seed`; u = (next >> 11) * 2^-53; standard normals by Box-Muller from pairs
/// (u1, u2) as sqrt(-2 ln(1-u1)) * (cos 2 pi u2, sin 2 pi u2), taken as
/// (re, im) of one complex Gaussian):
///   1. dA*dB complex Gaussians form psi, normalized; state |psi><psi|.
///   2. For each Alice input, then each Bob input: d*d complex Gaussians fill a
///      matrix column by column; modified Gram-Schmidt on its columns gives an
///      orthonormal basis e_0..e_{d-1}; effects are |e_k><e_k| in that order,
///      the last one also absorbing the rounding residual I - sum of effects.
/// Dimensions must be in 1..4 per side.
BellSetup random_setup(std::uint64_t seed, int dim_a, int dim_b, int inputs_a, int inputs_b);

/// <(n_a.sigma) (x) (n_b.sigma)> on a two-qubit state, n in the x-z plane.
double spin_correlation(const QuantumState& state, double angle_a, double angle_b);

} // namespace bellbox

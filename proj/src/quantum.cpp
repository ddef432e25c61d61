#include "bellbox/quantum.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <regex>
#include <sstream>

#include "bellbox/error.hpp"

namespace bellbox {
namespace {

constexpr double kStateTol = 1e-12;
constexpr double kPsdTol = 1e-10;
constexpr double kEffectTol = 1e-10;

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(3);
  os << v;
  return os.str();
}

} // namespace

QuantumState::QuantumState(int dim_a, int dim_b, CMatrix rho)
    : dim_a_(dim_a), dim_b_(dim_b), rho_(std::move(rho)) {
  if (dim_a < 1 || dim_b < 1) throw ValidationError("state dimensions must be positive");
  const auto d = static_cast<std::size_t>(dim_a * dim_b);
  if (rho_.rows() != d || rho_.cols() != d)
    throw ValidationError("density operator must be " + std::to_string(d) + "x" + std::to_string(d));
  if (hermiticity_defect(rho_) > kStateTol)
    throw ValidationError("density operator is not Hermitian (defect " + fmt(hermiticity_defect(rho_)) + ")");
  const Complex tr = rho_.trace();
  if (std::abs(tr - 1.0) > kStateTol) throw ValidationError("density operator trace is " + fmt(tr.real()) + ", not 1");
  const double lowest = hermitian_eigenvalues(rho_).front();
  if (lowest < -kPsdTol) throw ValidationError("density operator has negative eigenvalue " + fmt(lowest));
}

QuantumState QuantumState::pure(int dim_a, int dim_b, const std::vector<Complex>& psi) {
  double norm = 0.0;
  for (const auto& v : psi) norm += std::norm(v);
  if (norm <= 0.0) throw ValidationError("state vector is zero");
  std::vector<Complex> unit(psi);
  for (auto& v : unit) v /= std::sqrt(norm);
  return QuantumState(dim_a, dim_b, CMatrix::outer(unit));
}

MeasurementSet::MeasurementSet(std::vector<std::vector<CMatrix>> effects) : effects_(std::move(effects)) {
  if (effects_.empty()) throw ValidationError("measurement set needs at least one input");
  dimension_ = static_cast<int>(effects_.front().empty() ? 0 : effects_.front().front().rows());
  if (dimension_ < 1) throw ValidationError("measurement set needs at least one effect per input");
  const auto d = static_cast<std::size_t>(dimension_);
  for (std::size_t x = 0; x < effects_.size(); ++x) {
    if (effects_[x].empty()) throw ValidationError("input " + std::to_string(x) + " has no effects");
    CMatrix sum(d, d);
    for (std::size_t a = 0; a < effects_[x].size(); ++a) {
      const CMatrix& e = effects_[x][a];
      const std::string where = "input " + std::to_string(x) + " effect " + std::to_string(a);
      if (e.rows() != d || e.cols() != d) throw ValidationError(where + " has the wrong dimension");
      if (hermiticity_defect(e) > kEffectTol) throw ValidationError(where + " is not Hermitian");
      if (hermitian_eigenvalues(e).front() < -kEffectTol) throw ValidationError(where + " is not positive semidefinite");
      sum += e;
    }
    if (sum.distance(CMatrix::identity(d)) > kEffectTol)
      throw ValidationError("effects of input " + std::to_string(x) + " do not sum to the identity");
  }
}

BellSetup::BellSetup(QuantumState state, MeasurementSet alice, MeasurementSet bob)
    : state_(std::move(state)), alice_(std::move(alice)), bob_(std::move(bob)) {
  if (alice_.dimension() != state_.dim_a() || bob_.dimension() != state_.dim_b())
    throw ValidationError("measurement dimensions (" + std::to_string(alice_.dimension()) + "," +
                          std::to_string(bob_.dimension()) + ") do not match the state (" +
                          std::to_string(state_.dim_a()) + "," + std::to_string(state_.dim_b()) + ")");
}

Scenario BellSetup::scenario() const {
  std::vector<std::vector<int>> outs(2);
  for (int x = 0; x < alice_.inputs(); ++x) outs[0].push_back(alice_.outputs(x));
  for (int y = 0; y < bob_.inputs(); ++y) outs[1].push_back(bob_.outputs(y));
  return Scenario({alice_.inputs(), bob_.inputs()}, outs);
}

Behavior behavior_from_setup(const BellSetup& setup) {
  const Scenario s = setup.scenario();
  std::vector<double> p(s.dimension(), 0.0);
  for (int x = 0; x < s.inputs(0); ++x)
    for (int y = 0; y < s.inputs(1); ++y)
      for (int a = 0; a < s.outputs(0, x); ++a)
        for (int b = 0; b < s.outputs(1, y); ++b) {
          const CMatrix joint = kron(setup.alice().effect(x, a), setup.bob().effect(y, b));
          double v = trace_product_real(setup.state().rho(), joint);
          if (v < 0.0 && v > -1e-12) v = 0.0;
          const int in[] = {x, y};
          const int out[] = {a, b};
          p[s.flat_index(in, out)] = v;
        }
  return validate_behavior(s, p, 1e-9);
}

MeasurementSet lift_with_efficiency(const MeasurementSet& measurements, double eta) {
  if (!(eta >= 0.0 && eta <= 1.0)) throw RangeError("efficiency " + fmt(eta) + " outside [0, 1]");
  const auto d = static_cast<std::size_t>(measurements.dimension());
  std::vector<std::vector<CMatrix>> lifted;
  for (const auto& povm : measurements.effects()) {
    std::vector<CMatrix> next;
    for (const auto& e : povm) next.push_back(eta * e);
    next.push_back((1.0 - eta) * CMatrix::identity(d));
    lifted.push_back(std::move(next));
  }
  return MeasurementSet(std::move(lifted));
}

BellSetup lift_setup(const BellSetup& setup, double eta) {
  return BellSetup(setup.state(), lift_with_efficiency(setup.alice(), eta), lift_with_efficiency(setup.bob(), eta));
}

std::vector<CMatrix> qubit_projective(double angle, bool flip) {
  const double s = flip ? -1.0 : 1.0;
  const double nx = std::sin(angle);
  const double nz = std::cos(angle);
  // n.sigma = [[nz, nx], [nx, -nz]]
  auto proj = [&](double sign) {
    CMatrix m(2, 2);
    m(0, 0) = 0.5 * (1.0 + sign * nz);
    m(1, 1) = 0.5 * (1.0 - sign * nz);
    m(0, 1) = 0.5 * sign * nx;
    m(1, 0) = 0.5 * sign * nx;
    return m;
  };
  return {proj(s), proj(-s)};
}

QuantumState singlet() {
  const double h = 1.0 / std::sqrt(2.0);
  return QuantumState::pure(2, 2, {0.0, h, -h, 0.0});
}

namespace {

BellSetup chsh_measurements(QuantumState state) {
  constexpr double pi = std::numbers::pi;
  MeasurementSet alice({qubit_projective(0.0), qubit_projective(pi / 2)});
  MeasurementSet bob({qubit_projective(pi / 4, true), qubit_projective(-pi / 4, true)});
  return BellSetup(std::move(state), std::move(alice), std::move(bob));
}

} // namespace

BellSetup named_setup(const std::string& name, double param) {
  static const std::regex call(R"(^\s*(\w+)\s*\(\s*([-+0-9.eE]+)\s*\)\s*$)");
  std::smatch m;
  if (std::regex_match(name, m, call)) return named_setup(m[1].str(), std::stod(m[2].str()));

  if (name == "singlet_chsh") return chsh_measurements(singlet());
  if (name == "werner") {
    if (!(param >= 0.0 && param <= 1.0)) throw RangeError("werner visibility " + fmt(param) + " outside [0, 1]");
    CMatrix rho = param * singlet().rho() + ((1.0 - param) / 4.0) * CMatrix::identity(4);
    return chsh_measurements(QuantumState(2, 2, std::move(rho)));
  }
  if (name == "product_basis") {
    MeasurementSet z({qubit_projective(0.0)});
    return BellSetup(QuantumState::pure(2, 2, {1.0, 0.0, 0.0, 0.0}), z, z);
  }
  throw ValidationError("unknown setup '" + name + "' (known: singlet_chsh, werner(v), product_basis)");
}

namespace {

class GaussianStream {
public:
  explicit GaussianStream(std::uint64_t seed) : engine_(seed) {}

  Complex next() {
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(1.0 - u1));
    const double t = 2.0 * std::numbers::pi * u2;
    return {r * std::cos(t), r * std::sin(t)};
  }

private:
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  std::mt19937_64 engine_;
};

std::vector<CMatrix> random_projective(GaussianStream& g, int d) {
  const auto n = static_cast<std::size_t>(d);
  std::vector<std::vector<Complex>> cols(n, std::vector<Complex>(n));
  for (std::size_t c = 0; c < n; ++c)
    for (std::size_t r = 0; r < n; ++r) cols[c][r] = g.next();
  for (std::size_t c = 0; c < n; ++c) {
    for (std::size_t k = 0; k < c; ++k) {
      Complex ip = 0.0;
      for (std::size_t r = 0; r < n; ++r) ip += std::conj(cols[k][r]) * cols[c][r];
      for (std::size_t r = 0; r < n; ++r) cols[c][r] -= ip * cols[k][r];
    }
    double norm = 0.0;
    for (const auto& v : cols[c]) norm += std::norm(v);
    norm = std::sqrt(norm);
    for (auto& v : cols[c]) v /= norm;
  }
  std::vector<CMatrix> effects;
  for (const auto& c : cols) effects.push_back(CMatrix::outer(c));
  // Absorb rounding so the POVM sums to the identity to machine precision.
  CMatrix sum(n, n);
  for (const auto& e : effects) sum += e;
  effects.back() += CMatrix::identity(n) - sum;
  return effects;
}

} // namespace

BellSetup random_setup(std::uint64_t seed, int dim_a, int dim_b, int inputs_a, int inputs_b) {
  if (dim_a < 1 || dim_a > 4 || dim_b < 1 || dim_b > 4)
    throw RangeError("random setups support local dimensions 1..4");
  if (inputs_a < 1 || inputs_b < 1) throw RangeError("random setups need at least one input per side");
  GaussianStream g(seed);
  std::vector<Complex> psi(static_cast<std::size_t>(dim_a * dim_b));
  for (auto& v : psi) v = g.next();
  QuantumState state = QuantumState::pure(dim_a, dim_b, psi);
  std::vector<std::vector<CMatrix>> alice, bob;
  for (int x = 0; x < inputs_a; ++x) alice.push_back(random_projective(g, dim_a));
  for (int y = 0; y < inputs_b; ++y) bob.push_back(random_projective(g, dim_b));
  return BellSetup(std::move(state), MeasurementSet(std::move(alice)), MeasurementSet(std::move(bob)));
}

double spin_correlation(const QuantumState& state, double angle_a, double angle_b) {
  if (state.dim_a() != 2 || state.dim_b() != 2) throw ValidationError("spin correlation needs two qubits");
  auto observable = [](double t) {
    const auto p = qubit_projective(t);
    return p[0] - p[1];
  };
  return trace_product_real(state.rho(), kron(observable(angle_a), observable(angle_b)));
}

} // namespace bellbox

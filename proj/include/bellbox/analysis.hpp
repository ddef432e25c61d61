#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <variant>

#include "bellbox/local_polytope.hpp"
#include "bellbox/lp.hpp"
#include "bellbox/quantum.hpp"
#include "bellbox/scenario.hpp"

namespace bellbox {

struct MembershipOptions {
  double tol = kDefaultTol;
  std::size_t strategy_cap = kDefaultStrategyCap;
  lp::Options lp;
};

/// Local verdict: a mixture of deterministic strategies reproducing the
/// behavior within 1e-7.
struct LocalVerdict {
  LocalModel model;
  /// Largest entrywise |mix(model) - behavior|.
  double reproduction_error = 0.0;
  lp::CertificateReport lp_report;
};

/// Nonlocal verdict: a canonical functional whose recomputed local bound is
/// exceeded by the behavior.
struct NonlocalVerdict {
  BellFunctional functional;
  double value = 0.0;
  double violation = 0.0;
  /// Raw Farkas vector of the membership LP (rows: behavior entries, then
  /// the normalization row).
  std::vector<double> farkas;
  lp::CertificateReport lp_report;
};

using Membership = std::variant<LocalVerdict, NonlocalVerdict>;

/// LP feasibility of sum_s q_s V_s = P, q >= 0, sum q = 1 over all local
/// deterministic strategies. A Nonlocal verdict carries the supporting
/// hyperplane found along the segment from the uniform behavior to P, in
/// canonical gauge, falling back to the phase-one Farkas functional.
Membership membership(const Behavior& behavior, const MembershipOptions& options = {});

bool is_local(const Behavior& behavior, const MembershipOptions& options = {});

enum class Verdict { Local, WeaklyNonlocal, Signalling };

std::string to_string(Verdict verdict);

struct Classification {
  Verdict verdict = Verdict::Local;
  std::optional<LocalVerdict> local;
  std::optional<NonlocalVerdict> nonlocal;
  std::optional<NoSignallingReport> signalling;
  /// Experimenter-facing one-liner: what the input/output statistics show.
  std::string summary;
};

/// Signalling test first (defect > tol), then local-polytope membership.
Classification classify(const Behavior& behavior, const MembershipOptions& options = {});

struct CriticalInequality {
  BellFunctional functional;
  double value = 0.0;
  double violation = 0.0;
  /// Present for binary-output scenarios: violation in correlator gauge.
  std::optional<double> correlator_violation;
};

/// PreconditionError("no inequality exists") for local behaviors.
CriticalInequality derive_critical_inequality(const Behavior& behavior, const MembershipOptions& options = {});

/// E00 + E01 + E10 - E11 with E_xy = sum_ab (-1)^(a xor b) P(ab|xy); (2,2,2) only.
double chsh_value(const Behavior& behavior);

struct ThresholdResult {
  std::string parameter;
  /// Certified-local end of the final bracket.
  double critical = 0.0;
  double local_side = 0.0;
  double nonlocal_side = 0.0;
  std::size_t iterations = 0;
  double tolerance = 0.0;
};

/// Largest v with v*pure + (1-v)*noise local, by bisection on [0, 1].
ThresholdResult visibility_threshold(const Behavior& pure, const Behavior& noise, double tol = 1e-6,
                                     const MembershipOptions& options = {});

/// Largest detector efficiency eta (both sides, no-click appended) at which
/// the setup's behavior is local, by bisection on [0, 1].
ThresholdResult efficiency_threshold(const BellSetup& setup, double tol = 1e-4,
                                     const MembershipOptions& options = {});

} // namespace bellbox

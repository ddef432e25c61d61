#include "bellbox/cli.hpp"

#include <cmath>
#include <cstdlib>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "bellbox/analysis.hpp"
#include "bellbox/collins_gisin.hpp"
#include "bellbox/error.hpp"
#include "bellbox/io.hpp"
#include "bellbox/local_polytope.hpp"
#include "bellbox/quantum.hpp"

namespace bellbox::cli {
namespace {

using ordered_json = nlohmann::ordered_json;

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(10);
  os << v;
  return os.str();
}

struct Common {
  std::string format = "text";
  double tol = kDefaultTol;
  std::size_t cap = kDefaultStrategyCap;
  bool json() const { return format == "json"; }
  MembershipOptions membership() const {
    MembershipOptions m;
    m.tol = tol;
    m.strategy_cap = cap;
    return m;
  }
};

Behavior load_behavior(const std::string& path) {
  auto doc = io::read_document(path);
  if (auto* b = std::get_if<Behavior>(&doc)) return *b;
  if (auto* s = std::get_if<BellSetup>(&doc)) return behavior_from_setup(*s);
  throw ValidationError("'" + path + "' holds a " + io::kind_of(doc) + " document; expected a behavior or setup");
}

Scenario load_scenario(const std::string& path) {
  auto doc = io::read_document(path);
  if (auto* s = std::get_if<Scenario>(&doc)) return *s;
  if (auto* b = std::get_if<Behavior>(&doc)) return b->scenario();
  if (auto* f = std::get_if<BellFunctional>(&doc)) return f->scenario();
  return std::get<BellSetup>(doc).scenario();
}

BellSetup load_setup(const std::string& path) {
  auto doc = io::read_document(path);
  if (auto* s = std::get_if<BellSetup>(&doc)) return *s;
  throw ValidationError("'" + path + "' holds a " + io::kind_of(doc) + " document; expected a setup");
}

std::string probability_label(const Scenario& s, std::size_t flat) {
  const auto [in, out] = s.decode(flat);
  bool wide = false;
  for (std::size_t p = 0; p < in.size(); ++p) wide = wide || in[p] > 9 || out[p] > 9;
  const char* sep = wide ? "," : "";
  std::string label = "P(";
  for (std::size_t p = 0; p < out.size(); ++p) label += (p ? sep : "") + std::to_string(out[p]);
  label += "|";
  for (std::size_t p = 0; p < in.size(); ++p) label += (p ? sep : "") + std::to_string(in[p]);
  return label + ")";
}

std::string inequality_text(const BellFunctional& f) {
  std::string text;
  const auto c = f.coeffs();
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (c[i] == 0.0) continue;
    const double mag = std::abs(c[i]);
    text += text.empty() ? (c[i] < 0 ? "-" : "") : (c[i] < 0 ? " - " : " + ");
    if (mag != 1.0) text += fmt(mag) + " ";
    text += probability_label(f.scenario(), i);
  }
  if (text.empty()) text = "0";
  return text + " <= " + fmt(f.local_bound());
}

ordered_json functional_json(const BellFunctional& f) {
  ordered_json j;
  j["coeffs"] = std::vector<double>(f.coeffs().begin(), f.coeffs().end());
  j["local_bound"] = f.local_bound();
  j["note"] = f.note();
  return j;
}

ordered_json lp_json(const lp::CertificateReport& r) {
  ordered_json j;
  j["ok"] = r.ok;
  j["residual"] = r.residual;
  j["farkas_margin"] = r.farkas_margin;
  j["duality_gap"] = r.duality_gap;
  j["dual_violation"] = r.dual_violation;
  return j;
}

ordered_json model_json(const LocalModel& m) {
  ordered_json arr = ordered_json::array();
  for (const auto& [index, weight] : m.weights()) {
    ordered_json w;
    w["strategy"] = index;
    w["weight"] = weight;
    w["assignment"] = strategy_at(m.scenario(), index).assignment();
    arr.push_back(std::move(w));
  }
  return arr;
}

ordered_json signalling_json(const NoSignallingReport& r) {
  ordered_json j;
  j["defect"] = r.max_defect;
  j["party"] = r.worst_marginal.party;
  j["input"] = r.worst_marginal.input;
  j["output"] = r.worst_marginal.output;
  j["remote_inputs"] = {r.worst_marginal.remote_first, r.worst_marginal.remote_second};
  return j;
}

std::string assignment_text(const std::vector<std::vector<int>>& a) {
  std::string s;
  for (std::size_t p = 0; p < a.size(); ++p) {
    s += p ? " " : "";
    s += "party" + std::to_string(p) + "=[";
    for (std::size_t x = 0; x < a[p].size(); ++x) s += (x ? "," : "") + std::to_string(a[p][x]);
    s += "]";
  }
  return s;
}

void emit_report(std::ostream& out, const Common& c, const ordered_json& report, const std::string& text) {
  if (c.json())
    out << report.dump(2) << "\n";
  else
    out << text;
}

ordered_json envelope(const std::string& verb, const Scenario& s) {
  ordered_json j;
  j["verb"] = verb;
  j["scenario"] = s.describe();
  return j;
}

// ---- verbs ----

int do_validate(const std::string& path, bool normalize, const Common& c, std::ostream& out) {
  const auto doc = io::read_document(path);
  if (normalize) {
    out << io::emit(doc);
    return kExitOk;
  }
  const std::string kind = io::kind_of(doc);
  ordered_json r;
  r["verb"] = "validate";
  r["kind"] = kind;
  std::ostringstream t;
  t << "valid " << kind << " document\n";
  std::visit(
      [&](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Scenario>) {
          r["scenario"] = v.describe();
          r["dimension"] = v.dimension();
          t << "scenario: " << v.describe() << "\ndimension: " << v.dimension() << "\n";
        } else if constexpr (std::is_same_v<T, Behavior>) {
          const auto ns = no_signalling_defect(v);
          r["scenario"] = v.scenario().describe();
          r["dimension"] = v.scenario().dimension();
          r["no_signalling_defect"] = ns.max_defect;
          t << "scenario: " << v.scenario().describe() << "\ndimension: " << v.scenario().dimension()
            << "\nno-signalling defect: " << fmt(ns.max_defect) << "\n";
        } else if constexpr (std::is_same_v<T, BellFunctional>) {
          r["scenario"] = v.scenario().describe();
          r["local_bound"] = v.local_bound();
          t << "scenario: " << v.scenario().describe() << "\nlocal bound (recomputed): " << fmt(v.local_bound())
            << "\n";
        } else {
          const Scenario s = v.scenario();
          r["scenario"] = s.describe();
          r["dims"] = {v.state().dim_a(), v.state().dim_b()};
          t << "scenario: " << s.describe() << "\ndims: " << v.state().dim_a() << "x" << v.state().dim_b() << "\n";
        }
      },
      doc);
  emit_report(out, c, r, t.str());
  return kExitOk;
}

int do_classify(const std::string& path, const Common& c, std::ostream& out) {
  const Behavior b = load_behavior(path);
  const auto cls = classify(b, c.membership());
  auto r = envelope("classify", b.scenario());
  r["verdict"] = to_string(cls.verdict);
  r["summary"] = cls.summary;
  std::ostringstream t;
  t << to_string(cls.verdict) << "\n" << cls.summary << "\n";
  ordered_json w;
  if (cls.local) {
    w["type"] = "local_model";
    w["model"] = model_json(cls.local->model);
    w["reproduction_error"] = cls.local->reproduction_error;
    w["lp"] = lp_json(cls.local->lp_report);
    t << "witness: local model\n";
    for (const auto& [i, weight] : cls.local->model.weights())
      t << "  " << fmt(weight) << "  strategy " << i << "  "
        << assignment_text(strategy_at(b.scenario(), i).assignment()) << "\n";
  } else if (cls.nonlocal) {
    w["type"] = "bell_inequality";
    w["inequality"] = functional_json(cls.nonlocal->functional);
    w["value"] = cls.nonlocal->value;
    w["violation"] = cls.nonlocal->violation;
    w["lp"] = lp_json(cls.nonlocal->lp_report);
    t << "witness: " << inequality_text(cls.nonlocal->functional) << "\n  value " << fmt(cls.nonlocal->value)
      << ", violation " << fmt(cls.nonlocal->violation) << "\n";
  } else if (cls.signalling) {
    w["type"] = "signalling_marginal";
    w.update(signalling_json(*cls.signalling));
    t << "witness: marginal of party " << cls.signalling->worst_marginal.party << " differs by "
      << fmt(cls.signalling->max_defect) << "\n";
  }
  r["witness"] = std::move(w);
  emit_report(out, c, r, t.str());
  return kExitOk;
}

int do_membership(const std::string& path, const Common& c, std::ostream& out) {
  const Behavior b = load_behavior(path);
  const auto m = membership(b, c.membership());
  auto r = envelope("membership", b.scenario());
  std::ostringstream t;
  if (const auto* local = std::get_if<LocalVerdict>(&m)) {
    r["result"] = "Local";
    r["model"] = model_json(local->model);
    r["reproduction_error"] = local->reproduction_error;
    r["lp"] = lp_json(local->lp_report);
    t << "Local\nmixture of " << local->model.weights().size() << " deterministic strategies (max error "
      << fmt(local->reproduction_error) << ")\n";
    for (const auto& [i, weight] : local->model.weights())
      t << "  " << fmt(weight) << "  strategy " << i << "  "
        << assignment_text(strategy_at(b.scenario(), i).assignment()) << "\n";
  } else {
    const auto& nl = std::get<NonlocalVerdict>(m);
    r["result"] = "Nonlocal";
    r["inequality"] = functional_json(nl.functional);
    r["value"] = nl.value;
    r["violation"] = nl.violation;
    r["farkas"] = nl.farkas;
    r["lp"] = lp_json(nl.lp_report);
    t << "Nonlocal\ncertificate: " << inequality_text(nl.functional) << "\nvalue " << fmt(nl.value)
      << ", violation " << fmt(nl.violation) << "\nfarkas margin " << fmt(nl.lp_report.farkas_margin) << "\n";
  }
  emit_report(out, c, r, t.str());
  return kExitOk;
}

int do_derive(const std::string& path, const Common& c, std::ostream& out) {
  const Behavior b = load_behavior(path);
  const auto ci = derive_critical_inequality(b, c.membership());
  auto r = envelope("derive-inequality", b.scenario());
  r["inequality"] = functional_json(ci.functional);
  r["value"] = ci.value;
  r["violation"] = ci.violation;
  if (ci.correlator_violation)
    r["correlator_violation"] = *ci.correlator_violation;
  else
    r["correlator_violation"] = nullptr;
  std::ostringstream t;
  t << inequality_text(ci.functional) << "\nvalue " << fmt(ci.value) << ", violation " << fmt(ci.violation) << "\n";
  if (ci.correlator_violation) t << "violation in correlator normalization " << fmt(*ci.correlator_violation) << "\n";
  emit_report(out, c, r, t.str());
  return kExitOk;
}

int do_facets(const std::optional<std::string>& path, const Common& c, std::ostream& out) {
  const Scenario s = path ? load_scenario(*path) : Scenario::uniform(2, 2, 2);
  FacetOptions fo;
  fo.max_vertices = std::min<std::size_t>(c.cap, 1u << 20);
  const auto facets = enumerate_facets(s, fo);
  auto r = envelope("facets", s);
  r["count"] = facets.size();
  ordered_json arr = ordered_json::array();
  std::ostringstream t;
  t << facets.size() << " facets of the local polytope of " << s.describe() << "\n";
  for (const auto& f : facets) {
    arr.push_back(functional_json(f));
    t << "  " << inequality_text(f) << "\n";
  }
  r["facets"] = std::move(arr);
  emit_report(out, c, r, t.str());
  return kExitOk;
}

int do_chsh(const std::string& path, const Common& c, std::ostream& out) {
  const Behavior b = load_behavior(path);
  const double v = chsh_value(b);
  auto r = envelope("chsh", b.scenario());
  r["value"] = v;
  r["local_bound"] = 2.0;
  r["quantum_bound"] = 2.0 * std::sqrt(2.0);
  r["violation"] = v - 2.0;
  std::ostringstream t;
  t << "CHSH = " << fmt(v) << " (local bound 2, quantum bound " << fmt(2.0 * std::sqrt(2.0)) << ")\n";
  emit_report(out, c, r, t.str());
  return kExitOk;
}

struct QuantumArgs {
  std::optional<std::string> setup;
  std::optional<std::string> named;
  double param = 1.0;
  std::optional<std::uint64_t> seed;
  std::vector<int> dims{2, 2};
  std::vector<int> inputs{2, 2};
  std::optional<double> eta;
  std::string emit = "report";
};

int do_quantum(const QuantumArgs& q, const Common& c, std::ostream& out) {
  const int sources = int(q.setup.has_value()) + int(q.named.has_value()) + int(q.seed.has_value());
  if (sources != 1) throw ValidationError("quantum needs exactly one of a setup file, --named or --random");
  if (q.dims.size() != 2 || q.inputs.size() != 2)
    throw ValidationError("--dims and --inputs take two values each (Alice, Bob)");
  BellSetup setup = q.setup   ? load_setup(*q.setup)
                    : q.named ? named_setup(*q.named, q.param)
                              : random_setup(*q.seed, q.dims[0], q.dims[1], q.inputs[0], q.inputs[1]);
  if (q.eta) setup = lift_setup(setup, *q.eta);
  const Behavior b = behavior_from_setup(setup);
  if (q.emit == "setup") {
    out << io::emit(setup);
    return kExitOk;
  }
  if (q.emit == "behavior") {
    out << io::emit(b, c.tol);
    return kExitOk;
  }
  const auto ns = no_signalling_defect(b);
  auto r = envelope("quantum", b.scenario());
  r["probs"] = std::vector<double>(b.probs().begin(), b.probs().end());
  r["no_signalling_defect"] = ns.max_defect;
  std::ostringstream t;
  t << "scenario " << b.scenario().describe() << "\n";
  for (std::size_t i = 0; i < b.scenario().dimension(); ++i)
    t << "  " << probability_label(b.scenario(), i) << " = " << fmt(b[i]) << "\n";
  t << "no-signalling defect " << fmt(ns.max_defect) << "\n";
  if (b.scenario() == Scenario::uniform(2, 2, 2)) {
    const double v = chsh_value(b);
    r["chsh"] = v;
    t << "CHSH = " << fmt(v) << "\n";
  } else {
    r["chsh"] = nullptr;
  }
  emit_report(out, c, r, t.str());
  return kExitOk;
}

struct ThresholdArgs {
  std::string kind;
  std::optional<std::string> pure;
  std::optional<std::string> noise;
  std::optional<std::string> setup;
  std::optional<double> precision;
};

int do_threshold(const ThresholdArgs& a, const Common& c, std::ostream& out) {
  ThresholdResult res;
  Scenario s = Scenario::uniform(2, 2, 2);
  std::optional<double> analytic;
  if (a.kind == "visibility") {
    if (!a.pure) throw ValidationError("--kind visibility needs --pure FILE");
    const Behavior pure = load_behavior(*a.pure);
    s = pure.scenario();
    const Behavior noise = a.noise ? load_behavior(*a.noise) : named_behavior("uniform", s);
    res = visibility_threshold(pure, noise, a.precision.value_or(1e-6), c.membership());
    if (s == Scenario::uniform(2, 2, 2) && !a.noise) {
      const double chsh = chsh_value(pure);
      if (std::abs(chsh) > 2.0) analytic = 2.0 / std::abs(chsh);
    }
  } else {
    if (!a.setup) throw ValidationError("--kind efficiency needs --setup FILE");
    const BellSetup setup = load_setup(*a.setup);
    s = setup.scenario();
    res = efficiency_threshold(setup, a.precision.value_or(1e-4), c.membership());
  }
  auto r = envelope("threshold", s);
  r["parameter"] = res.parameter;
  r["critical"] = res.critical;
  r["local_side"] = res.local_side;
  r["nonlocal_side"] = res.nonlocal_side;
  r["iterations"] = res.iterations;
  r["precision"] = res.tolerance;
  if (analytic)
    r["chsh_prediction"] = *analytic;
  else
    r["chsh_prediction"] = nullptr;
  std::ostringstream t;
  t << res.parameter << " threshold " << fmt(res.critical) << "  (local at " << fmt(res.local_side)
    << ", nonlocal at " << fmt(res.nonlocal_side) << ", " << res.iterations << " bisection steps)\n";
  if (analytic) t << "CHSH prediction 2/|S| = " << fmt(*analytic) << "\n";
  emit_report(out, c, r, t.str());
  return kExitOk;
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Common common;
  if (const char* env = std::getenv("BELLBOX_TOL")) {
    char* end = nullptr;
    const double v = std::strtod(env, &end);
    if (end == env || *end != '\0' || !(v > 0.0) || v > 1e-3) {
      err << "error: BELLBOX_TOL='" << env << "' is not a tolerance in (0, 1e-3]\n";
      return kExitUsage;
    }
    common.tol = v;
  }

  CLI::App app{"Bell-nonlocality toolkit: classify black-box statistics and derive Bell inequalities", "bellbox"};
  app.require_subcommand(1, 1);
  app.set_version_flag("--version", "bellbox 1.0");

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--format", common.format, "Report format")->check(CLI::IsMember({"text", "json"}));
    sub->add_option("--tol", common.tol, "Numerical tolerance")->check(CLI::Range(1e-15, 1e-3));
    sub->add_option("--cap", common.cap, "Cap on the number of deterministic strategies")
        ->check(CLI::Range(std::size_t{1}, std::size_t{1'000'000'000}));
  };

  std::string file;
  std::optional<std::string> facet_file;

  auto* validate = app.add_subcommand("validate", "Parse a document and check its invariants");
  validate->add_option("file", file, "Document path")->required();
  bool normalize = false;
  validate->add_flag("--normalize", normalize, "Print the document in normalized form instead of a report");
  auto* classify_cmd = app.add_subcommand("classify", "Local, WeaklyNonlocal or Signalling, with a witness");
  classify_cmd->add_option("file", file, "Behavior or setup document")->required();
  auto* membership_cmd = app.add_subcommand("membership", "Local-polytope membership with certificate");
  membership_cmd->add_option("file", file, "Behavior or setup document")->required();
  auto* derive = app.add_subcommand("derive-inequality", "Bell inequality violated by a nonlocal behavior");
  derive->add_option("file", file, "Behavior or setup document")->required();
  auto* facets = app.add_subcommand("facets", "All facets of the local polytope (default scenario (2,2,2))");
  facets->add_option("file", facet_file, "Scenario document (or any document carrying a scenario)");
  auto* chsh = app.add_subcommand("chsh", "CHSH value of a (2,2,2) behavior");
  chsh->add_option("file", file, "Behavior or setup document")->required();

  QuantumArgs qa;
  auto* quantum = app.add_subcommand("quantum", "Behavior predicted by a quantum setup");
  quantum->add_option("file", qa.setup, "Setup document");
  quantum->add_option("--named", qa.named, "Catalog setup: singlet_chsh, werner, product_basis");
  quantum->add_option("--param", qa.param, "Parameter of a named setup (werner visibility)");
  quantum->add_option("--random,--seed", qa.seed, "Seed of a random setup");
  quantum->add_option("--dims", qa.dims, "Local dimensions of a random setup")->expected(2)->check(CLI::Range(1, 4));
  quantum->add_option("--inputs", qa.inputs, "Inputs per side of a random setup")->expected(2)->check(CLI::Range(1, 8));
  quantum->add_option("--eta", qa.eta, "Detector efficiency (appends a no-click output)")->check(CLI::Range(0.0, 1.0));
  quantum->add_option("--emit", qa.emit, "report, or a behavior/setup document")
      ->check(CLI::IsMember({"report", "behavior", "setup"}));

  ThresholdArgs ta;
  auto* threshold = app.add_subcommand("threshold", "Critical visibility or detector efficiency");
  threshold->add_option("--kind", ta.kind, "visibility or efficiency")
      ->required()
      ->check(CLI::IsMember({"visibility", "efficiency"}));
  threshold->add_option("--pure", ta.pure, "Behavior or setup mixed with noise");
  threshold->add_option("--noise", ta.noise, "Local noise behavior (default: uniform)");
  threshold->add_option("--setup", ta.setup, "Setup whose detectors are made lossy");
  threshold->add_option("--precision", ta.precision, "Bisection bracket width")->check(CLI::Range(1e-12, 0.5));

  for (auto* sub : {validate, classify_cmd, membership_cmd, derive, facets, chsh, quantum, threshold}) add_common(sub);

  std::vector<std::string> argv_store{"bellbox"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& s : argv_store) argv.push_back(s.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << "bellbox 1.0\n";
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << " (try 'bellbox --help')\n";
    return kExitUsage;
  }

  try {
    if (validate->parsed()) return do_validate(file, normalize, common, out);
    if (classify_cmd->parsed()) return do_classify(file, common, out);
    if (membership_cmd->parsed()) return do_membership(file, common, out);
    if (derive->parsed()) return do_derive(file, common, out);
    if (facets->parsed()) return do_facets(facet_file, common, out);
    if (chsh->parsed()) return do_chsh(file, common, out);
    if (quantum->parsed()) return do_quantum(qa, common, out);
    if (threshold->parsed()) return do_threshold(ta, common, out);
  } catch (const SizeError& e) {
    err << "error: " << e.what() << " (raise --cap or shrink the scenario)\n";
    return kExitLimits;
  } catch (const StalledError& e) {
    err << "error: " << e.what() << " (LP did not converge; try a looser --tol)\n";
    return kExitLimits;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitInvalid;
  }
  err << "error: no verb given (try 'bellbox --help')\n";
  return kExitUsage;
}

} // namespace bellbox::cli

#pragma once

#include <string>
#include <variant>

#include "bellbox/local_polytope.hpp"
#include "bellbox/quantum.hpp"
#include "bellbox/scenario.hpp"

namespace bellbox::io {

/// Documents are JSON objects whose "kind" field selects the type:
///
///   scenario:   {"kind":"scenario","parties":2,"inputs":[2,2],"outputs":[[2,2],[2,2]]}
///   behavior:   scenario fields + "probs":[...flat table...], "tol":1e-9
///   inequality: scenario fields + "coeffs":[...], "local_bound":2, "note":"facet"
///   setup:      {"kind":"setup","dims":[2,2],
///                "state":[[re,im], ...]            // (dA*dB)^2 entries, row-major
///                "alice":[[effect, ...], ...],     // per input, per output
///                "bob":  [[effect, ...], ...]}     // effect = [[re,im], ...] row-major d*d
///
/// Flat tables use the library layout (joint input major, party 0 slowest).
/// Numbers are written in shortest round-trip form, so parse(emit(x)) is
/// value-identical.
using Document = std::variant<Scenario, Behavior, BellFunctional, BellSetup>;

/// ParseError for malformed text (with line number) or missing fields;
/// ValidationError for invariant violations (naming the field).
Document parse_document(const std::string& text);

/// Reads and parses a file; ParseError when it cannot be opened.
Document read_document(const std::string& path);

std::string emit(const Scenario& scenario);
std::string emit(const Behavior& behavior, double tol = kDefaultTol);
std::string emit(const BellFunctional& functional);
std::string emit(const BellSetup& setup);
std::string emit(const Document& document);

std::string kind_of(const Document& document);

} // namespace bellbox::io

// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "denslift/lift_core.hpp"
#include "denslift/proj_quant.hpp"

namespace denslift {

struct SessionConfig {
  int dim = 1;
  /// nullopt means the formal parameter l0.
  std::optional<Scalar> lambda0;
  /// "coordinate" or "generic".
  std::string volume = "generic";
  bool json = false;
  /// Identifiers read as formal parameters rather than jets.
  std::set<std::string> params{"l0"};
  /// Values substituted into every result (and used as lift knobs).
  std::map<std::string, Scalar> bindings;

  Scalar lambda0_value() const { return lambda0 ? *lambda0 : Scalar::param("l0"); }
  VolumeForm volume_form() const;
};

/// Grammar: sums of products. Juxtaposition and `*` compose left to right
/// (so "D1 f" is d_1 o f), `/` divides by a scalar, `^` takes powers.
/// Atoms: integers, parameters, jets such as S[1,2]_,1, generators D1..Dd,
/// the weight operator L and parenthesized subexpressions.
DensityOperator parse_operator(std::string_view src, const SessionConfig& cfg);
/// Same grammar without L and D.
DiffPolynomial parse_function(std::string_view src, const SessionConfig& cfg);
/// Commutative variant with fiber variables xi (d = 1) or xi1..xid.
SymbolPoly parse_symbol(std::string_view src, const SessionConfig& cfg);

/// Names of the formal parameters occurring in `op`.
std::set<std::string> parameters_of(const DensityOperator& op);

/// {"schema":"denslift/1","dim":d,"order":n,"params":[...],
///  "terms":[{"lpow":r,"dmulti":[...],"coeff":"..."}]}
std::string operator_to_json(const DensityOperator& op);
DensityOperator operator_from_json(std::string_view text, const SessionConfig& cfg = {});
std::string symbol_to_json(const SymbolPoly& p);

/// Runs one command line (without the program name). Returns the exit
/// code: 0 on success, 1 on domain errors, 2 on syntax errors.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace denslift

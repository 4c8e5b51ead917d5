#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "spfc/rng.hpp"

namespace spfc {

enum class OperatorKind {
  OneBitQuantize,  // stochastic rounding onto {..., -6K, -2K, 2K, 6K, ...}
  Prune,           // keep |z| > cK, otherwise zero or resample on [cK, K)
  QuantizePrune,   // prune, then stochastic rounding onto 2K*Z
  RtnOneBit,       // deterministic round-to-nearest baseline on {(4k+2)K}
  Identity,
};

OperatorKind operator_kind_from_string(std::string_view name);
std::string to_string(OperatorKind kind);

struct OperatorSpec {
  OperatorKind kind = OperatorKind::Identity;
  double K = 1.0;  // weight bound, > 0
  double c = 0.5;  // pruning threshold fraction, in (0, 1]; pruning kinds only

  void validate() const;
};

// Deviation bound M with |T(z) - z| <= M for every draw. rtn_onebit makes no
// unbiasedness or distance claim, so it carries no bound.
struct DeviationBound {
  bool bounded = true;
  double M = 0.0;
};

DeviationBound deviation_bound(const OperatorSpec& spec);

double quantize_onebit(double z, const OperatorSpec& spec, RngStream& rng);
double prune(double z, const OperatorSpec& spec, RngStream& rng);
double quantize_prune(double z, const OperatorSpec& spec, RngStream& rng);
double rtn(double z, const OperatorSpec& spec);

// Dispatch on spec.kind (identity included).
double apply_operator(double z, const OperatorSpec& spec, RngStream& rng);

// Whether q is a legal output value for the operator (exact alphabet
// membership for the quantizing kinds).
bool on_alphabet(double q, const OperatorSpec& spec);

}  // namespace spfc

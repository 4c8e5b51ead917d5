#include "spfc/operators.hpp"

#include <cmath>

#include "spfc/error.hpp"

namespace spfc {

OperatorKind operator_kind_from_string(std::string_view name) {
  if (name == "onebit_quantize" || name == "onebit")
    return OperatorKind::OneBitQuantize;
  if (name == "prune") return OperatorKind::Prune;
  if (name == "quantize_prune" || name == "quantize-prune")
    return OperatorKind::QuantizePrune;
  if (name == "rtn_onebit" || name == "rtn") return OperatorKind::RtnOneBit;
  if (name == "identity") return OperatorKind::Identity;
  throw Error("operator: unknown kind '" + std::string(name) + "'");
}

std::string to_string(OperatorKind kind) {
  switch (kind) {
    case OperatorKind::OneBitQuantize: return "onebit_quantize";
    case OperatorKind::Prune: return "prune";
    case OperatorKind::QuantizePrune: return "quantize_prune";
    case OperatorKind::RtnOneBit: return "rtn_onebit";
    case OperatorKind::Identity: return "identity";
  }
  return "?";
}

void OperatorSpec::validate() const {
  if (!(K > 0.0) || !std::isfinite(K))
    throw Error("operator: K must be positive and finite, got " +
                std::to_string(K));
  if (kind == OperatorKind::Prune || kind == OperatorKind::QuantizePrune) {
    // c <= 1 keeps the resample probability 2|z|/((c+1)K) at most 1 whenever
    // |z| <= cK
    if (!(c > 0.0 && c <= 1.0) || !std::isfinite(c))
      throw Error("operator: c must lie in (0, 1], got " + std::to_string(c));
  }
}

DeviationBound deviation_bound(const OperatorSpec& spec) {
  spec.validate();
  switch (spec.kind) {
    case OperatorKind::OneBitQuantize: return {true, 4.0 * spec.K};
    case OperatorKind::Prune: return {true, spec.K};
    case OperatorKind::QuantizePrune: return {true, 2.0 * spec.K};
    case OperatorKind::Identity: return {true, 0.0};
    case OperatorKind::RtnOneBit:
      return {false, 0.0};  // deterministic baseline, no contract claimed
  }
  return {false, 0.0};
}

namespace {

void require_finite(double z, const char* who) {
  if (!std::isfinite(z)) throw Error(std::string(who) + ": non-finite input");
}

// Unbiased rounding onto the offset grid {(4k+2)K}: the two adjacent
// alphabet elements around z, picked with probabilities that make the
// expectation exactly z. Deviation is at most the grid step 4K.
double onebit_impl(double z, double K, RngStream& rng) {
  const double step = 4.0 * K;
  const double k = std::floor((z - 2.0 * K) / step);
  const double lo = (4.0 * k + 2.0) * K;  // largest alphabet element <= z
  const double hi = lo + step;
  return rng.next_double() < (hi - z) / step ? lo : hi;
}

double prune_impl(double z, double K, double c, RngStream& rng) {
  if (std::abs(z) > c * K) return z;
  const double p_nonzero = 2.0 * std::abs(z) / ((c + 1.0) * K);
  if (rng.next_double() >= p_nonzero) return 0.0;
  const double sign = z < 0.0 ? -1.0 : 1.0;
  return sign * (c * K + (1.0 - c) * K * rng.next_double());  // [cK, K)
}

// Unbiased rounding onto 2K*Z.
double grid2k_impl(double y, double K, RngStream& rng) {
  const double g = 2.0 * K;
  const double lo = std::floor(y / g) * g;
  const double hi = std::ceil(y / g) * g;
  if (lo == hi) return y;  // already on the grid
  return rng.next_double() < (hi - y) / g ? lo : hi;
}

}  // namespace

double quantize_onebit(double z, const OperatorSpec& spec, RngStream& rng) {
  require_finite(z, "quantize_onebit");
  if (spec.kind != OperatorKind::OneBitQuantize)
    throw Error("quantize_onebit: spec kind is " + to_string(spec.kind));
  return onebit_impl(z, spec.K, rng);
}

double prune(double z, const OperatorSpec& spec, RngStream& rng) {
  require_finite(z, "prune");
  if (spec.kind != OperatorKind::Prune)
    throw Error("prune: spec kind is " + to_string(spec.kind));
  return prune_impl(z, spec.K, spec.c, rng);
}

double quantize_prune(double z, const OperatorSpec& spec, RngStream& rng) {
  require_finite(z, "quantize_prune");
  if (spec.kind != OperatorKind::QuantizePrune)
    throw Error("quantize_prune: spec kind is " + to_string(spec.kind));
  return grid2k_impl(prune_impl(z, spec.K, spec.c, rng), spec.K, rng);
}

double rtn(double z, const OperatorSpec& spec) {
  require_finite(z, "rtn");
  if (spec.kind != OperatorKind::RtnOneBit)
    throw Error("rtn: spec kind is " + to_string(spec.kind));
  const double K = spec.K;
  // nearest element of {(4k+2)K}; floor(x + 1/2) breaks ties toward +inf
  return (4.0 * std::floor((z - 2.0 * K) / (4.0 * K) + 0.5) + 2.0) * K;
}

double apply_operator(double z, const OperatorSpec& spec, RngStream& rng) {
  switch (spec.kind) {
    case OperatorKind::OneBitQuantize: return quantize_onebit(z, spec, rng);
    case OperatorKind::Prune: return prune(z, spec, rng);
    case OperatorKind::QuantizePrune: return quantize_prune(z, spec, rng);
    case OperatorKind::RtnOneBit: return rtn(z, spec);
    case OperatorKind::Identity:
      require_finite(z, "identity");
      return z;
  }
  throw Error("apply_operator: unknown kind");
}

bool on_alphabet(double q, const OperatorSpec& spec) {
  const double K = spec.K;
  switch (spec.kind) {
    case OperatorKind::OneBitQuantize:
    case OperatorKind::RtnOneBit: {
      const double k = std::round((q / K - 2.0) / 4.0);
      return q == (4.0 * k + 2.0) * K;
    }
    case OperatorKind::QuantizePrune: {
      const double k = std::round(q / (2.0 * K));
      return q == k * (2.0 * K);
    }
    case OperatorKind::Prune:
      // {0} or sign-matched magnitude in [cK, K], or any pass-through value
      return q == 0.0 || std::abs(q) >= spec.c * K;
    case OperatorKind::Identity: return true;
  }
  return false;
}

}  // namespace spfc

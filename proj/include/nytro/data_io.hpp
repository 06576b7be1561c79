#pragma once
// Dataset ingestion (libsvm text format with a binary sidecar cache), target
// scaling, and synthetic fixed-design problem generation.

#include "nytro/common.hpp"
#include "nytro/kernel.hpp"
#include "nytro/risk_oracle.hpp"

#include <cstdint>
#include <string>

namespace nytro {

struct Dataset {
  Matrix points;
  Vector targets;
  std::string name;
  bool scaled = false;
};

/// Parse `label idx:val ...` lines (1-based feature indices, absent features
/// zero). A binary sidecar `<path>.cache` is written on first load and reused
/// while it is newer than the text file; pass use_cache = false to force a
/// parse. Malformed input raises ParseError with the line number.
Dataset load_libsvm(const std::string& path, bool use_cache = true);

void save_libsvm(const Dataset& data, const std::string& path);

/// (y - min) / (max - min); constant targets are an error.
Vector scale_targets_unit(const Vector& y);

enum class SynthesisFamily {
  abstract_spectrum,  // K = U diag(spectrum) U^T with random orthonormal U
  geometric           // points sampled N(0, I), K from the kernel
};

struct SynthesisConfig {
  SynthesisFamily family = SynthesisFamily::abstract_spectrum;
  Index n = 0;
  Index d = 0;                     // geometric only
  Vector spectrum;                 // abstract only; size n, entries >= 0
  KernelSpec kernel;               // geometric only
  double target_snr = 1.0;
  double sigma2 = 1.0;
  double out_of_range_norm = 0.0;  // optional |(I-P) mu| component
  std::uint64_t seed = 0;
};

struct SyntheticInstance {
  Matrix points;  // 0 x 0 for abstract instances
  KernelGram gram;
  FixedDesignProblem problem;
};

/// Build a fixed-design instance with alpha_opt rescaled so that
/// alpha_opt^T K alpha_opt / sigma2 equals target_snr exactly and
/// mu = K alpha_opt (+ optional out-of-range component). Deterministic per
/// seed.
SyntheticInstance synthesize_fixed_design(const SynthesisConfig& config);

}  // namespace nytro

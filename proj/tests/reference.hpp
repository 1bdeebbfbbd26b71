#pragma once

// The reference 1D problem shared by the solver-level tests: p = 2, q = 4,
// delta = 1/2 and bump weights a = b supported on [0.25, 0.75].

#include "pxlap/nehari.hpp"

namespace ref {

inline pxlap::ProblemData problem(int resolution, double lambda) {
  using pxlap::FieldSpec;
  return pxlap::ProblemData(pxlap::build_mesh(1, pxlap::Box{0.0, 1.0, 0.0, 1.0}, resolution), FieldSpec::constant(2.0),
                            FieldSpec::constant(4.0), FieldSpec::constant(0.5), FieldSpec::bump(1.0, 0.25, 0.75),
                            FieldSpec::bump(1.0, 0.25, 0.75), lambda);
}

inline constexpr int kEmbeddingSamples = 100;
inline constexpr std::uint64_t kSeed = 7;

inline pxlap::LambdaReport threshold(int resolution = 64) {
  const auto data = problem(resolution, 1.0);
  const auto consts = pxlap::estimate_embedding_constants(data, kEmbeddingSamples, kSeed);
  pxlap::ScanOptions scan;
  scan.seed = kSeed;
  return pxlap::threshold_report(data, consts, pxlap::default_lambda_grid(), scan);
}

}  // namespace ref

#pragma once

#include <algorithm>
#include <cstddef>
#include <limits>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace liyau {

inline int hardware_jobs() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

/// Reduce visit(i, acc) over i in [0, total) into `out` (an array of `width`
/// doubles). Work is split into fixed-size chunks whose partials are folded
/// in chunk order, so the result is bitwise identical for any thread count,
/// including the serial path.
template <class Visit>
void chunked_accumulate(std::size_t total, std::size_t width, double* out, Visit&& visit,
                        bool parallel = true) {
  constexpr std::size_t kChunk = 16384;
  const std::size_t nchunks = (total + kChunk - 1) / kChunk;
  std::vector<double> partial(nchunks * width, 0.0);
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 1) if (parallel && nchunks > 1)
#endif
  for (long long c = 0; c < static_cast<long long>(nchunks); ++c) {
    double* acc = partial.data() + static_cast<std::size_t>(c) * width;
    const std::size_t lo = static_cast<std::size_t>(c) * kChunk;
    const std::size_t hi = std::min(lo + kChunk, total);
    for (std::size_t i = lo; i < hi; ++i) visit(i, acc);
  }
  for (std::size_t w = 0; w < width; ++w) out[w] = 0.0;
  for (std::size_t c = 0; c < nchunks; ++c)
    for (std::size_t w = 0; w < width; ++w) out[w] += partial[c * width + w];
#ifndef _OPENMP
  (void)parallel;
#endif
}

/// Max of score(i) over i in [0, total); max is exactly associative so the
/// chunked fold is deterministic by construction.
template <class Score>
double chunked_max(std::size_t total, Score&& score, bool parallel = true) {
  constexpr std::size_t kChunk = 16384;
  const std::size_t nchunks = (total + kChunk - 1) / kChunk;
  std::vector<double> partial(nchunks, -std::numeric_limits<double>::infinity());
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 1) if (parallel && nchunks > 1)
#endif
  for (long long c = 0; c < static_cast<long long>(nchunks); ++c) {
    const std::size_t lo = static_cast<std::size_t>(c) * kChunk;
    const std::size_t hi = std::min(lo + kChunk, total);
    double m = -std::numeric_limits<double>::infinity();
    for (std::size_t i = lo; i < hi; ++i) m = std::max(m, score(i));
    partial[static_cast<std::size_t>(c)] = m;
  }
  double m = -std::numeric_limits<double>::infinity();
  for (double p : partial) m = std::max(m, p);
#ifndef _OPENMP
  (void)parallel;
#endif
  return m;
}

}  // namespace liyau

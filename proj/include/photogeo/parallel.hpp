#pragma once

#include <cstddef>
#include <functional>

namespace photogeo {

/// Worker count used by parallel_for; 0 or 1 runs inline.
void set_thread_count(int threads);
int thread_count();

/// Runs body(i) for i in [0, n). Each index is processed exactly once; callers write
/// results to per-index slots so the outcome does not depend on scheduling.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

} // namespace photogeo

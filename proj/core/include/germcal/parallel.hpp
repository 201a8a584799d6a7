#pragma once

#include <cstdint>
#include <functional>
#include <string>

namespace germcal {

// Process-wide worker count (1 = serial). Set from --jobs / GERMCAL_JOBS.
void set_jobs(int n);
int jobs();

// Runs body(i) for i in [0, n). Reductions on the caller side must be
// order-independent (max / element-wise accumulate into distinct slots) so
// results do not depend on the worker count.
void parallel_for(std::int64_t n, const std::function<void(std::int64_t)>& body);

// FNV-1a, used for config hashes in reports
std::uint64_t fnv1a(const std::string& bytes);

}  // namespace germcal

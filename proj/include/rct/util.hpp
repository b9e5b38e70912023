#pragma once

#include <cstddef>
#include <functional>
#include <string>

namespace rct {

/// Locale-independent decimal formatting with 17 significant digits
/// (round-trip exact for IEEE doubles).
std::string format_double(double v);

/// Same, with an explicit significant-digit count.
std::string format_double(double v, int significant_digits);

/// Locale-independent parse of a decimal double; throws DomainError on junk.
double parse_double(const std::string& token);

/// Worker count for internal loops: the RCT_THREADS environment variable,
/// clamped to [1, 256]; 1 when unset. This is the only environment input.
int worker_count();

/// Runs fn(i) for i in [0, n). Results must be written to disjoint,
/// preallocated slots so the output is identical for every worker count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

} // namespace rct

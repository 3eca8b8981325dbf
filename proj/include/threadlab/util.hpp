#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace threadlab {

// Shortest decimal form that round-trips to the same double. Used for all
// CSV/JSON output so that re-runs are byte-identical.
std::string fmt_double(double v);

std::vector<std::string> split(std::string_view s, char sep);

std::string lowercase(std::string_view s);

// Runs fn(i) for every i in [0, n). jobs <= 1 runs inline; otherwise the
// index range is cut into contiguous chunks, one std::thread each. fn(i)
// must only write state owned by index i, so results do not depend on jobs.
void parallel_for(std::size_t n, int jobs,
                  const std::function<void(std::size_t)>& fn);

}  // namespace threadlab

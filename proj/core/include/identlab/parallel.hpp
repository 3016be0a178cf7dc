#pragma once

#include <cstddef>
#include <functional>

namespace identlab {

// 0 means "all hardware threads".
unsigned resolve_threads(unsigned requested);

// Runs body(i) for i in [0, count). Each index must write only to its own
// output slot; the first exception thrown by any body is rethrown.
void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& body);

}  // namespace identlab

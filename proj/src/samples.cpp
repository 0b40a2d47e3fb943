#include "taskagg/samples.hpp"

#include <limits>
#include <new>

#include <unistd.h>

#include "taskagg/error.hpp"

namespace taskagg {

std::size_t available_memory_bytes() {
    const long pages = sysconf(_SC_PHYS_PAGES);
    const long page_size = sysconf(_SC_PAGE_SIZE);
    if (pages <= 0 || page_size <= 0) return std::numeric_limits<std::size_t>::max();
    return static_cast<std::size_t>(pages) * static_cast<std::size_t>(page_size);
}

SampleCube::SampleCube(std::size_t samples, std::size_t models, std::size_t tasks)
    : samples_(samples), models_(models), tasks_(tasks) {
    const std::size_t max_elems = std::numeric_limits<std::size_t>::max() / sizeof(double);
    const bool overflow = (models != 0 && tasks > max_elems / models) ||
                          (models * tasks != 0 && samples > max_elems / (models * tasks));
    const std::size_t avail = available_memory_bytes();
    if (overflow) throw CapacityError(std::numeric_limits<std::size_t>::max(), avail);
    const std::size_t bytes = samples * models * tasks * sizeof(double);
    if (bytes > avail) throw CapacityError(bytes, avail);
    try {
        data_.assign(samples * models * tasks, 0.0);
    } catch (const std::bad_alloc&) {
        throw CapacityError(bytes, avail);
    }
}

}  // namespace taskagg

#include "endodiff/parallel.hpp"

#include <cstdlib>
#include <string>

namespace endodiff {

unsigned worker_count() {
    if (const char* env = std::getenv("ENDODIFF_WORKERS")) {
        try {
            const long v = std::stol(env);
            if (v >= 1) return static_cast<unsigned>(std::min<long>(v, 256));
        } catch (...) {
            // Malformed value: fall through to the hardware default.
        }
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? hw : 1;
}

} // namespace endodiff

#include "reach/parallel.hpp"

#include <cstdlib>
#include <string>

namespace reach {

int resolve_thread_count(int requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("REACHTUBE_THREADS")) {
        try {
            const int n = std::stoi(env);
            if (n > 0) return n;
        } catch (...) {
            // Ignore malformed values and fall through to the OpenMP default.
        }
    }
    const int n = omp_get_max_threads();
    return n > 0 ? n : 1;
}

}  // namespace reach

#include "shearop/parallel.hpp"

#include <cstdlib>
#include <string>

#include <omp.h>

namespace shearop {

void init_threads() {
    omp_set_max_active_levels(1);
    if (const char* env = std::getenv("SHEAROP_THREADS")) {
        try {
            const int n = std::stoi(env);
            if (n > 0) omp_set_num_threads(n);
        } catch (const std::exception&) {
            // ignore malformed values, keep the OpenMP default
        }
    }
}

int max_threads() { return omp_get_max_threads(); }

}  // namespace shearop

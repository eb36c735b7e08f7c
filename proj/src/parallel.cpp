#include "sdfplan/parallel.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace sdfplan {

void set_num_threads(int n) {
#ifdef _OPENMP
    if (n > 0) omp_set_num_threads(n);
#else
    (void)n;
#endif
}

int num_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

void parallel_for(std::ptrdiff_t n, const std::function<void(std::ptrdiff_t)>& body) {
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 8)
    for (std::ptrdiff_t i = 0; i < n; ++i) body(i);
#else
    for (std::ptrdiff_t i = 0; i < n; ++i) body(i);
#endif
}

}  // namespace sdfplan

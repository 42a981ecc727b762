#include "oelab/parallel.hpp"

#include <omp.h>

namespace oelab {

namespace {
int defaultThreads = 0;
}

void set_threads(int n) {
    if (defaultThreads == 0) defaultThreads = omp_get_max_threads();
    omp_set_num_threads(n > 0 ? n : defaultThreads);
}

int thread_count() { return omp_get_max_threads(); }

}  // namespace oelab

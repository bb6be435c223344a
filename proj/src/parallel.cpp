#include "ftme/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace ftme {

namespace {

std::atomic<int> g_override{0};

int env_cap()
{
    const char* raw = std::getenv("FTME_THREADS");
    if (raw == nullptr) {
        return 0;
    }
    try {
        return std::max(0, std::stoi(raw));
    } catch (...) {
        return 0;
    }
}

}  // namespace

int worker_count()
{
    if (const int forced = g_override.load(); forced > 0) {
        return forced;
    }
#ifdef _OPENMP
    int workers = omp_get_max_threads();
#else
    int workers = 1;
#endif
    if (const int cap = env_cap(); cap > 0) {
        workers = std::min(workers, cap);
    }
    return std::max(1, workers);
}

void set_worker_count(int workers)
{
    g_override.store(std::max(0, workers));
}

}  // namespace ftme

#include "resopt/parallel.hpp"

#include <omp.h>

namespace resopt {

namespace {
int g_cap = 0;
}

void set_thread_cap(int n) {
  g_cap = n;
  if (n > 0) omp_set_num_threads(n);
}

int thread_cap() { return g_cap; }

}  // namespace resopt

#include <math.h>
#include <stdio.h>
#include "chronoscope.h"

#define CHECK(x)                                                             \
  do {                                                                       \
    if ((x) != CHRONO_STATUS_OK) {                                           \
      fprintf(stderr, "%s failed: %s\n", #x, chrono_last_error());          \
      return 1;                                                              \
    }                                                                        \
  } while (0)

int main(void) {
  ChronoState *s = NULL, *later = NULL;
  ChronoHamiltonian *h = NULL;
  ChronoField *f = NULL;
  double ci, vt, vx, ent;
  size_t slices, sites;

  CHECK(chrono_state_from_label("0+1", &s));
  CHECK(chrono_hamiltonian_ising(3, 1.0, 0.3, 0.2, &h));
  CHECK(chrono_evolve(s, h, 0.4, 1e-12, &later));
  CHECK(chrono_ci_exact(later, h, 0, 1, 0.5, 1e-12, &ci));
  CHECK(chrono_aot_field(s, h, 0.05, 3, 1e-12, &f));
  CHECK(chrono_field_shape(f, &slices, &sites));
  CHECK(chrono_field_get(f, 1, 1, &vt, &vx, &ent));
  if (slices != 4 || sites != 3 || !(ci > 0.0) || !isfinite(vt)) return 2;

  if (chrono_ci_exact(later, h, 0, 7, 0.5, 1e-12, &ci) != CHRONO_STATUS_SITE_OUT_OF_RANGE) return 3;
  if (chrono_last_error() == NULL) return 4;

  printf("%s %.17g\n", chrono_version(), ci);
  chrono_field_free(f);
  chrono_state_free(later);
  chrono_state_free(s);
  chrono_hamiltonian_free(h);
  return 0;
}

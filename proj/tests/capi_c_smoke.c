/* The public header compiles as C and the library links from C. */
#include <math.h>
#include <stdio.h>

#include "choquard/choquard.h"

int main(void) {
  chq_grid* grid = NULL;
  chq_state* state = NULL;
  chq_state* rejected = NULL;
  chq_state_info info;
  int failures = 0;

  if (chq_grid_create(1, 25.0, 800, 1.0, &grid) != CHQ_OK) {
    fprintf(stderr, "grid: %s\n", chq_last_error());
    return 1;
  }
  if (chq_solve_model(1, 2.0, grid, NULL, &state) != CHQ_OK) {
    fprintf(stderr, "solve: %s\n", chq_last_error());
    return 1;
  }
  chq_state_get_info(state, &info);
  /* Q(0) = 3/2 for p = 2; the first node sits half a cell off the origin. */
  if (fabs(info.Linf - 1.5) > 1e-3) {
    fprintf(stderr, "Linf %.17g\n", info.Linf);
    failures++;
  }
  if (chq_solve(1, 2.0, 2.0, grid, NULL, &rejected) != CHQ_INVALID_ARGUMENT || rejected != NULL) failures++;
  printf("C interface %s: %s\n", chq_version(), failures == 0 ? "ok" : "FAILED");
  chq_state_free(state);
  chq_grid_free(grid);
  return failures == 0 ? 0 : 1;
}

#include <math.h>
#include <stdio.h>
#include <string.h>

#include "curvlab.h"

#define CHECK(cond)                                                  \
  do {                                                               \
    if (!(cond)) {                                                   \
      fprintf(stderr, "line %d: %s (%s)\n", __LINE__, #cond,         \
              curv_last_error_message());                            \
      return 1;                                                      \
    }                                                                \
  } while (0)

int main(void) {
  CurvMetric *sphere = NULL;
  CHECK(curv_model_new(CURV_MODEL_KIND_EULER_S3, 3, 1.0, 1.0, &sphere) == CURV_STATUS_OK);
  CHECK(curv_metric_dim(sphere) == 3);

  size_t res[3] = {12, 8, 8};
  CurvGrid *grid = NULL;
  CHECK(curv_grid_new(sphere, res, 3, &grid) == CURV_STATUS_OK);

  double vol = 0.0;
  CHECK(curv_volume(sphere, grid, &vol) == CURV_STATUS_OK);
  CHECK(fabs(vol - 2.0 * M_PI * M_PI) < 1e-6);

  int verdict = -1;
  char cite[64];
  size_t len = 0;
  CHECK(curv_classify(4, 1, CURV_MODE_CONFORMAL, 0.0, 0.0, &verdict, cite, sizeof cite, &len) ==
        CURV_STATUS_OK);
  CHECK(verdict == CURV_VERDICT_LOCAL_MIN);
  CHECK(strcmp(cite, "Thm 1.5(1)") == 0);

  CHECK(curv_model_new(CURV_MODEL_KIND_SPHERE, 3, -1.0, 1.0, &sphere) == CURV_STATUS_INVALID_ARGUMENT);
  CHECK(strlen(curv_last_error_message()) > 0);

  curv_grid_free(grid);
  curv_metric_free(sphere);
  printf("ok %s\n", curv_version());
  return 0;
}

#include <math.h>
#include <stdio.h>
#include <string.h>

#include "spherical_sensing.h"

#define CHECK(cond)                                                  \
    do {                                                             \
        if (!(cond)) {                                               \
            fprintf(stderr, "%s:%d: %s (%s)\n", __FILE__, __LINE__, #cond, \
                    ss_last_error_message());                        \
            return 1;                                                \
        }                                                            \
    } while (0)

int main(void) {
    double zeta = 0.0, p = 0.0;
    CHECK(ss_threshold(2, 4, 0.5, &zeta) == SS_STATUS_OK);
    CHECK(ss_pfa(zeta, 2, 4, &p) == SS_STATUS_OK);
    CHECK(fabs(p - 0.5) < 1e-12);

    CHECK(ss_threshold(4, 20, 0.0, &zeta) == SS_STATUS_ERR_DOMAIN);
    CHECK(strstr(ss_last_error_message(), "pfa") != NULL);
    CHECK(ss_threshold(4, 20, 0.1, NULL) == SS_STATUS_ERR_NULL_POINTER);

    ss_beta_params bp;
    CHECK(ss_h0_beta(2, 10, &bp) == SS_STATUS_OK);
    CHECK(fabs(bp.alpha - 9.0) < 1e-9 && fabs(bp.beta - 1.5) < 1e-9);

    double eigs[2] = {2.0, 1.0};
    ss_model *model = NULL;
    CHECK(ss_model_from_eigenvalues(eigs, 2, &model) == SS_STATUS_OK);
    CHECK(ss_model_k(model) == 2);
    double pd = 0.0, exact = 0.0;
    CHECK(ss_pd(0.5, model, 10, &pd) == SS_STATUS_OK);
    CHECK(ss_h1_cdf_exact_k2(0.5, 2.0, 1.0, 10, &exact) == SS_STATUS_OK);
    CHECK(pd == exact);

    double grid[3] = {0.01, 0.1, 0.5};
    ss_roc *roc = NULL;
    CHECK(ss_roc_analytic(model, 10, grid, 3, &roc) == SS_STATUS_OK);
    CHECK(ss_roc_len(roc) == 3);
    double pfa_pts[3], pd_pts[3];
    CHECK(ss_roc_points(roc, pfa_pts, pd_pts, 2) == SS_STATUS_ERR_BUFFER_TOO_SMALL);
    CHECK(ss_roc_points(roc, pfa_pts, pd_pts, 3) == SS_STATUS_OK);
    CHECK(pd_pts[0] <= pd_pts[1] && pd_pts[1] <= pd_pts[2] && pd_pts[0] >= 0.01);
    ss_roc_free(roc);
    ss_model_free(model);
    ss_model_free(NULL);

    double values[100];
    CHECK(ss_simulate(NULL, 4, 20, SS_DETECTOR_ST, 100, 7, values, 100) == SS_STATUS_OK);
    for (int i = 0; i < 100; i++) CHECK(values[i] > 0.0 && values[i] <= 1.0);

    printf("ok %s\n", ss_version());
    return 0;
}

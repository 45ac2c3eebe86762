#include <math.h>
#include <stdio.h>
#include <string.h>

#include "theta_kummer.h"

static int failures = 0;

#define CHECK(cond)                                                    \
    do {                                                               \
        if (!(cond)) {                                                 \
            fprintf(stderr, "%s:%d: check failed: %s\n", __FILE__,     \
                    __LINE__, #cond);                                  \
            failures++;                                                \
        }                                                              \
    } while (0)

int main(void) {
    TkComplex b = {0.0, 1.0};
    TkPeriodMatrix *pm = NULL;
    CHECK(tk_period_matrix_new(1, &b, &pm) == TK_STATUS_OK);
    CHECK(tk_period_matrix_genus(pm) == 1);

    TkComplex z = {0.0, 0.0};
    TkThetaValue v;
    CHECK(tk_theta_eval(pm, &z, 0, NULL, 1e-14, &v) == TK_STATUS_OK);
    CHECK(fabs(v.value.re - 1.0864348112133080) < 1e-14);
    CHECK(fabs(v.value.im) < 1e-15);
    tk_period_matrix_free(pm);

    TkPeriodMatrix *g2 = NULL;
    CHECK(tk_period_matrix_sample(2, 1, 0.3, &g2) == TK_STATUS_OK);
    char *json = NULL;
    CHECK(tk_genus2_pipeline_json(g2, 1, 1e-12, &json) == TK_STATUS_OK);
    CHECK(json != NULL && strstr(json, "\"residuals\"") != NULL);
    tk_string_free(json);

    TkComplex bad[4] = {{0, 1}, {0, 0}, {0, 0}, {0, -1}};
    TkPeriodMatrix *none = NULL;
    TkStatus s = tk_period_matrix_new(2, bad, &none);
    CHECK(s == TK_STATUS_NOT_POSITIVE_DEFINITE);
    CHECK(none == NULL);
    char *msg = tk_last_error_message();
    CHECK(msg != NULL && strstr(msg, "NotPositiveDefinite") != NULL);
    CHECK(strcmp(tk_status_name(s), "NotPositiveDefinite") == 0);
    tk_string_free(msg);

    tk_period_matrix_free(g2);
    if (failures == 0) {
        printf("ok\n");
    }
    return failures == 0 ? 0 : 1;
}

/* End-to-end exercise of the C API: build a table, fit a model, predict,
 * round-trip the model through JSON, and check the error machinery.
 * Prints "smoke ok" and exits 0 on success; exits 1 on the first failure. */

#include <math.h>
#include <stdio.h>
#include <string.h>

#include "chlora.h"

#define CHECK(cond)                                                       \
    do {                                                                  \
        if (!(cond)) {                                                    \
            fprintf(stderr, "FAILED at line %d: %s\nlast error: %s\n",    \
                    __LINE__, #cond, chlora_last_error_message());        \
            return 1;                                                     \
        }                                                                 \
    } while (0)

int main(void) {
    CHECK(strlen(chlora_version()) > 0);
    CHECK(strcmp(chlora_status_name(CHLORA_STATUS_OK), "ok") == 0);

    /* 30 synthetic rows: six positive reflectances and a positive target. */
    enum { N_ROWS = 30, N_BANDS = 6 };
    double rrs[N_ROWS * N_BANDS];
    double chl[N_ROWS];
    for (int i = 0; i < N_ROWS; i++) {
        for (int j = 0; j < N_BANDS; j++) {
            rrs[i * N_BANDS + j] = 0.004 + 0.0015 * ((i * 5 + j * 3) % 17);
        }
        chl[i] = 0.6 + 0.2 * i + 25.0 * rrs[i * N_BANDS + 2];
    }

    ChloraTable *table = NULL;
    CHECK(chlora_table_from_rows(rrs, chl, N_ROWS, &table) == CHLORA_STATUS_OK);
    CHECK(chlora_table_len(table) == N_ROWS);

    double row[N_BANDS];
    double target = 0.0;
    CHECK(chlora_table_get(table, 3, row, &target) == CHLORA_STATUS_OK);
    CHECK(row[0] == rrs[3 * N_BANDS] && target == chl[3]);

    /* Fit twice: once by kind name, once from a JSON spec. */
    ChloraModel *knn = NULL;
    CHECK(chlora_fit_default(table, "knn", &knn) == CHLORA_STATUS_OK);
    CHECK(strcmp(chlora_model_kind(knn), "knn") == 0);

    ChloraModel *ridge = NULL;
    CHECK(chlora_fit(table, "{\"model\": \"ridge\", \"lambda\": 1.0}", &ridge) ==
          CHLORA_STATUS_OK);

    const double probe[N_BANDS] = {0.005, 0.011, 0.02, 0.012, 0.008, 0.004};
    double predicted = 0.0;
    CHECK(chlora_model_predict(knn, probe, &predicted) == CHLORA_STATUS_OK);
    CHECK(isfinite(predicted) && predicted > 0.0);

    double batch[N_ROWS];
    CHECK(chlora_model_predict_batch(ridge, rrs, N_ROWS, batch) == CHLORA_STATUS_OK);
    CHECK(isfinite(batch[0]) && isfinite(batch[N_ROWS - 1]));

    /* JSON round trip preserves predictions bit for bit. */
    char *json = NULL;
    CHECK(chlora_model_to_json(ridge, &json) == CHLORA_STATUS_OK);
    ChloraModel *reread = NULL;
    CHECK(chlora_model_from_json(json, &reread) == CHLORA_STATUS_OK);
    chlora_string_free(json);
    double again = 0.0;
    CHECK(chlora_model_predict(ridge, probe, &predicted) == CHLORA_STATUS_OK);
    CHECK(chlora_model_predict(reread, probe, &again) == CHLORA_STATUS_OK);
    CHECK(again == predicted);

    /* The band-ratio baseline agrees between coefficient-set spellings. */
    double from_default = 0.0;
    double from_name = 0.0;
    CHECK(chlora_baseline_chl(probe, NULL, &from_default) == CHLORA_STATUS_OK);
    CHECK(chlora_baseline_chl(probe, "paper", &from_name) == CHLORA_STATUS_OK);
    CHECK(from_default == from_name && from_default > 0.0);

    /* Failures report a status and a readable message. */
    ChloraModel *bad = NULL;
    CHECK(chlora_fit_default(table, "boosting", &bad) == CHLORA_STATUS_ARGUMENT);
    CHECK(bad == NULL);
    CHECK(strlen(chlora_last_error_message()) > 0);
    CHECK(chlora_model_predict(NULL, probe, &predicted) ==
          CHLORA_STATUS_NULL_POINTER);

    chlora_model_free(reread);
    chlora_model_free(ridge);
    chlora_model_free(knn);
    chlora_table_free(table);

    printf("smoke ok\n");
    return 0;
}

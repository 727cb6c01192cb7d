#include <stdio.h>
#include <string.h>

#include "gsm_threshold.h"

int main(void) {
    GsmScheme s = {GSM_ARCH_CYCLIC, GSM_PROTOCOL_STATIC, 3, 2, 0, GSM_CONVENTION_DEFAULT};
    double eff = 0.0;
    if (gsm_efficiency(&s, 4, 0.05, &eff) != GSM_OK) return 1;
    printf("efficiency %.4f\n", eff);

    GsmScheme bad = s;
    bad.protocol = GSM_PROTOCOL_ACTIVE;
    bad.j = 2;
    if (gsm_efficiency(&bad, 4, 0.05, &eff) != GSM_ERR_VALIDATION) return 2;
    if (strstr(gsm_last_error_message(), "j") == NULL) return 3;

    GsmGraphs *g = NULL;
    if (gsm_graphs_new(3, GSM_ARCH_CYCLIC, &g) != GSM_OK || g == NULL) return 4;
    size_t primal = 0, dual = 0;
    if (gsm_graphs_edge_counts(g, &primal, &dual) != GSM_OK) return 5;
    GsmBatchResult r;
    if (gsm_run_batch(g, &s, 1.0, GSM_CORRELATION_INDEPENDENT, 64, 1, &r) != GSM_OK) return 6;
    printf("edges %zu %zu rate %.1f\n", primal, dual, r.rate);
    gsm_graphs_free(g);
    return r.rate == 1.0 ? 0 : 7;
}

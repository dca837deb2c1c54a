#include <stdio.h>
#include "qpca.h"

int main(void) {
    const double samples[] = {1.0, 0.0};
    const double x[] = {1.0, 0.0};
    QpcaModel *model = NULL;
    QpcaStatus st = qpca_model_train(samples, 1, 2, 1, false, &model);
    if (st != QPCA_STATUS_OK) {
        fprintf(stderr, "%s: %s\n", qpca_status_name(st), qpca_last_error_message());
        return 2;
    }
    QpcaAnalytic a;
    st = qpca_analyze(model, x, 2, 0, &a);
    if (st != QPCA_STATUS_OK || a.overall_yes_probability != 175.0 / 256.0) {
        return 3;
    }
    st = qpca_yes_probability(model, x, 1, &a.likelihood);
    if (st != QPCA_STATUS_DIMENSION_ERROR) {
        return 4;
    }
    printf("%s %.8f\n", qpca_version(), a.overall_yes_probability);
    qpca_model_free(model);
    return 0;
}

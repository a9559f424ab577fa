#include <stdio.h>
#include <stdlib.h>

#include "pcbfeat.h"

int main(void) {
    double p[2] = {0.5, 0.5};
    double g = -1.0;
    if (pcb_gini_impurity(p, 2, &g) != PCB_STATUS_OK || g != 0.5) {
        fprintf(stderr, "gini failed\n");
        return 1;
    }

    size_t w = 30, h = 30;
    unsigned char *rgb = calloc(w * h * 3, 1);
    unsigned char *mask = calloc(w * h, 1);
    for (size_t i = 0; i < w * h; i++) {
        int on = (i % w) < 15;
        rgb[3 * i] = on ? 220 : 30;
        rgb[3 * i + 1] = on ? 30 : 110;
        rgb[3 * i + 2] = on ? 30 : 50;
        mask[i] = on ? 255 : 0;
    }

    PcbConfig *cfg = NULL;
    PcbImage *img = NULL;
    PcbMask *msk = NULL;
    PcbFeatureMatrix *m = NULL;
    if (pcb_config_from_json("{\"families\": [\"color\", \"texture\"]}", &cfg) != PCB_STATUS_OK ||
        pcb_image_from_rgb(w, h, rgb, &img) != PCB_STATUS_OK ||
        pcb_mask_from_raw(w, h, mask, &msk) != PCB_STATUS_OK ||
        pcb_features_extract(cfg, img, msk, 10, &m) != PCB_STATUS_OK) {
        fprintf(stderr, "setup failed: %s\n", pcb_last_error());
        return 1;
    }
    size_t rows = pcb_features_rows(m), cols = pcb_features_cols(m);
    double *imp = malloc(cols * sizeof(double));
    if (pcb_features_importances(m, cfg, imp, cols) != PCB_STATUS_OK) {
        fprintf(stderr, "importances failed: %s\n", pcb_last_error());
        return 1;
    }
    size_t best = 0;
    for (size_t c = 1; c < cols; c++) {
        if (imp[c] > imp[best]) best = c;
    }
    printf("version %s rows %zu cols %zu top %s\n", pcb_version(), rows, cols, pcb_features_name(m, best));

    if (pcb_config_set_ksizes(cfg, NULL, 3) != PCB_STATUS_NULL_POINTER || pcb_last_error() == NULL) {
        fprintf(stderr, "null check failed\n");
        return 1;
    }

    free(imp);
    free(rgb);
    free(mask);
    pcb_features_free(m);
    pcb_mask_free(msk);
    pcb_image_free(img);
    pcb_config_free(cfg);
    return 0;
}

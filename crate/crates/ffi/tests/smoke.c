#include <math.h>
#include <stdio.h>

#include "ddf_dmt.h"

int main(void) {
    double d = 0.0;
    if (ddf_curve_eval("mar_upper", 1, 0.5, &d) != DDF_STATUS_OK) {
        fprintf(stderr, "%s\n", ddf_last_error());
        return 1;
    }
    printf("mar_upper(0.5) = %g\n", d);

    if (ddf_curve_eval("mar_upper", 1, 2.0, &d) != DDF_STATUS_DOMAIN_ERROR) return 2;

    DdfRegion *region = NULL;
    if (ddf_region_new("cvma_sji", 0.8, &region) != DDF_STATUS_OK) return 3;
    double v = 0.0, x[5];
    if (ddf_region_infimum(region, NULL, &v, x, NULL) != DDF_STATUS_OK) return 4;
    ddf_region_free(region);
    printf("d_sji(0.8) = %.6f\n", v);
    return fabs(v - 2.4) < 1e-6 ? 0 : 5;
}

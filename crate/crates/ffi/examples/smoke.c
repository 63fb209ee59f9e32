#include <stdio.h>

#include "sprt_lattice.h"

int main(void) {
    SprtPolicy *policy = NULL;
    if (sprt_policy_parse("N 2 CLOSURE forced\n.B\nR\n", &policy) != SPRT_STATUS_OK) {
        fprintf(stderr, "parse: %s\n", sprt_last_error());
        return 1;
    }
    SprtProfile *profile = NULL;
    if (sprt_profile_exact(policy, "1/10", &profile) != SPRT_STATUS_OK) {
        fprintf(stderr, "profile: %s\n", sprt_last_error());
        return 1;
    }
    char *delta = NULL;
    sprt_profile_get(profile, SPRT_PROFILE_FIELD_DELTA_PLUS, &delta);
    double h = 0.0;
    sprt_profile_get_f64(profile, SPRT_PROFILE_FIELD_H_PLUS, &h);
    printf("delta+ %s H+ %g\n", delta, h);

    SprtPolicy *bad = NULL;
    SprtStatus status = sprt_policy_parse("N 1 CLOSURE nope\n.\n", &bad);
    printf("bad status %d: %s\n", (int)status, sprt_last_error());

    sprt_string_free(delta);
    sprt_profile_free(profile);
    sprt_policy_free(policy);
    return 0;
}

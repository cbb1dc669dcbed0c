#include <stdio.h>
#include "crowdstep.h"

int main(void) {
    CsWorld *w = NULL;
    if (cs_world_new("{\"scenario\":{\"kind\":\"room\",\"agent_count\":20},\"seed\":1}", &w) != CS_STATUS_OK) {
        fprintf(stderr, "%s\n", cs_last_error_message());
        return 1;
    }
    if (cs_world_step(w, 10) != CS_STATUS_OK) return 2;
    size_t n = 0;
    cs_world_agent_count(w, &n);
    uint32_t ids[32];
    double xy[64];
    size_t written = 0;
    if (cs_world_positions(w, ids, xy, 32, &written) != CS_STATUS_OK || written != n) return 3;
    double gap = 0.0;
    cs_world_min_gap(w, &gap);
    printf("agents %zu gap_ok %d\n", n, gap > -1e-9);
    cs_world_free(w);
    if (cs_world_new("{\"seed\":-1}", &w) != CS_STATUS_INVALID_CONFIG || w != NULL) return 4;
    return 0;
}

/* Runs a preset and prints |rho12| after every pulse.
 *   cc run_preset.c -Iinclude -L<target>/release -lcombcpt_ffi -lm -lpthread -ldl
 */
#include <stdio.h>

#include "combcpt.h"

int main(int argc, char **argv) {
    const char *name = argc > 1 ? argv[1] : "fig2a";
    CombcptScenario *scenario = NULL;
    CombcptTrajectory *traj = NULL;
    char msg[512];

    if (combcpt_scenario_from_preset(name, &scenario) != COMBCPT_STATUS_OK ||
        combcpt_scenario_run(scenario, &traj) != COMBCPT_STATUS_OK) {
        combcpt_last_error(msg, sizeof msg);
        fprintf(stderr, "combcpt: %s\n", msg);
        combcpt_scenario_free(scenario);
        return 1;
    }
    for (uint64_t i = 0; i < combcpt_trajectory_len(traj); i++) {
        CombcptSnapshot s;
        combcpt_trajectory_snapshot(traj, i, &s);
        printf("%llu %.12f\n", (unsigned long long)s.pulse, s.abs_rho12);
    }
    combcpt_trajectory_free(traj);
    combcpt_scenario_free(scenario);
    return 0;
}

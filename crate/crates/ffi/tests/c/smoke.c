#include <math.h>
#include <stdio.h>
#include <stdlib.h>

#include "fofh.h"

#define CHECK(call)                                                          \
    do {                                                                     \
        FofhStatus st_ = (call);                                             \
        if (st_ != FOFH_STATUS_OK) {                                         \
            fprintf(stderr, "%s -> %d: %s\n", #call, (int)st_,               \
                    fofh_last_error_message());                              \
            return 1;                                                        \
        }                                                                    \
    } while (0)

int main(void) {
    FofhHamiltonian *er = NULL;
    CHECK(fofh_hamiltonian_new("er", &er));

    double ratio = 0.0;
    CHECK(fofh_branch_ratio(er, 0, 1, 0.0, &ratio));
    if (fabs(ratio + 0.6128684606607803) > 1e-12) {
        fprintf(stderr, "ratio %.17g\n", ratio);
        return 1;
    }

    FofhComplex alpha = {1.4142135623730951, 0.0};
    FofhState *psi = NULL;
    CHECK(fofh_coherent_state(alpha, 0, false, &psi));
    size_t n = fofh_state_len(psi);
    FofhComplex *amps = malloc(n * sizeof *amps);
    CHECK(fofh_state_amplitudes(psi, amps, n));
    double norm = 0.0;
    for (size_t k = 0; k < n; ++k) {
        norm += amps[k].re * amps[k].re + amps[k].im * amps[k].im;
    }
    free(amps);

    double defect = 0.0;
    CHECK(fofh_coherence_defect(alpha, er, 20.0, FOFH_ENERGY_CONVENTION_CLASSICAL, &defect));

    FofhHamiltonian *bad = NULL;
    FofhStatus st = fofh_hamiltonian_new("exp(", &bad);
    if (st != FOFH_STATUS_PARSE || bad != NULL || fofh_last_error_message() == NULL) {
        return 1;
    }

    printf("%s %.12f %.12f\n", fofh_version(), norm, defect);
    fofh_state_free(psi);
    fofh_hamiltonian_free(er);
    return 0;
}

#include <stdio.h>
#include <stdlib.h>

#include "nelson_fiber.h"

static const char *CONFIG =
    "{\"grid\": {\"dimension\": 1, \"extent\": 1.0, \"points_per_axis\": 3, \"mass\": 1.0},"
    " \"params\": {\"g\": 1.0, \"m\": 1.0, \"P\": [0.3],"
    " \"window\": {\"kappa\": 0.5, \"K_gross\": 0.75, \"Lambda\": 1.0}},"
    " \"n_max\": 2, \"beta_list\": [1.0]}";

int main(void) {
    NfHamiltonian *h = NULL;
    if (nf_hamiltonian_new(CONFIG, &h) != NF_STATUS_OK) {
        fprintf(stderr, "assembly failed: %s\n", nf_last_error());
        return 1;
    }
    size_t modes = 0, dim = 0;
    nf_hamiltonian_shape(h, &modes, &dim);

    NfGroundState g;
    if (nf_hamiltonian_ground(h, NF_OPERATOR_RENORMALIZED, 1e-8, 1e-12, &g) != NF_STATUS_OK) {
        fprintf(stderr, "ground state failed: %s\n", nf_last_error());
        nf_hamiltonian_free(h);
        return 1;
    }
    double min_entry = 0.0;
    nf_semigroup_min_entry(h, NF_OPERATOR_RENORMALIZED, 1.0, &min_entry);
    printf("modes %zu dim %zu ground %.6f gap %.6f positive %d min %.3e\n", modes, dim, g.lambda_min, g.gap,
           g.strictly_positive, min_entry);
    nf_hamiltonian_free(h);
    return g.strictly_positive && min_entry > 0.0 ? 0 : 1;
}

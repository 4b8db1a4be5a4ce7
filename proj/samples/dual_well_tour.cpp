// Walks through the dual-well landscape: critical points, the separatrix
// DAG, the Gibbs weights of the two wells and a short noisy path.

#include "morseland/morseland.hpp"

#include <cstdio>

using namespace morseland;

int main() {
    const Landscape land = make_builtin("dual-well");

    const Census census = find_critical_points(land);
    std::printf("critical points\n");
    for (std::size_t i = 0; i < census.size(); ++i) {
        const auto& p = census[i];
        std::printf("  %zu  %-9s index %d  at (%+.6f, %+.6f)  V = %+.6f\n", i, std::string(to_string(p.kind)).c_str(),
                    p.index, p.location[0], p.location[1], p.value);
    }
    std::printf("index sum %d\n", poincare_hopf_check(census).sum);

    const LandscapeDag dag = build_dag(land, census);
    std::printf("edges:");
    for (auto [i, j] : dag.edges) std::printf(" %d->%d", i, j);
    std::printf("\n");

    const ZeroNoiseReport z = zero_noise_weights(land, census, {0.5, 0.3, 0.2}, 0.5, 300);
    for (std::size_t e = 0; e < z.epsilons.size(); ++e)
        std::printf("eps %.2f  well masses %.4f %.4f  elsewhere %.4f\n", z.epsilons[e], z.attractor_masses[e][0],
                    z.attractor_masses[e][1], z.outside_mass[e]);

    // Count well switches along one noisy path.
    const auto path = euler_maruyama(land, 0.6, Vec::Zero(2), 0.01, 100000, 1);
    int switches = 0;
    double side = 0.0;
    for (const auto& x : path.points) {
        if (std::abs(x[0]) < 1.0) continue;
        if (side != 0.0 && x[0] * side < 0.0) ++switches;
        side = x[0];
    }
    std::printf("noisy path (eps 0.6, t = 1000): %d well switches, action %.1f\n", switches, fw_action(land, path));
    return 0;
}

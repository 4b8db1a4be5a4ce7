// Generation landscape of a four-mode mixture under a VP schedule: how the
// census changes with backward time, and where generated samples land.

#include "morseland/morseland.hpp"

#include <cstdio>

using namespace morseland;

int main() {
    const GmmData data = builtin::four_centroids(0.1);
    const NoiseSchedule vp = make_schedule(ScheduleKind::vp, 0.1, 20.0);

    std::printf("   t   attractors saddles repellors\n");
    for (double t : {0.9, 0.7, 0.5, 0.3, 0.2, 0.1, 0.05, 0.01}) {
        const Census c = find_critical_points(generation_landscape(data, vp, t));
        std::printf("%5.2f %8zu %8zu %8zu\n", t, count_kind(c, PointKind::attractor), count_kind(c, PointKind::saddle),
                    count_kind(c, PointKind::repellor));
    }

    const auto samples = reverse_sde_sample(data, vp, 1000, 500, 7);
    const ClusterSummary cs = cluster_by_centroid(data, samples);
    for (std::size_t k = 0; k < data.components(); ++k)
        std::printf("mode (%+.0f, %+.0f): %.1f%% of samples, mean (%+.3f, %+.3f)\n", data.centroids[k][0],
                    data.centroids[k][1], 100.0 * cs.occupancy[k], cs.means[k][0], cs.means[k][1]);
    return 0;
}

// Stores two patterns in a four-neuron network and recalls them from
// corrupted probes.

#include "morseland/morseland.hpp"

#include <cstdio>
#include <random>

using namespace morseland;

int main() {
    Mat patterns(2, 4);
    patterns << 1, 1, -1, -1,
                1, -1, 1, -1;

    HebbianOptions opt;
    opt.c = 2.0;
    const HebbianResult learned = hebbian_pgd(patterns, opt);
    std::printf("learned in %zu iterations, |W| = %.6f\n", learned.iterations, learned.W.norm());

    const HopfieldNet net = make_hopfield(learned.W, 0.85);
    const StabilityReport sr = stability_check(net);
    std::printf("%zu fixed points, %s\n", sr.fixed_points.size(), sr.verdict().c_str());

    std::mt19937_64 rng(3);
    std::normal_distribution<double> noise(0.0, 0.3);
    int hits = 0;
    const int trials = 20;
    for (int t = 0; t < trials; ++t) {
        const Vec xi = patterns.row(t % 2).transpose();
        Vec v0 = 0.7 * xi;
        for (Eigen::Index i = 0; i < v0.size(); ++i) v0[i] += noise(rng);
        const RecallResult r = recall(net, clip_to_range(net, v0));
        const Vec s = sign_pattern(r.point);
        if (s == xi || s == -xi) ++hits;
    }
    std::printf("recalled %d of %d probes (up to sign)\n", hits, trials);
    return 0;
}

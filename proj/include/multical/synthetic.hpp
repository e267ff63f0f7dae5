#pragma once

#include <cstdint>
#include <vector>

#include "multical/dataset.hpp"

namespace multical {

// Three independent fair-coin groups; the label mixes a dyadic linear part
// with a gamma-weighted XOR of the groups; the base predictor is a
// constant. The XOR part is invisible to depth-two ensembles, which makes
// the analytic optimum and its error terms exactly computable.
struct XorSpec {
    double gamma = 0.2;          // in (0,1)
    std::size_t n = 1000;
    std::uint64_t seed = 0;
    double base_constant = 0.5;  // in [0,1]
};

// Closed-form properties of the depth-two optimum on the XOR construction.
struct XorSidecar {
    double gamma = 0.0;
    double base_constant = 0.5;
    double optimal_loss = 0.0;       // gamma^2/4
    double per_group_mc_error = 0.0; // gamma/4
    double epsilon_loss = 0.0;       // gamma^2/4, the saturation gap
};

struct XorResult {
    CalibrationDataset data;
    XorSidecar sidecar;
};

XorResult gen_xor(const XorSpec& spec);

// All 8 group cells exactly once: the empirical distribution equals the
// population one, so population identities hold with zero sampling error.
CalibrationDataset gen_xor_exhaustive(double gamma, double base_constant = 0.5);

// Label for one group cell under the XOR construction.
double xor_label(double gamma, bool g1, bool g2, bool g3);

// Group-biased synthetic with uniform base scores on [0.3, 0.7] and
// fair-coin groups. Each group shifts the label by its (signed) bias; a
// level_flip fraction of the bias reverses sign with the base-score half,
// which a per-level correction can remove but a single global linear
// correction cannot. Scalar --bias broadcasts as alternating signs with
// magnitude bias/ceil(K/2) so the label stays inside [0,1] before noise.
struct GroupBiasSpec {
    std::size_t num_groups = 4;
    std::size_t n = 1000;
    double noise_sd = 0.02;
    std::vector<double> biases;  // per-group signed biases, used verbatim
    double level_flip = 0.5;     // fraction of each bias that flips with f0 >= 0.5
    std::uint64_t seed = 0;
};

// Fills `biases` with K alternating-sign entries of magnitude
// bias/ceil(K/2).
void broadcast_bias(GroupBiasSpec& spec, double bias);

CalibrationDataset gen_group_bias(const GroupBiasSpec& spec);

}  // namespace multical

#include "multical/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "multical/rng.hpp"

namespace multical {

double xor_label(double gamma, bool g1, bool g2, bool g3) {
    const double linear = 0.5 * (g1 ? 1.0 : 0.0) + 0.25 * (g2 ? 1.0 : 0.0) + 0.125 * (g3 ? 1.0 : 0.0);
    const bool parity = g1 ^ g2 ^ g3;
    return (1.0 - gamma) * linear + gamma * (parity ? 1.0 : 0.0);
}

XorResult gen_xor(const XorSpec& spec) {
    if (!(spec.gamma > 0.0 && spec.gamma < 1.0))
        throw std::invalid_argument("gamma must be in (0,1)");
    if (!(spec.base_constant >= 0.0 && spec.base_constant <= 1.0))
        throw std::invalid_argument("base constant must be in [0,1]");
    if (spec.n == 0) throw std::invalid_argument("n must be >= 1");

    std::vector<std::vector<std::uint8_t>> groups(3, std::vector<std::uint8_t>(spec.n));
    std::vector<double> labels(spec.n);
    const CounterRng g1(spec.seed, 1), g2(spec.seed, 2), g3(spec.seed, 3);
    for (std::size_t r = 0; r < spec.n; ++r) {
        const bool a = g1.bernoulli(r);
        const bool b = g2.bernoulli(r);
        const bool c = g3.bernoulli(r);
        groups[0][r] = a;
        groups[1][r] = b;
        groups[2][r] = c;
        labels[r] = xor_label(spec.gamma, a, b, c);
    }
    XorResult out;
    out.data = make_dataset(std::vector<double>(spec.n, spec.base_constant), std::move(groups),
                            std::move(labels), {"g_1", "g_2", "g_3"});
    out.sidecar.gamma = spec.gamma;
    out.sidecar.base_constant = spec.base_constant;
    out.sidecar.optimal_loss = spec.gamma * spec.gamma / 4.0;
    out.sidecar.per_group_mc_error = spec.gamma / 4.0;
    out.sidecar.epsilon_loss = spec.gamma * spec.gamma / 4.0;
    return out;
}

CalibrationDataset gen_xor_exhaustive(double gamma, double base_constant) {
    std::vector<std::vector<std::uint8_t>> groups(3, std::vector<std::uint8_t>(8));
    std::vector<double> labels(8);
    for (std::size_t cell = 0; cell < 8; ++cell) {
        const bool a = cell & 1, b = cell & 2, c = cell & 4;
        groups[0][cell] = a;
        groups[1][cell] = b;
        groups[2][cell] = c;
        labels[cell] = xor_label(gamma, a, b, c);
    }
    return make_dataset(std::vector<double>(8, base_constant), std::move(groups),
                        std::move(labels), {"g_1", "g_2", "g_3"});
}

void broadcast_bias(GroupBiasSpec& spec, double bias) {
    const std::size_t half = (spec.num_groups + 1) / 2;
    spec.biases.assign(spec.num_groups, 0.0);
    for (std::size_t i = 0; i < spec.num_groups; ++i)
        spec.biases[i] = (i % 2 == 0 ? 1.0 : -1.0) * bias / static_cast<double>(half);
}

CalibrationDataset gen_group_bias(const GroupBiasSpec& spec) {
    if (spec.num_groups == 0) throw std::invalid_argument("num_groups must be >= 1");
    if (spec.n == 0) throw std::invalid_argument("n must be >= 1");
    if (spec.noise_sd < 0.0) throw std::invalid_argument("noise_sd must be >= 0");
    if (spec.biases.size() != spec.num_groups)
        throw std::invalid_argument("biases must have one entry per group");
    if (!(spec.level_flip >= 0.0 && spec.level_flip <= 1.0))
        throw std::invalid_argument("level_flip must be in [0,1]");

    const std::size_t K = spec.num_groups;
    std::vector<std::vector<std::uint8_t>> groups(K, std::vector<std::uint8_t>(spec.n));
    std::vector<double> f0(spec.n), labels(spec.n);
    const CounterRng base_rng(spec.seed, 1);
    const CounterRng noise_rng(spec.seed, 2);
    std::vector<CounterRng> group_rng;
    group_rng.reserve(K);
    for (std::size_t i = 0; i < K; ++i) group_rng.emplace_back(spec.seed, 16 + i);
    std::vector<std::string> names;
    names.reserve(K);
    for (std::size_t i = 0; i < K; ++i) names.push_back("g_" + std::to_string(i));

    for (std::size_t r = 0; r < spec.n; ++r) {
        f0[r] = 0.3 + 0.4 * base_rng.uniform(r);
        const double sign = f0[r] >= 0.5 ? 1.0 : -1.0;
        double y = f0[r];
        for (std::size_t i = 0; i < K; ++i) {
            const bool member = group_rng[i].bernoulli(r);
            groups[i][r] = member;
            // group effect a*(1 + level_flip*sign): mean magnitude |a| over
            // the two base-score halves, not removable by one global shift
            if (member) y += spec.biases[i] * (1.0 + spec.level_flip * sign);
        }
        if (spec.noise_sd > 0.0) y += spec.noise_sd * noise_rng.normal(r);
        labels[r] = std::min(1.0, std::max(0.0, y));
    }
    return make_dataset(std::move(f0), std::move(groups), std::move(labels), std::move(names));
}

}  // namespace multical

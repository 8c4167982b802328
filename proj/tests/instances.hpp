#pragma once

#include "sclp/bench.hpp"
#include "sclp/model.hpp"

#include <algorithm>
#include <cstdint>

namespace sclp::testing {

// Small random network family shared by the solver tests: 1-4 servers,
// up to 8 buffers, feed-forward routing.
inline FluidNetwork small_network(std::uint64_t seed, double uncertain_prob) {
    bench::SmallNetworkOptions o;
    o.I = 1 + static_cast<int>(seed % 4);
    o.K = std::max(o.I, 2 + static_cast<int>(seed % 7));
    o.extra_flows = static_cast<int>(seed % 3);
    o.uncertain_prob = uncertain_prob;
    return bench::random_network(o, seed);
}

}  // namespace sclp::testing

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sirf/errors.hpp"

namespace sirf {

using Bits = std::vector<uint8_t>;

// Shannon entropy of the 0/1 fractions, in [0, 1]; 0*log2(0) := 0.
double entropy(const Bits& bits);

// -log2(max(p0, p1)), in [0, 1].
double min_entropy(const Bits& bits);

struct PairHd {
    uint32_t dev_a = 0;
    uint32_t dev_b = 0;
    uint64_t bits_compared = 0;
    uint64_t differing = 0;
    double fraction = 0.0;
};

struct InterChipResult {
    double mean_fraction = 0.0;    // average over pairings
    double pooled_fraction = 0.0;  // total differing / total compared
    uint64_t total_bits = 0;
    double mean_bits_per_pair = 0.0;
    uint64_t pairings = 0;
    std::vector<PairHd> pairs;
};

// Traditional: bit k of device i against bit k of device j, up to the shorter
// length, over all C(n,2) pairings.
InterChipResult interchip_hd(const std::vector<Bits>& bitstrings);

// Aligned: only bit pairs whose provenance keys match (same challenge set and
// soft-data slots) are compared.
struct KeyedBits {
    Bits bits;
    std::vector<uint64_t> keys;  // provenance key per bit
};
InterChipResult interchip_hd_aligned(const std::vector<KeyedBits>& bitstrings);

struct PofResult {
    uint64_t flips = 0;
    uint64_t bits_inspected = 0;
    bool zero_flip_bound = false;  // true when pof is the 1/bits upper bound
    double pof = 0.0;
    double exponent = 0.0;  // log10(pof)
};

// Counts regeneration bit-flips of every device at every corner against its
// enrollment bitstring.
PofResult intrachip_hd_pof(const std::vector<Bits>& enrollment,
                           const std::vector<std::vector<Bits>>& regen_per_corner);

// Mean over devices of the per-device minimum bits produced by one iteration.
double smallest_bitstring(const std::vector<std::vector<uint64_t>>& per_device_counts);

}  // namespace sirf

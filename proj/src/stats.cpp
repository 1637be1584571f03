#include "sirf/stats.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

namespace sirf {

double entropy(const Bits& bits) {
    if (bits.empty()) throw StatsError("entropy: empty bitstring");
    double ones = 0;
    for (uint8_t b : bits) ones += b;
    double p1 = ones / double(bits.size());
    double h = 0.0;
    for (double p : {p1, 1.0 - p1})
        if (p > 0.0) h -= p * std::log2(p);
    return h;
}

double min_entropy(const Bits& bits) {
    if (bits.empty()) throw StatsError("min_entropy: empty bitstring");
    double ones = 0;
    for (uint8_t b : bits) ones += b;
    double p1 = ones / double(bits.size());
    double pmax = std::max(p1, 1.0 - p1);
    return -std::log2(pmax);
}

InterChipResult interchip_hd(const std::vector<Bits>& bs) {
    if (bs.size() < 2) throw StatsError("interchip_hd: need at least two devices");
    InterChipResult res;
    uint64_t total_diff = 0;
    double frac_acc = 0.0;
    double bits_acc = 0.0;
    for (uint32_t i = 0; i < bs.size(); ++i) {
        for (uint32_t j = i + 1; j < bs.size(); ++j) {
            uint64_t n = std::min(bs[i].size(), bs[j].size());
            if (n == 0) throw StatsError("interchip_hd: empty bitstring in set");
            uint64_t diff = 0;
            for (uint64_t k = 0; k < n; ++k) diff += bs[i][k] ^ bs[j][k];
            PairHd p{i, j, n, diff, double(diff) / double(n)};
            frac_acc += p.fraction;
            bits_acc += double(n);
            total_diff += diff;
            res.total_bits += n;
            res.pairs.push_back(p);
        }
    }
    res.pairings = res.pairs.size();
    res.mean_fraction = frac_acc / double(res.pairs.size());
    res.pooled_fraction = double(total_diff) / double(res.total_bits);
    res.mean_bits_per_pair = bits_acc / double(res.pairs.size());
    return res;
}

InterChipResult interchip_hd_aligned(const std::vector<KeyedBits>& bs) {
    if (bs.size() < 2) throw StatsError("interchip_hd_aligned: need at least two devices");
    for (const auto& b : bs)
        if (b.bits.size() != b.keys.size())
            throw StatsError("interchip_hd_aligned: provenance missing for some bits");
    InterChipResult res;
    uint64_t total_diff = 0;
    double frac_acc = 0.0;
    double bits_acc = 0.0;
    uint32_t pairs_with_data = 0;
    std::unordered_map<uint64_t, uint8_t> lookup;
    for (uint32_t i = 0; i < bs.size(); ++i) {
        lookup.clear();
        lookup.reserve(bs[i].keys.size());
        for (size_t k = 0; k < bs[i].keys.size(); ++k) lookup.emplace(bs[i].keys[k], bs[i].bits[k]);
        for (uint32_t j = i + 1; j < bs.size(); ++j) {
            uint64_t n = 0, diff = 0;
            for (size_t k = 0; k < bs[j].keys.size(); ++k) {
                auto it = lookup.find(bs[j].keys[k]);
                if (it == lookup.end()) continue;
                ++n;
                diff += it->second ^ bs[j].bits[k];
            }
            PairHd p{i, j, n, diff, n ? double(diff) / double(n) : 0.0};
            res.pairs.push_back(p);
            res.total_bits += n;
            total_diff += diff;
            bits_acc += double(n);
            if (n > 0) {
                frac_acc += p.fraction;
                ++pairs_with_data;
            }
        }
    }
    res.pairings = res.pairs.size();
    res.mean_fraction = pairs_with_data ? frac_acc / double(pairs_with_data) : 0.0;
    res.pooled_fraction = res.total_bits ? double(total_diff) / double(res.total_bits) : 0.0;
    res.mean_bits_per_pair = res.pairs.empty() ? 0.0 : bits_acc / double(res.pairs.size());
    return res;
}

PofResult intrachip_hd_pof(const std::vector<Bits>& enrollment,
                           const std::vector<std::vector<Bits>>& regen_per_corner) {
    if (enrollment.size() != regen_per_corner.size())
        throw StatsError("intrachip_hd_pof: device count mismatch");
    PofResult res;
    for (size_t d = 0; d < enrollment.size(); ++d) {
        for (const Bits& regen : regen_per_corner[d]) {
            if (regen.size() != enrollment[d].size())
                throw StatsError("intrachip_hd_pof: regenerated bitstring length mismatch");
            for (size_t k = 0; k < regen.size(); ++k) res.flips += enrollment[d][k] ^ regen[k];
            res.bits_inspected += regen.size();
        }
    }
    if (res.bits_inspected == 0) throw StatsError("intrachip_hd_pof: no bits inspected");
    if (res.flips == 0) {
        res.zero_flip_bound = true;
        res.pof = 1.0 / double(res.bits_inspected);
    } else {
        res.pof = double(res.flips) / double(res.bits_inspected);
    }
    res.exponent = std::log10(res.pof);
    return res;
}

double smallest_bitstring(const std::vector<std::vector<uint64_t>>& per_device_counts) {
    if (per_device_counts.empty()) throw StatsError("smallest_bitstring: no devices");
    double acc = 0.0;
    for (const auto& counts : per_device_counts) {
        if (counts.empty()) throw StatsError("smallest_bitstring: device without iterations");
        acc += double(*std::min_element(counts.begin(), counts.end()));
    }
    return acc / double(per_device_counts.size());
}

}  // namespace sirf

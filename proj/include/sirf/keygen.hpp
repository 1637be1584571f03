#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "sirf/errors.hpp"

namespace sirf {

struct ThresholdParams {
    double threshold = 3.0;  // symmetric band: values in [-t, +t] are skipped
};

struct XmrGroup {
    std::vector<uint32_t> carriers;  // positions in the strong-bit sequence
};

// Public regeneration metadata. The mask depends only on magnitudes; the XMR
// group records carry positions only. A global sign flip of the soft data
// leaves all of it unchanged while complementing every derived bit.
struct HelperData {
    std::vector<uint8_t> mask;  // per slot, 1 = strong bit generated here
    uint32_t xmr_level = 1;     // 1 = no redundancy
    std::vector<XmrGroup> groups;
    uint64_t spread_table_ref = 0;  // fingerprint of the spread-factor table

    uint32_t strong_count() const;

    std::vector<uint8_t> to_bytes() const;
    static HelperData from_bytes(const std::vector<uint8_t>& bytes);
    nlohmann::ordered_json to_json() const;
    static HelperData from_json(const nlohmann::ordered_json& j);
};

struct StrongBitstring {
    std::vector<uint8_t> bits;
    std::vector<uint32_t> provenance;  // soft-data slot per bit
};

std::pair<StrongBitstring, HelperData> enroll(const std::vector<double>& dvd_cs,
                                              const ThresholdParams& params);

// Sign-only decision at the recorded positions; no threshold is applied during
// regeneration, so an error occurs exactly when a value crosses the 0 line.
StrongBitstring regenerate(const std::vector<double>& dvd_cs_regen, const HelperData& helper);

struct XmrEncoded {
    std::vector<uint8_t> super_bits;
    std::vector<XmrGroup> groups;  // `level` agreeing carriers per super bit
};

// Groups strong bits into level-sized runs of equal value. A bit that does
// not extend the open group of its value is queued for that value's next
// group, so disagreement costs no key material; the grouping is recorded in
// helper data for regeneration.
XmrEncoded xmr_encode(const StrongBitstring& strong, uint32_t level);

// Majority vote per recorded group; corrects up to floor(level/2) carrier
// flips.
std::vector<uint8_t> xmr_decode(const StrongBitstring& regen_strong, const HelperData& helper);

void attach_xmr(HelperData& helper, const XmrEncoded& encoded, uint32_t level);

}  // namespace sirf

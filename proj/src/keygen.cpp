#include "sirf/keygen.hpp"

#include <array>
#include <cmath>
#include <cstring>

namespace sirf {

uint32_t HelperData::strong_count() const {
    uint32_t n = 0;
    for (uint8_t b : mask) n += b;
    return n;
}

std::pair<StrongBitstring, HelperData> enroll(const std::vector<double>& dvd_cs,
                                              const ThresholdParams& params) {
    if (params.threshold <= 0) throw KeygenError("threshold must be positive");
    StrongBitstring bs;
    HelperData helper;
    helper.mask.assign(dvd_cs.size(), 0);
    for (size_t k = 0; k < dvd_cs.size(); ++k) {
        double v = dvd_cs[k];
        if (!std::isfinite(v)) throw KeygenError("non-finite soft data value");
        // strictly-greater comparison: values on the threshold stay weak
        if (v > params.threshold) {
            helper.mask[k] = 1;
            bs.bits.push_back(1);
            bs.provenance.push_back(uint32_t(k));
        } else if (v < -params.threshold) {
            helper.mask[k] = 1;
            bs.bits.push_back(0);
            bs.provenance.push_back(uint32_t(k));
        }
    }
    if (bs.bits.empty())
        throw KeygenError("empty key: no value clears the threshold band");
    return {std::move(bs), std::move(helper)};
}

StrongBitstring regenerate(const std::vector<double>& dvd_cs_regen, const HelperData& helper) {
    if (dvd_cs_regen.size() != helper.mask.size())
        throw KeygenError("helper mask is not aligned to the soft data");
    StrongBitstring bs;
    for (size_t k = 0; k < helper.mask.size(); ++k) {
        if (!helper.mask[k]) continue;
        bs.bits.push_back(dvd_cs_regen[k] > 0.0 ? 1 : 0);  // exactly 0 decodes as 0
        bs.provenance.push_back(uint32_t(k));
    }
    return bs;
}

XmrEncoded xmr_encode(const StrongBitstring& strong, uint32_t level) {
    if (level < 3 || level % 2 == 0) throw KeygenError("XMR level must be odd and >= 3");
    XmrEncoded out;
    // One open group per bit value: a disagreeing bit is not discarded, it
    // seeds or extends the group collecting its own value.
    std::array<std::vector<uint32_t>, 2> open;
    for (uint32_t i = 0; i < strong.bits.size(); ++i) {
        auto& grp = open[strong.bits[i]];
        grp.push_back(i);
        if (grp.size() == level) {
            out.groups.push_back(XmrGroup{grp});
            out.super_bits.push_back(strong.bits[i]);
            grp.clear();
        }
    }
    if (out.super_bits.empty())
        throw KeygenError("empty key: not enough agreeing strong bits for one XMR group");
    return out;
}

void attach_xmr(HelperData& helper, const XmrEncoded& encoded, uint32_t level) {
    helper.xmr_level = level;
    helper.groups = encoded.groups;
}

std::vector<uint8_t> xmr_decode(const StrongBitstring& regen_strong, const HelperData& helper) {
    if (helper.xmr_level < 3) throw KeygenError("helper data carries no XMR groups");
    std::vector<uint8_t> out;
    out.reserve(helper.groups.size());
    for (const XmrGroup& g : helper.groups) {
        uint32_t ones = 0;
        for (uint32_t pos : g.carriers) {
            if (pos >= regen_strong.bits.size())
                throw KeygenError("XMR group carrier outside regenerated bitstring");
            ones += regen_strong.bits[pos];
        }
        out.push_back(ones * 2 > g.carriers.size() ? 1 : 0);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Helper-data wire format (little-endian):
//   magic   "SRFH"
//   u8      version (1)
//   u8      xmr_level
//   u16     reserved (0)
//   u64     spread_table_ref
//   u32     mask length in bits
//   u32     group count
//   bytes   mask, packed LSB-first
//   u32[]   group carriers, xmr_level entries per group

namespace {

template <typename T>
void put(std::vector<uint8_t>& out, T v) {
    for (size_t i = 0; i < sizeof(T); ++i) out.push_back(uint8_t(v >> (8 * i)));
}

template <typename T>
T take(const std::vector<uint8_t>& in, size_t& pos) {
    if (pos + sizeof(T) > in.size()) throw KeygenError("helper data truncated");
    T v = 0;
    for (size_t i = 0; i < sizeof(T); ++i) v |= T(in[pos + i]) << (8 * i);
    pos += sizeof(T);
    return v;
}

}  // namespace

std::vector<uint8_t> HelperData::to_bytes() const {
    std::vector<uint8_t> out = {'S', 'R', 'F', 'H'};
    put<uint8_t>(out, 1);
    put<uint8_t>(out, uint8_t(xmr_level));
    put<uint16_t>(out, 0);
    put<uint64_t>(out, spread_table_ref);
    put<uint32_t>(out, uint32_t(mask.size()));
    put<uint32_t>(out, uint32_t(groups.size()));
    uint8_t acc = 0;
    for (size_t k = 0; k < mask.size(); ++k) {
        if (mask[k]) acc |= uint8_t(1u << (k % 8));
        if (k % 8 == 7) {
            out.push_back(acc);
            acc = 0;
        }
    }
    if (mask.size() % 8 != 0) out.push_back(acc);
    for (const XmrGroup& g : groups) {
        if (g.carriers.size() != xmr_level)
            throw KeygenError("group size does not match XMR level");
        for (uint32_t c : g.carriers) put<uint32_t>(out, c);
    }
    return out;
}

HelperData HelperData::from_bytes(const std::vector<uint8_t>& bytes) {
    size_t pos = 0;
    if (bytes.size() < 4 || std::memcmp(bytes.data(), "SRFH", 4) != 0)
        throw KeygenError("bad helper data magic");
    pos = 4;
    uint8_t version = take<uint8_t>(bytes, pos);
    if (version != 1) throw KeygenError("unsupported helper data version");
    HelperData h;
    h.xmr_level = take<uint8_t>(bytes, pos);
    take<uint16_t>(bytes, pos);
    h.spread_table_ref = take<uint64_t>(bytes, pos);
    uint32_t mask_len = take<uint32_t>(bytes, pos);
    uint32_t group_count = take<uint32_t>(bytes, pos);
    h.mask.resize(mask_len);
    size_t mask_bytes = (mask_len + 7) / 8;
    if (pos + mask_bytes > bytes.size()) throw KeygenError("helper data truncated");
    for (uint32_t k = 0; k < mask_len; ++k)
        h.mask[k] = (bytes[pos + k / 8] >> (k % 8)) & 1;
    pos += mask_bytes;
    h.groups.resize(group_count);
    for (auto& g : h.groups) {
        g.carriers.resize(h.xmr_level);
        for (auto& c : g.carriers) c = take<uint32_t>(bytes, pos);
    }
    return h;
}

using ojson = nlohmann::ordered_json;

ojson HelperData::to_json() const {
    ojson jg = ojson::array();
    for (const auto& g : groups) jg.push_back(g.carriers);
    return ojson{{"xmr_level", xmr_level},
                 {"spread_table_ref", spread_table_ref},
                 {"mask", mask},
                 {"groups", jg}};
}

HelperData HelperData::from_json(const ojson& j) {
    HelperData h;
    h.xmr_level = j.at("xmr_level");
    h.spread_table_ref = j.at("spread_table_ref");
    h.mask = j.at("mask").get<std::vector<uint8_t>>();
    for (const auto& jg : j.at("groups")) {
        XmrGroup g;
        g.carriers = jg.get<std::vector<uint32_t>>();
        h.groups.push_back(std::move(g));
    }
    return h;
}

}  // namespace sirf

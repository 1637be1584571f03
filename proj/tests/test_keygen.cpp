#include <doctest.h>

#include <cmath>

#include "sirf/keygen.hpp"
#include "sirf/stats.hpp"
#include "sirf/rng.hpp"

using namespace sirf;

namespace {

std::vector<double> random_soft(Rng& rng, size_t n, double spread) {
    std::vector<double> v(n);
    for (auto& x : v) x = spread * rng.normal();
    return v;
}

// Exhaustive check that a level-sized majority group corrects every pattern
// with at most floor(level/2) flips and fails beyond.
void exhaustive_group_check(uint32_t level) {
    for (uint8_t value : {uint8_t(0), uint8_t(1)}) {
        for (uint32_t pattern = 0; pattern < (1u << level); ++pattern) {
            StrongBitstring strong;
            HelperData helper;
            helper.xmr_level = level;
            XmrGroup g;
            uint32_t flips = 0;
            for (uint32_t i = 0; i < level; ++i) {
                bool flip_here = (pattern >> i) & 1;
                flips += flip_here;
                strong.bits.push_back(uint8_t(value ^ flip_here));
                strong.provenance.push_back(i);
                g.carriers.push_back(i);
            }
            helper.groups.push_back(g);
            Bits out = xmr_decode(strong, helper);
            bool corrected = out[0] == value;
            CHECK(corrected == (flips <= level / 2));
        }
    }
}

}  // namespace

TEST_CASE("enroll: threshold rule, mask and bits") {
    auto [bs, helper] = enroll({5.1, -0.5, -7.2}, ThresholdParams{3.0});
    CHECK(bs.bits == Bits{1, 0});
    CHECK(helper.mask == std::vector<uint8_t>{1, 0, 1});
    CHECK(bs.provenance == std::vector<uint32_t>{0, 2});

    SUBCASE("all weak values give an empty-key error") {
        CHECK_THROWS_AS(enroll({0.1, -2.9, 1.0}, ThresholdParams{3.0}), KeygenError);
    }
    SUBCASE("boundary values stay weak (strictly-greater rule)") {
        auto [b2, h2] = enroll({3.0, -3.0, 3.0001}, ThresholdParams{3.0});
        CHECK(b2.bits == Bits{1});
        CHECK(h2.mask == std::vector<uint8_t>{0, 0, 1});
    }
    SUBCASE("invalid threshold rejected") {
        CHECK_THROWS_AS(enroll({1.0}, ThresholdParams{0.0}), KeygenError);
    }
}

TEST_CASE("regenerate: sign-only decision at recorded positions") {
    std::vector<double> enrolled = {5.1, -0.5, -7.2, 2.0};
    auto [bs, helper] = enroll(enrolled, ThresholdParams{3.0});

    SUBCASE("identical data reproduces the bitstring") {
        StrongBitstring regen = regenerate(enrolled, helper);
        CHECK(regen.bits == bs.bits);
        CHECK(regen.provenance == bs.provenance);
    }
    SUBCASE("crossing the zero line flips the bit, encroachment does not") {
        StrongBitstring regen = regenerate({0.4, -0.5, -7.2, 2.0}, helper);
        CHECK(regen.bits == Bits{1, 0});  // 5.1 -> 0.4 stays positive
        regen = regenerate({-0.4, -0.5, -7.2, 2.0}, helper);
        CHECK(regen.bits == Bits{0, 0});  // crossed: flip recorded
    }
    SUBCASE("exactly zero decodes as 0") {
        StrongBitstring regen = regenerate({0.0, -0.5, -7.2, 2.0}, helper);
        CHECK(regen.bits[0] == 0);
    }
    SUBCASE("misaligned mask rejected") {
        CHECK_THROWS_AS(regenerate({1.0, 2.0}, helper), KeygenError);
    }
}

TEST_CASE("xmr encode: agreeing groups per value class") {
    StrongBitstring s;
    s.bits = {1, 1, 1};
    s.provenance = {0, 1, 2};
    XmrEncoded e = xmr_encode(s, 3);
    CHECK(e.super_bits == Bits{1});
    CHECK(e.groups[0].carriers == std::vector<uint32_t>{0, 1, 2});

    SUBCASE("level must be odd and >= 3") {
        CHECK_THROWS_AS(xmr_encode(s, 2), KeygenError);
        CHECK_THROWS_AS(xmr_encode(s, 1), KeygenError);
    }
    SUBCASE("stream of agreeing bits yields floor(n/level) groups") {
        StrongBitstring all_ones;
        for (uint32_t i = 0; i < 23; ++i) {
            all_ones.bits.push_back(1);
            all_ones.provenance.push_back(i);
        }
        XmrEncoded e5 = xmr_encode(all_ones, 5);
        CHECK(e5.super_bits.size() == 4);  // floor(23/5)
        for (uint8_t b : e5.super_bits) CHECK(b == 1);
    }
    SUBCASE("disagreeing bits fill their own value's groups") {
        StrongBitstring mixed;
        Bits pattern = {1, 0, 1, 0, 1, 0, 1, 0, 1, 0};
        for (uint32_t i = 0; i < pattern.size(); ++i) {
            mixed.bits.push_back(pattern[i]);
            mixed.provenance.push_back(i);
        }
        XmrEncoded e3 = xmr_encode(mixed, 3);
        REQUIRE(e3.super_bits.size() == 2);
        CHECK(e3.super_bits[0] == 1);  // positions 0,2,4
        CHECK(e3.groups[0].carriers == std::vector<uint32_t>{0, 2, 4});
        CHECK(e3.super_bits[1] == 0);  // positions 1,3,5
        CHECK(e3.groups[1].carriers == std::vector<uint32_t>{1, 3, 5});
    }
    SUBCASE("too few bits for a single group") {
        StrongBitstring tiny;
        tiny.bits = {1, 0};
        tiny.provenance = {0, 1};
        CHECK_THROWS_AS(xmr_encode(tiny, 3), KeygenError);
    }
}

TEST_CASE("xmr decode: majority vote per group") {
    StrongBitstring s;
    s.bits = {1, 1, 0};
    s.provenance = {0, 1, 2};
    HelperData h;
    h.xmr_level = 3;
    h.groups.push_back(XmrGroup{{0, 1, 2}});
    CHECK(xmr_decode(s, h) == Bits{1});  // one flip tolerated

    s.bits = {1, 0, 0};
    CHECK(xmr_decode(s, h) == Bits{0});  // two flips defeat the majority
}

TEST_CASE("xmr exhaustive correction bound for levels 3 and 5") {
    exhaustive_group_check(3);
    exhaustive_group_check(5);
}

TEST_CASE("xmr monte-carlo error rate matches the binomial tail") {
    for (double p : {0.01, 0.05}) {
        const uint32_t level = 5;
        const uint64_t n_groups = 400000;
        Rng rng(uint64_t(p * 1000) + 17);
        uint64_t errors = 0;
        for (uint64_t g = 0; g < n_groups; ++g) {
            uint32_t flips = 0;
            for (uint32_t i = 0; i < level; ++i) flips += rng.bernoulli(p);
            errors += flips > level / 2;
        }
        double p_hat = double(errors) / double(n_groups);
        // binomial tail: sum_{j >= 3} C(5,j) p^j (1-p)^(5-j)
        auto choose = [](int n, int k) {
            double r = 1;
            for (int i = 0; i < k; ++i) r = r * double(n - i) / double(i + 1);
            return r;
        };
        double p_th = 0.0;
        for (int j = 3; j <= 5; ++j)
            p_th += choose(5, j) * std::pow(p, j) * std::pow(1 - p, 5 - j);
        double sigma = std::sqrt(p_th * (1 - p_th) / double(n_groups));
        CHECK(std::fabs(p_hat - p_th) <= 2.0 * sigma + 1e-12);
    }
}

TEST_CASE("round trip: regeneration of enrollment data is exact") {
    Rng rng(23);
    for (int trial = 0; trial < 200; ++trial) {
        auto soft = random_soft(rng, 256, 4.0);
        ThresholdParams t{2.5};
        StrongBitstring bs;
        HelperData helper;
        try {
            std::tie(bs, helper) = enroll(soft, t);
        } catch (const KeygenError&) {
            continue;
        }
        StrongBitstring regen = regenerate(soft, helper);
        CHECK(regen.bits == bs.bits);
    }
}

TEST_CASE("helper data carries no bit values: sign flip complements the key only") {
    Rng rng(31);
    auto soft = random_soft(rng, 2048, 4.0);
    auto [bs, helper] = enroll(soft, ThresholdParams{3.0});
    XmrEncoded enc = xmr_encode(bs, 5);
    attach_xmr(helper, enc, 5);

    std::vector<double> flipped(soft);
    for (auto& v : flipped) v = -v;
    auto [bs2, helper2] = enroll(flipped, ThresholdParams{3.0});
    XmrEncoded enc2 = xmr_encode(bs2, 5);
    attach_xmr(helper2, enc2, 5);

    CHECK(helper2.mask == helper.mask);
    REQUIRE(helper2.groups.size() == helper.groups.size());
    for (size_t g = 0; g < helper.groups.size(); ++g)
        CHECK(helper2.groups[g].carriers == helper.groups[g].carriers);
    REQUIRE(bs2.bits.size() == bs.bits.size());
    for (size_t i = 0; i < bs.bits.size(); ++i) CHECK(bs2.bits[i] == (bs.bits[i] ^ 1));
    for (size_t i = 0; i < enc.super_bits.size(); ++i)
        CHECK(enc2.super_bits[i] == (enc.super_bits[i] ^ 1));
}

TEST_CASE("threshold monotonicity: larger threshold, fewer strong bits, fewer flips") {
    Rng rng(41);
    double flips_small = 0, flips_large = 0;
    uint64_t strong_small = 0, strong_large = 0;
    for (int trial = 0; trial < 300; ++trial) {
        auto soft = random_soft(rng, 512, 4.0);
        std::vector<double> noisy(soft);
        for (auto& v : noisy) v += 0.8 * rng.normal();
        for (double threshold : {2.0, 3.5}) {
            StrongBitstring bs;
            HelperData helper;
            try {
                std::tie(bs, helper) = enroll(soft, ThresholdParams{threshold});
            } catch (const KeygenError&) {
                continue;
            }
            StrongBitstring regen = regenerate(noisy, helper);
            uint64_t flips = 0;
            for (size_t i = 0; i < bs.bits.size(); ++i) flips += bs.bits[i] ^ regen.bits[i];
            if (threshold == 2.0) {
                strong_small += bs.bits.size();
                flips_small += double(flips) / double(bs.bits.size());
            } else {
                strong_large += bs.bits.size();
                flips_large += double(flips) / double(bs.bits.size());
            }
        }
    }
    CHECK(strong_large < strong_small);
    CHECK(flips_large < flips_small);
}

TEST_CASE("helper data binary format round trip") {
    Rng rng(51);
    auto soft = random_soft(rng, 300, 4.0);
    auto [bs, helper] = enroll(soft, ThresholdParams{2.0});
    XmrEncoded enc = xmr_encode(bs, 3);
    attach_xmr(helper, enc, 3);
    helper.spread_table_ref = 0x1234abcd5678ULL;

    std::vector<uint8_t> bytes = helper.to_bytes();
    CHECK(bytes[0] == 'S');
    CHECK(bytes[1] == 'R');
    CHECK(bytes[2] == 'F');
    CHECK(bytes[3] == 'H');
    HelperData parsed = HelperData::from_bytes(bytes);
    CHECK(parsed.mask == helper.mask);
    CHECK(parsed.xmr_level == helper.xmr_level);
    CHECK(parsed.spread_table_ref == helper.spread_table_ref);
    REQUIRE(parsed.groups.size() == helper.groups.size());
    for (size_t g = 0; g < helper.groups.size(); ++g)
        CHECK(parsed.groups[g].carriers == helper.groups[g].carriers);

    HelperData parsed_json = HelperData::from_json(helper.to_json());
    CHECK(parsed_json.mask == helper.mask);
    CHECK(parsed_json.groups.size() == helper.groups.size());

    SUBCASE("corrupted magic rejected") {
        bytes[0] = 'X';
        CHECK_THROWS_AS(HelperData::from_bytes(bytes), KeygenError);
    }
    SUBCASE("truncation rejected") {
        bytes.resize(bytes.size() - 3);
        CHECK_THROWS_AS(HelperData::from_bytes(bytes), KeygenError);
    }
}

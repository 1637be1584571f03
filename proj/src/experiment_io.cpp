// Persistence for the enroll / regenerate / stats protocol and report-level
// comparison. Bitstrings travel as hex-packed strings (LSB first).

#include <cmath>
#include <filesystem>
#include <map>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "sirf/experiment.hpp"
#include "sirf/rng.hpp"

namespace sirf {

using ojson = nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

std::string bits_to_hex(const Bits& bits) {
    std::ostringstream os;
    os << std::hex << std::setfill('0');
    for (size_t i = 0; i < bits.size(); i += 8) {
        unsigned byte = 0;
        for (size_t k = 0; k < 8 && i + k < bits.size(); ++k) byte |= unsigned(bits[i + k]) << k;
        os << std::setw(2) << byte;
    }
    return os.str();
}

Bits hex_to_bits(const std::string& hex, size_t n_bits) {
    Bits bits(n_bits, 0);
    for (size_t i = 0; i < n_bits; ++i) {
        size_t byte_idx = i / 8;
        char c = hex.at(byte_idx * 2 + (i % 8 < 4 ? 1 : 0));
        unsigned v = (c <= '9') ? unsigned(c - '0') : unsigned(c - 'a' + 10);
        bits[i] = (v >> (i % 4)) & 1;
    }
    return bits;
}

ojson load_json_file(const fs::path& p) {
    std::ifstream is(p);
    if (!is) throw ExperimentError("cannot open " + p.string());
    return ojson::parse(is);
}

void save_json_file(const fs::path& p, const ojson& j) {
    fs::create_directories(p.parent_path());
    std::ofstream os(p, std::ios::binary);
    if (!os) throw ExperimentError("cannot write " + p.string());
    os << j.dump(2);
}

std::string set_name(uint32_t i) {
    std::ostringstream os;
    os << "set_" << std::setw(4) << std::setfill('0') << i;
    return os.str();
}

uint64_t group_key_io(uint32_t set_index, const XmrGroup& group, const StrongBitstring& strong) {
    uint64_t h = hash_combine(0xA118BEDULL, set_index);
    for (uint32_t pos : group.carriers) h = hash_combine(h, strong.provenance[pos]);
    return h;
}

}  // namespace

EnrollmentArtifacts run_enrollment(const ExperimentConfig& cfg) {
    cfg.validate();
    if (cfg.output_dir.empty()) throw ConfigError("enrollment requires an output directory");
    fs::path out(cfg.output_dir);
    ExperimentContext ctx(cfg);
    const uint32_t nd = cfg.n_devices;
    const uint32_t enroll_idx = cfg.enrollment_corner();
    const double t_bitgen = cfg.params.keygen.bitgen_threshold;

    save_json_file(out / "netlist.json", ctx.graph().to_json());
    {
        ojson pop = ojson::array();
        for (const auto& d : ctx.devices()) pop.push_back(d.to_json());
        save_json_file(out / "population.json", pop);
    }

    // enroll.json: per device x level, one record per set
    ojson enroll_doc;
    enroll_doc["xmr_levels"] = cfg.xmr_levels;
    enroll_doc["n_devices"] = nd;
    enroll_doc["challenge_sets"] = cfg.challenge_sets;
    ojson per_set = ojson::array();

    for (uint32_t si = 0; si < cfg.challenge_sets; ++si) {
        SetData set = ctx.next_set();
        ojson jset;
        jset["set_index"] = set.set_index;
        jset["rising_ids"] = set.rising_ids;
        jset["falling_ids"] = set.falling_ids;
        jset["spread"] = set.spread.to_json();
        ojson jdevs = ojson::array();
        for (uint32_t d = 0; d < nd; ++d) {
            auto [strong, helper0] = enroll(set.soft[d][enroll_idx].dvd_cs,
                                            ThresholdParams{t_bitgen});
            helper0.spread_table_ref = set.spread.fingerprint();
            ojson jdev;
            jdev["device"] = d;
            jdev["mask_hex"] = bits_to_hex(helper0.mask);
            jdev["mask_bits"] = helper0.mask.size();
            ojson jlv = ojson::array();
            for (uint32_t level : cfg.xmr_levels) {
                XmrEncoded enc = xmr_encode(strong, level);
                ojson groups = ojson::array();
                std::vector<uint64_t> keys;
                for (const auto& g : enc.groups) {
                    groups.push_back(g.carriers);
                    keys.push_back(group_key_io(set.set_index, g, strong));
                }
                jlv.push_back(ojson{{"level", level},
                                    {"super_bits_hex", bits_to_hex(enc.super_bits)},
                                    {"super_bits", enc.super_bits.size()},
                                    {"groups", groups},
                                    {"keys", keys}});
            }
            jdev["levels"] = std::move(jlv);
            jdevs.push_back(std::move(jdev));
        }
        jset["devices"] = std::move(jdevs);
        save_json_file(out / "sets" / (set_name(si) + ".json"), jset);
        per_set.push_back(ojson{{"set_index", si}, {"file", "sets/" + set_name(si) + ".json"}});
    }
    enroll_doc["sets"] = per_set;
    save_json_file(out / "enroll.json", enroll_doc);

    ojson manifest{{"tool", "sirf-sim"},
                   {"version", "1.0.0"},
                   {"mode", "enroll"},
                   {"config_hash", cfg.config_hash()},
                   {"config", cfg.to_json()}};
    save_json_file(out / "manifest.json", manifest);

    EnrollmentArtifacts art;
    art.dir = cfg.output_dir;
    art.summary = ojson{{"output_dir", cfg.output_dir},
                        {"n_devices", nd},
                        {"challenge_sets", cfg.challenge_sets},
                        {"candidates_tested", ctx.candidates_tested()},
                        {"candidates_accepted", ctx.candidates_accepted()}};
    return art;
}

ojson run_regeneration(const std::string& dir, const std::string& corner_label,
                       uint64_t noise_seed) {
    fs::path in(dir);
    ojson manifest = load_json_file(in / "manifest.json");
    ExperimentConfig cfg = ExperimentConfig::from_json(manifest.at("config"));
    NetlistGraph graph = NetlistGraph::from_json(load_json_file(in / "netlist.json"));

    EnvCorner corner;
    bool found = false;
    for (const auto& c : cfg.corners) {
        if (c.label == corner_label) {
            corner = c;
            found = true;
        }
    }
    if (!found) throw ConfigError("corner label '" + corner_label + "' not in enrollment config");

    std::vector<DeviceInstance> pop;
    for (const auto& jd : load_json_file(in / "population.json"))
        pop.push_back(DeviceInstance::from_json(jd));
    Measurer measurer(cfg.params, graph, std::move(pop), {corner}, cfg.seeds.challenges,
                      noise_seed);

    ojson enroll_doc = load_json_file(in / "enroll.json");
    const uint32_t nd = enroll_doc.at("n_devices");
    const PipelineParams& pp = cfg.params.pipeline;

    ojson regen_doc;
    regen_doc["corner"] = corner_label;
    regen_doc["noise_seed"] = noise_seed;
    ojson jsets = ojson::array();
    std::map<uint32_t, std::pair<uint64_t, uint64_t>> flip_totals;  // level -> (flips, bits)

    for (const auto& set_ref : enroll_doc.at("sets")) {
        ojson jset = load_json_file(in / set_ref.at("file").get<std::string>());
        auto rising_ids = jset.at("rising_ids").get<std::vector<uint64_t>>();
        auto falling_ids = jset.at("falling_ids").get<std::vector<uint64_t>>();
        SpreadFactorTable spread = SpreadFactorTable::from_json(jset.at("spread"));

        std::vector<double> dvr_all = measurer.measure_ids(rising_ids, Polarity::Rising, 0,
                                                           cfg.parallel);
        std::vector<double> dvf_all = measurer.measure_ids(falling_ids, Polarity::Falling, 0,
                                                           cfg.parallel);
        const size_t n = rising_ids.size();

        ojson jout;
        jout["set_index"] = jset.at("set_index");
        ojson jdevs = ojson::array();
        for (uint32_t d = 0; d < nd; ++d) {
            std::vector<double> dvr(dvr_all.begin() + d * n, dvr_all.begin() + (d + 1) * n);
            std::vector<double> dvf(dvf_all.begin() + d * n, dvf_all.begin() + (d + 1) * n);
            std::vector<double> dvd_cs = apply_spread_factors(
                gpev(dv_diffs(dvr, dvf), pp.gpev_mu_ref, pp.gpev_spread_ref), spread);

            const ojson& jdev_enroll = jset.at("devices").at(d);
            size_t mask_bits = jdev_enroll.at("mask_bits");
            HelperData helper;
            helper.mask = hex_to_bits(jdev_enroll.at("mask_hex").get<std::string>(), mask_bits);
            helper.spread_table_ref = spread.fingerprint();

            StrongBitstring regen_strong = regenerate(dvd_cs, helper);
            ojson jlv = ojson::array();
            for (const auto& jlevel : jdev_enroll.at("levels")) {
                uint32_t level = jlevel.at("level");
                HelperData h = helper;
                h.xmr_level = level;
                for (const auto& jg : jlevel.at("groups")) {
                    XmrGroup g;
                    g.carriers = jg.get<std::vector<uint32_t>>();
                    h.groups.push_back(std::move(g));
                }
                Bits super_regen = xmr_decode(regen_strong, h);
                size_t n_super = jlevel.at("super_bits");
                Bits super_enroll =
                    hex_to_bits(jlevel.at("super_bits_hex").get<std::string>(), n_super);
                uint64_t flips = 0;
                for (size_t k = 0; k < n_super; ++k) flips += super_enroll[k] ^ super_regen[k];
                flip_totals[level].first += flips;
                flip_totals[level].second += n_super;
                jlv.push_back(ojson{{"level", level},
                                    {"super_bits_hex", bits_to_hex(super_regen)},
                                    {"super_bits", super_regen.size()},
                                    {"flips", flips}});
            }
            jdevs.push_back(
                ojson{{"device", d}, {"levels", std::move(jlv)}});
        }
        jout["devices"] = std::move(jdevs);
        jsets.push_back(std::move(jout));
    }
    regen_doc["sets"] = std::move(jsets);

    ojson totals = ojson::array();
    for (const auto& [level, fb] : flip_totals)
        totals.push_back(ojson{{"level", level}, {"flips", fb.first}, {"bits", fb.second}});
    regen_doc["flip_totals"] = totals;

    std::ostringstream name;
    name << "regen_" << corner_label << "_seed" << noise_seed << ".json";
    save_json_file(in / "regen" / name.str(), regen_doc);

    return ojson{{"corner", corner_label},
                 {"noise_seed", noise_seed},
                 {"flip_totals", totals},
                 {"file", "regen/" + name.str()}};
}

ojson recompute_stats(const std::string& dir) {
    fs::path in(dir);
    ojson enroll_doc = load_json_file(in / "enroll.json");
    const uint32_t nd = enroll_doc.at("n_devices");
    auto levels = enroll_doc.at("xmr_levels").get<std::vector<uint32_t>>();

    // Gather enrollment bitstrings per device and level.
    std::map<uint32_t, std::vector<Bits>> sbs;
    std::map<uint32_t, std::vector<std::vector<uint64_t>>> keys;
    for (uint32_t l : levels) {
        sbs[l].resize(nd);
        keys[l].resize(nd);
    }
    for (const auto& set_ref : enroll_doc.at("sets")) {
        ojson jset = load_json_file(in / set_ref.at("file").get<std::string>());
        for (uint32_t d = 0; d < nd; ++d) {
            for (const auto& jl : jset.at("devices").at(d).at("levels")) {
                uint32_t level = jl.at("level");
                size_t n = jl.at("super_bits");
                Bits b = hex_to_bits(jl.at("super_bits_hex").get<std::string>(), n);
                auto& dst = sbs[level][d];
                dst.insert(dst.end(), b.begin(), b.end());
                auto ks = jl.at("keys").get<std::vector<uint64_t>>();
                auto& dk = keys[level][d];
                dk.insert(dk.end(), ks.begin(), ks.end());
            }
        }
    }

    // Regeneration flip totals across every saved regen run.
    std::map<uint32_t, std::pair<uint64_t, uint64_t>> flip_totals;
    if (fs::exists(in / "regen")) {
        for (const auto& entry : fs::directory_iterator(in / "regen")) {
            ojson r = load_json_file(entry.path());
            for (const auto& t : r.at("flip_totals")) {
                flip_totals[t.at("level")].first += uint64_t(t.at("flips"));
                flip_totals[t.at("level")].second += uint64_t(t.at("bits"));
            }
        }
    }

    ojson out;
    ojson jlevels = ojson::array();
    for (uint32_t l : levels) {
        ojson jl;
        jl["level"] = l;
        double h = 0, hm = 0;
        for (const Bits& b : sbs[l]) {
            h += entropy(b);
            hm += min_entropy(b);
        }
        jl["entropy_mean"] = h / nd;
        jl["min_entropy_mean"] = hm / nd;
        InterChipResult tr = interchip_hd(sbs[l]);
        jl["interchip_hd"] = ojson{{"mean_fraction", tr.mean_fraction},
                                   {"pairings", tr.pairings},
                                   {"mean_bits_per_pair", tr.mean_bits_per_pair}};
        std::vector<KeyedBits> kb(nd);
        for (uint32_t d = 0; d < nd; ++d) kb[d] = KeyedBits{sbs[l][d], keys[l][d]};
        InterChipResult al = interchip_hd_aligned(kb);
        jl["interchip_hd_aligned"] = ojson{{"mean_fraction", al.mean_fraction},
                                           {"pairings", al.pairings},
                                           {"mean_bits_per_pair", al.mean_bits_per_pair}};
        NistPopulationResult nist = nist_battery(sbs[l], NistParams{});
        ojson jt = ojson::array();
        for (const auto& t : nist.tests)
            jt.push_back(ojson{{"name", t.name},
                               {"passed", t.passed},
                               {"skipped", t.skipped},
                               {"verdict", t.verdict}});
        jl["nist"] = ojson{{"all_pass", nist.all_pass}, {"tests", jt}};
        if (flip_totals.count(l)) {
            auto [flips, bits] = flip_totals[l];
            PofResult pof;
            pof.flips = flips;
            pof.bits_inspected = bits;
            pof.zero_flip_bound = flips == 0;
            pof.pof = flips == 0 ? 1.0 / double(bits) : double(flips) / double(bits);
            pof.exponent = std::log10(pof.pof);
            jl["pof"] = ojson{{"flips", pof.flips},
                              {"bits_inspected", pof.bits_inspected},
                              {"zero_flip_bound", pof.zero_flip_bound},
                              {"exponent", pof.exponent}};
        }
        jlevels.push_back(std::move(jl));
    }
    out["levels"] = std::move(jlevels);
    save_json_file(in / "stats.json", out);
    return out;
}

ComparisonTables compare_report_jsons(const std::vector<ojson>& reports) {
    std::vector<ExperimentReport> parsed;
    for (const ojson& j : reports) {
        ExperimentReport r;
        r.class_name = j.at("class");
        r.n_devices = j.at("n_devices");
        r.challenge_sets = j.at("challenge_sets");
        const auto& wm = j.at("wid_uctvn_mean");
        r.wid_uctvn_mean.mean_wid = wm.at("mean_wid");
        r.wid_uctvn_mean.mean_uctvn = wm.at("mean_uctvn");
        r.wid_uctvn_mean.snr = wm.at("snr");
        r.wid_uctvn_mean.n_indices = wm.at("n_indices");
        r.strong_mean_analysis = j.at("thresholds").at("strong_mean_analysis");
        for (const auto& jl : j.at("xmr_levels")) {
            XmrLevelReport l;
            l.level = jl.at("level");
            l.minsize_mean = jl.at("minsize_mean");
            l.pof.exponent = jl.at("pof").at("exponent");
            l.pof.bits_inspected = jl.at("pof").at("bits_inspected");
            l.entropy_mean = jl.at("entropy_mean");
            l.min_entropy_mean = jl.at("min_entropy_mean");
            l.interchip.mean_fraction = jl.at("interchip_hd").at("mean_fraction");
            l.interchip.pairings = jl.at("interchip_hd").at("pairings");
            l.interchip_aligned.mean_fraction = jl.at("interchip_hd_aligned").at("mean_fraction");
            l.interchip_aligned.pairings = jl.at("interchip_hd_aligned").at("pairings");
            for (const auto& jt : jl.at("nist").at("tests")) {
                NistPopulationTest t;
                t.name = jt.at("name");
                t.verdict = jt.at("verdict");
                l.nist.tests.push_back(std::move(t));
            }
            r.levels.push_back(std::move(l));
        }
        parsed.push_back(std::move(r));
    }
    return compare_classes(parsed);
}

}  // namespace sirf

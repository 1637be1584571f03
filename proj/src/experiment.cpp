#include "sirf/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "sirf/rng.hpp"
#include "sirf/util.hpp"

namespace sirf {

using ojson = nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {
constexpr uint32_t kSlabCandidates = 4096;
constexpr uint32_t kMaxEmptySlabs = 8;

PofResult pof_from_counts(uint64_t flips, uint64_t bits) {
    PofResult res;
    res.flips = flips;
    res.bits_inspected = bits;
    if (bits == 0) throw StatsError("pof: no bits inspected");
    if (flips == 0) {
        res.zero_flip_bound = true;
        res.pof = 1.0 / double(bits);
    } else {
        res.pof = double(flips) / double(bits);
    }
    res.exponent = std::log10(res.pof);
    return res;
}

void write_file(const fs::path& path, const std::string& text) {
    fs::create_directories(path.parent_path());
    std::ofstream os(path, std::ios::binary);
    if (!os) throw ExperimentError("cannot write " + path.string());
    os << text;
}

void write_bytes(const fs::path& path, const std::vector<uint8_t>& bytes) {
    fs::create_directories(path.parent_path());
    std::ofstream os(path, std::ios::binary);
    if (!os) throw ExperimentError("cannot write " + path.string());
    os.write(reinterpret_cast<const char*>(bytes.data()), std::streamsize(bytes.size()));
}

}  // namespace

void ExperimentConfig::validate() const {
    params.validate();
    if (n_devices < 2) throw ConfigError("experiment needs at least 2 devices");
    if (corners.empty()) throw ConfigError("no corners configured");
    uint32_t enroll = 0;
    for (const auto& c : corners) {
        if (c.is_enrollment()) {
            ++enroll;
            if (c.temp_c != 25.0) throw ConfigError("enrollment corner must be 25 C");
        }
    }
    if (enroll != 1) throw ConfigError("exactly one enrollment corner is required");
    if (corners.size() < 2) throw ConfigError("at least one regeneration corner is required");
    if (challenge_sets < 1) throw ConfigError("challenge_sets must be >= 1");
    if (set_size < 16) throw ConfigError("set_size must be >= 16");
    for (uint32_t l : xmr_levels)
        if (l < 3 || l % 2 == 0) throw ConfigError("xmr levels must be odd and >= 3");
}

uint32_t ExperimentConfig::enrollment_corner() const {
    for (uint32_t i = 0; i < corners.size(); ++i)
        if (corners[i].is_enrollment()) return i;
    throw ConfigError("no enrollment corner");
}

ojson ExperimentConfig::to_json() const {
    ojson jc = ojson::array();
    for (const auto& c : corners) jc.push_back({{"temp_c", c.temp_c}, {"label", c.label}});
    return ojson{{"class", params.to_json()},
                 {"n_devices", n_devices},
                 {"corners", jc},
                 {"xmr_levels", xmr_levels},
                 {"challenge_sets", challenge_sets},
                 {"set_size", set_size},
                 {"seeds",
                  {{"population", seeds.population},
                   {"challenges", seeds.challenges},
                   {"noise", seeds.noise}}},
                 {"output_dir", output_dir},
                 {"emit_soft_data", emit_soft_data},
                 {"parallel", parallel}};
}

ExperimentConfig ExperimentConfig::from_json(const ojson& j) {
    ExperimentConfig cfg;
    const auto& jcls = j.at("class");
    if (jcls.is_string())
        cfg.params = preset_by_name(jcls.get<std::string>());
    else
        cfg.params = ClassParams::from_json(jcls);
    cfg.n_devices = j.value("n_devices", 25u);
    if (j.contains("corners")) {
        cfg.corners.clear();
        for (const auto& jc : j.at("corners"))
            cfg.corners.push_back(EnvCorner{jc.at("temp_c"), jc.at("label")});
    }
    if (j.contains("xmr_levels")) cfg.xmr_levels = j.at("xmr_levels").get<std::vector<uint32_t>>();
    cfg.challenge_sets = j.value("challenge_sets", 12u);
    cfg.set_size = j.value("set_size", 2048u);
    if (j.contains("seeds")) {
        const auto& js = j.at("seeds");
        cfg.seeds.population = js.value("population", 1ull);
        cfg.seeds.challenges = js.value("challenges", 2ull);
        cfg.seeds.noise = js.value("noise", 3ull);
    }
    cfg.output_dir = j.value("output_dir", std::string());
    cfg.emit_soft_data = j.value("emit_soft_data", true);
    cfg.parallel = j.value("parallel", true);
    cfg.validate();
    return cfg;
}

uint64_t ExperimentConfig::config_hash() const {
    // Execution knobs (parallelism, artifact emission) do not change results
    // and stay out of the hash.
    ojson j = to_json();
    j.erase("output_dir");
    j.erase("emit_soft_data");
    j.erase("parallel");
    std::string s = j.dump();
    uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : s) h = (h ^ uint8_t(c)) * 0x100000001b3ULL;
    return h;
}

// ---------------------------------------------------------------------------
// ExperimentContext

ExperimentContext::ExperimentContext(const ExperimentConfig& cfg) : cfg_(cfg) {
    cfg_.validate();
    graph_ = std::make_unique<NetlistGraph>(build_netlist(cfg_.params.graph));
    auto population =
        sample_population(cfg_.params, *graph_, cfg_.n_devices, cfg_.seeds.population);
    measurer_ = std::make_unique<Measurer>(cfg_.params, *graph_, std::move(population),
                                           cfg_.corners, cfg_.seeds.challenges, cfg_.seeds.noise);
}

void ExperimentContext::refill(uint32_t need_per_polarity) {
    uint32_t empty_rounds = 0;
    while (pending_rising_.size() < need_per_polarity ||
           pending_falling_.size() < need_per_polarity) {
        CandidateBlock block = measurer_->measure_block(cursor_, kSlabCandidates, cfg_.parallel);
        cursor_ += kSlabCandidates;
        CompatibilityMask mask = select_compatible_partial(block, cfg_.params.pipeline);
        candidates_tested_ += mask.tested();
        candidates_accepted_ += mask.accepted();
        const uint32_t nc = uint32_t(block.corners.size());
        auto stash = [&](Polarity pol, const std::vector<uint8_t>& accepted,
                         std::vector<PendingCandidate>& pending) {
            for (uint32_t i = 0; i < block.count; ++i) {
                if (!accepted[i]) continue;
                PendingCandidate pc;
                pc.id = block.first_id + i;
                pc.dv.resize(size_t(block.n_devices) * nc);
                for (uint32_t d = 0; d < block.n_devices; ++d)
                    for (uint32_t c = 0; c < nc; ++c)
                        pc.dv[size_t(d) * nc + c] = block.at(d, c, pol, i);
                pending.push_back(std::move(pc));
            }
        };
        size_t before = pending_rising_.size() + pending_falling_.size();
        stash(Polarity::Rising, mask.accepted_rising, pending_rising_);
        stash(Polarity::Falling, mask.accepted_falling, pending_falling_);
        if (pending_rising_.size() + pending_falling_.size() == before) {
            if (++empty_rounds >= kMaxEmptySlabs)
                throw PipelineError("compatibility selection starves: no candidate accepted in " +
                                    std::to_string(kMaxEmptySlabs) + " consecutive slabs");
        } else {
            empty_rounds = 0;
        }
    }
}

SetData ExperimentContext::next_set() {
    const uint32_t n = cfg_.set_size;
    refill(n);
    SetData set;
    set.set_index = next_set_index_++;

    std::vector<PendingCandidate> rising(pending_rising_.begin(), pending_rising_.begin() + n);
    pending_rising_.erase(pending_rising_.begin(), pending_rising_.begin() + n);
    std::vector<PendingCandidate> falling(pending_falling_.begin(), pending_falling_.begin() + n);
    pending_falling_.erase(pending_falling_.begin(), pending_falling_.begin() + n);

    for (const auto& pc : rising) set.rising_ids.push_back(pc.id);
    for (const auto& pc : falling) set.falling_ids.push_back(pc.id);

    const uint32_t nd = cfg_.n_devices;
    const uint32_t nc = uint32_t(cfg_.corners.size());
    const uint32_t enroll_idx = cfg_.enrollment_corner();
    const PipelineParams& pp = cfg_.params.pipeline;

    set.soft.assign(nd, std::vector<SoftDataSet>(nc));
    for (uint32_t d = 0; d < nd; ++d) {
        for (uint32_t c = 0; c < nc; ++c) {
            SoftDataSet& s = set.soft[d][c];
            s.device_id = measurer_->devices()[d].device_id;
            s.corner = cfg_.corners[c];
            s.rising_id = set.rising_ids;
            s.falling_id = set.falling_ids;
            s.dvr.resize(n);
            s.dvf.resize(n);
            for (uint32_t k = 0; k < n; ++k) {
                s.dvr[k] = rising[k].dv[size_t(d) * nc + c];
                s.dvf[k] = falling[k].dv[size_t(d) * nc + c];
            }
            s.dvd = dv_diffs(s.dvr, s.dvf);
            s.dvd_c = gpev(s.dvd, pp.gpev_mu_ref, pp.gpev_spread_ref);
        }
    }

    std::vector<const std::vector<double>*> enroll_pop;
    for (uint32_t d = 0; d < nd; ++d) enroll_pop.push_back(&set.soft[d][enroll_idx].dvd_c);
    set.spread = fit_spread_factors(enroll_pop, pp.sf_epsilon);
    for (uint32_t d = 0; d < nd; ++d)
        for (uint32_t c = 0; c < nc; ++c)
            set.soft[d][c].dvd_cs = apply_spread_factors(set.soft[d][c].dvd_c, set.spread);
    return set;
}

// ---------------------------------------------------------------------------
// run_experiment

namespace {

struct LevelAccum {
    uint32_t level = 0;
    std::vector<Bits> enroll_sbs;                        // per device, concatenated
    std::vector<std::vector<uint64_t>> provenance_keys;  // per device
    std::vector<std::vector<uint64_t>> per_set_counts;   // per device
    uint64_t flips = 0;
    uint64_t bits = 0;
};

uint64_t group_key(uint32_t set_index, const XmrGroup& group,
                   const StrongBitstring& strong) {
    uint64_t h = hash_combine(0xA118BEDULL, set_index);
    for (uint32_t pos : group.carriers) h = hash_combine(h, strong.provenance[pos]);
    return h;
}

void emit_set0_artifacts(const ExperimentConfig& cfg, const SetData& set,
                         const WidUctvnResult& wu, const Measurer& measurer);
void emit_report_artifacts(const ExperimentConfig& cfg, const ExperimentReport& report);

}  // namespace

ExperimentReport run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    ExperimentContext ctx(cfg);
    const uint32_t nd = cfg.n_devices;
    const uint32_t nc = uint32_t(cfg.corners.size());
    const uint32_t enroll_idx = cfg.enrollment_corner();
    const double t_analysis = cfg.params.keygen.analysis_threshold;
    const double t_bitgen = cfg.params.keygen.bitgen_threshold;

    ExperimentReport report;
    report.class_name = cfg.params.name;
    report.config_hash = cfg.config_hash();
    report.n_devices = nd;
    report.challenge_sets = cfg.challenge_sets;
    report.analysis_threshold = t_analysis;
    report.bitgen_threshold = t_bitgen;

    std::vector<LevelAccum> levels(cfg.xmr_levels.size());
    for (size_t li = 0; li < cfg.xmr_levels.size(); ++li) {
        levels[li].level = cfg.xmr_levels[li];
        levels[li].enroll_sbs.resize(nd);
        levels[li].provenance_keys.resize(nd);
        levels[li].per_set_counts.resize(nd);
    }

    double strong_analysis_acc = 0.0, strong_bitgen_acc = 0.0;
    WidUctvnSummary mean_summary;
    for (uint32_t si = 0; si < cfg.challenge_sets; ++si) {
        SetData set = ctx.next_set();

        std::vector<std::vector<std::vector<double>>> cs(nd);
        for (uint32_t d = 0; d < nd; ++d) {
            cs[d].reserve(nc);
            for (uint32_t c = 0; c < nc; ++c) cs[d].push_back(set.soft[d][c].dvd_cs);
        }
        WidUctvnResult wu = wid_uctvn_snr(cs, cfg.corners, enroll_idx);
        mean_summary.mean_wid += wu.summary.mean_wid;
        mean_summary.mean_uctvn += wu.summary.mean_uctvn;
        mean_summary.wc_uctvn = std::max(mean_summary.wc_uctvn, wu.summary.wc_uctvn);
        if (si == 0) {
            report.wid_uctvn_set0 = wu.summary;
            emit_set0_artifacts(cfg, set, wu, ctx.measurer());
        }

        for (uint32_t d = 0; d < nd; ++d) {
            const std::vector<double>& ecs = set.soft[d][enroll_idx].dvd_cs;
            uint32_t n_analysis = 0;
            for (double v : ecs) n_analysis += std::fabs(v) > t_analysis;
            strong_analysis_acc += n_analysis;

            auto [strong, helper0] = enroll(ecs, ThresholdParams{t_bitgen});
            strong_bitgen_acc += double(strong.bits.size());
            helper0.spread_table_ref = set.spread.fingerprint();

            for (size_t li = 0; li < cfg.xmr_levels.size(); ++li) {
                uint32_t level = cfg.xmr_levels[li];
                XmrEncoded enc = xmr_encode(strong, level);
                HelperData helper = helper0;
                attach_xmr(helper, enc, level);

                LevelAccum& acc = levels[li];
                acc.per_set_counts[d].push_back(enc.super_bits.size());
                auto& sbs = acc.enroll_sbs[d];
                sbs.insert(sbs.end(), enc.super_bits.begin(), enc.super_bits.end());
                for (const XmrGroup& g : enc.groups)
                    acc.provenance_keys[d].push_back(group_key(set.set_index, g, strong));

                for (uint32_t c = 0; c < nc; ++c) {
                    if (c == enroll_idx) continue;
                    StrongBitstring regen = regenerate(set.soft[d][c].dvd_cs, helper);
                    Bits super_regen = xmr_decode(regen, helper);
                    for (size_t k = 0; k < super_regen.size(); ++k)
                        acc.flips += super_regen[k] ^ enc.super_bits[k];
                    acc.bits += super_regen.size();
                }
            }
        }
    }

    report.candidates_tested = ctx.candidates_tested();
    report.candidates_accepted = ctx.candidates_accepted();
    report.acceptance_fraction =
        double(report.candidates_accepted) / double(std::max<uint64_t>(1, report.candidates_tested));
    mean_summary.mean_wid /= double(cfg.challenge_sets);
    mean_summary.mean_uctvn /= double(cfg.challenge_sets);
    mean_summary.snr = mean_summary.mean_uctvn > 0
                           ? mean_summary.mean_wid / mean_summary.mean_uctvn
                           : 0.0;
    mean_summary.n_indices = cfg.set_size;
    mean_summary.n_devices = nd;
    mean_summary.n_corners = nc;
    report.wid_uctvn_mean = mean_summary;
    report.strong_mean_analysis = strong_analysis_acc / double(nd * cfg.challenge_sets);
    report.strong_mean_bitgen = strong_bitgen_acc / double(nd * cfg.challenge_sets);

    for (LevelAccum& acc : levels) {
        XmrLevelReport lr;
        lr.level = acc.level;
        lr.minsize_mean = smallest_bitstring(acc.per_set_counts);
        lr.pof = pof_from_counts(acc.flips, acc.bits);

        double h_acc = 0.0, hm_acc = 0.0;
        Bits pooled;
        uint64_t len_acc = 0;
        for (const Bits& b : acc.enroll_sbs) {
            h_acc += entropy(b);
            hm_acc += min_entropy(b);
            pooled.insert(pooled.end(), b.begin(), b.end());
            len_acc += b.size();
        }
        lr.entropy_mean = h_acc / double(nd);
        lr.min_entropy_mean = hm_acc / double(nd);
        lr.entropy_pooled = entropy(pooled);
        lr.min_entropy_pooled = min_entropy(pooled);
        lr.enroll_bits_per_device = len_acc / nd;

        lr.interchip = interchip_hd(acc.enroll_sbs);
        std::vector<KeyedBits> keyed(nd);
        for (uint32_t d = 0; d < nd; ++d)
            keyed[d] = KeyedBits{acc.enroll_sbs[d], acc.provenance_keys[d]};
        lr.interchip_aligned = interchip_hd_aligned(keyed);
        lr.nist = nist_battery(acc.enroll_sbs, NistParams{});
        report.levels.push_back(std::move(lr));
    }

    emit_report_artifacts(cfg, report);
    return report;
}

KeyResult assemble_key(ExperimentContext& ctx, uint32_t device_index, uint32_t target_bits,
                       uint32_t xmr_level, uint32_t max_iterations) {
    const ExperimentConfig& cfg = ctx.config();
    if (device_index >= cfg.n_devices) throw KeygenError("assemble_key: no such device");
    KeyResult res;
    if (target_bits == 0) return res;
    const uint32_t enroll_idx = cfg.enrollment_corner();
    while (res.key.size() < target_bits) {
        if (res.iterations >= max_iterations)
            throw KeygenError("assemble_key: iteration cap exceeded before reaching " +
                              std::to_string(target_bits) + " bits");
        SetData set = ctx.next_set();
        ++res.iterations;
        auto [strong, helper] =
            enroll(set.soft[device_index][enroll_idx].dvd_cs,
                   ThresholdParams{cfg.params.keygen.bitgen_threshold});
        (void)helper;
        XmrEncoded enc = xmr_encode(strong, xmr_level);
        res.key.insert(res.key.end(), enc.super_bits.begin(), enc.super_bits.end());
    }
    res.key.resize(target_bits);
    return res;
}

// ---------------------------------------------------------------------------
// Artifacts

namespace {

void emit_set0_artifacts(const ExperimentConfig& cfg, const SetData& set,
                         const WidUctvnResult& wu, const Measurer& measurer) {
    if (cfg.output_dir.empty()) return;
    fs::path out(cfg.output_dir);
    const uint32_t enroll_idx = cfg.enrollment_corner();

    {
        std::ostringstream os;
        os << "slot,wid,uctvn\n";
        for (size_t k = 0; k < wu.wid.size(); ++k)
            os << k << "," << wu.wid[k] << "," << wu.uctvn[k] << "\n";
        write_file(out / "plots" / "wid_uctvn_set0.csv", os.str());
    }
    {
        // Thresholding view for device 0: enrollment value, strong flag and
        // every regeneration corner value per slot.
        std::ostringstream os;
        os << "slot,enroll_dvd_cs,strong";
        for (uint32_t c = 0; c < set.soft[0].size(); ++c)
            if (c != enroll_idx) os << "," << cfg.corners[c].label;
        os << "\n";
        const auto& ecs = set.soft[0][enroll_idx].dvd_cs;
        for (size_t k = 0; k < ecs.size(); ++k) {
            os << k << "," << ecs[k] << ","
               << (std::fabs(ecs[k]) > cfg.params.keygen.analysis_threshold ? 1 : 0);
            for (uint32_t c = 0; c < set.soft[0].size(); ++c)
                if (c != enroll_idx) os << "," << set.soft[0][c].dvd_cs[k];
            os << "\n";
        }
        write_file(out / "plots" / "thresholding_set0.csv", os.str());
    }
    if (cfg.emit_soft_data) {
        for (uint32_t c = 0; c < set.soft[0].size(); ++c) {
            std::ostringstream name;
            name << "dev000_" << cfg.corners[c].label << ".csv";
            write_file(out / "softdata" / name.str(), set.soft[0][c].to_csv());
        }
        for (uint32_t d = 0; d < set.soft.size(); ++d) {
            std::ostringstream name;
            name << "dev" << std::setw(3) << std::setfill('0') << d << "_enrollment.csv";
            write_file(out / "softdata" / name.str(), set.soft[d][enroll_idx].to_csv());
        }
        write_file(out / "calibration" / "dev000_enrollment.csv",
                   measurer.calibration(0, enroll_idx).to_csv());
    }
    write_file(out / "sets" / "set_0000" / "spread_factors.csv", set.spread.to_csv());
    ojson sel{{"rising_ids", set.rising_ids}, {"falling_ids", set.falling_ids}};
    write_file(out / "sets" / "set_0000" / "selected.json", sel.dump(2));

    // Demonstrate the helper-data formats with device 0 material.
    const auto& ecs = set.soft[0][enroll_idx].dvd_cs;
    auto [strong, helper0] = enroll(ecs, ThresholdParams{cfg.params.keygen.bitgen_threshold});
    helper0.spread_table_ref = set.spread.fingerprint();
    for (uint32_t level : cfg.xmr_levels) {
        XmrEncoded enc = xmr_encode(strong, level);
        HelperData helper = helper0;
        attach_xmr(helper, enc, level);
        std::ostringstream base;
        base << "dev000_xmr" << level;
        write_bytes(out / "keys" / (base.str() + ".helper.bin"), helper.to_bytes());
        write_file(out / "keys" / (base.str() + ".helper.json"), helper.to_json().dump(2));
        std::ostringstream bits;
        for (uint8_t b : enc.super_bits) bits << int(b);
        write_file(out / "keys" / (base.str() + ".key.txt"), bits.str() + "\n");
    }
}

void emit_report_artifacts(const ExperimentConfig& cfg, const ExperimentReport& report) {
    if (cfg.output_dir.empty()) return;
    fs::path out(cfg.output_dir);
    write_file(out / "report.json", report.to_json().dump(2));
    ojson manifest{{"tool", "sirf-sim"},
                   {"version", "1.0.0"},
                   {"config_hash", report.config_hash},
                   {"config", cfg.to_json()}};
    write_file(out / "manifest.json", manifest.dump(2));
}

}  // namespace

// ---------------------------------------------------------------------------
// Report serialization and comparison

namespace {

ojson summary_json(const WidUctvnSummary& s) {
    return ojson{{"mean_wid", s.mean_wid},   {"mean_uctvn", s.mean_uctvn},
                 {"snr", s.snr},             {"wc_uctvn", s.wc_uctvn},
                 {"n_indices", s.n_indices}, {"n_devices", s.n_devices},
                 {"n_corners", s.n_corners}};
}

ojson interchip_json(const InterChipResult& r) {
    return ojson{{"mean_fraction", r.mean_fraction},
                 {"pooled_fraction", r.pooled_fraction},
                 {"pairings", r.pairings},
                 {"mean_bits_per_pair", r.mean_bits_per_pair},
                 {"total_bits", r.total_bits}};
}

}  // namespace

ojson ExperimentReport::to_json() const {
    ojson jl = ojson::array();
    for (const auto& l : levels) {
        ojson jn = ojson::array();
        for (const auto& t : l.nist.tests) {
            jn.push_back(ojson{{"name", t.name},
                               {"passed", t.passed},
                               {"failed", t.failed},
                               {"skipped", t.skipped},
                               {"required", t.required},
                               {"verdict", t.verdict}});
        }
        jl.push_back(ojson{{"level", l.level},
                           {"minsize_mean", l.minsize_mean},
                           {"pof",
                            {{"flips", l.pof.flips},
                             {"bits_inspected", l.pof.bits_inspected},
                             {"zero_flip_bound", l.pof.zero_flip_bound},
                             {"pof", l.pof.pof},
                             {"exponent", l.pof.exponent}}},
                           {"entropy_mean", l.entropy_mean},
                           {"min_entropy_mean", l.min_entropy_mean},
                           {"entropy_pooled", l.entropy_pooled},
                           {"min_entropy_pooled", l.min_entropy_pooled},
                           {"enroll_bits_per_device", l.enroll_bits_per_device},
                           {"interchip_hd", interchip_json(l.interchip)},
                           {"interchip_hd_aligned", interchip_json(l.interchip_aligned)},
                           {"nist", {{"n_devices", l.nist.n_devices},
                                     {"all_pass", l.nist.all_pass},
                                     {"tests", jn}}}});
    }
    return ojson{{"class", class_name},
                 {"config_hash", config_hash},
                 {"n_devices", n_devices},
                 {"challenge_sets", challenge_sets},
                 {"candidates",
                  {{"tested", candidates_tested},
                   {"accepted", candidates_accepted},
                   {"acceptance_fraction", acceptance_fraction}}},
                 {"wid_uctvn_set0", summary_json(wid_uctvn_set0)},
                 {"wid_uctvn_mean", summary_json(wid_uctvn_mean)},
                 {"thresholds",
                  {{"analysis", analysis_threshold},
                   {"bitgen", bitgen_threshold},
                   {"strong_mean_analysis", strong_mean_analysis},
                   {"strong_mean_bitgen", strong_mean_bitgen}}},
                 {"xmr_levels", jl}};
}

ComparisonTables compare_classes(const std::vector<ExperimentReport>& reports) {
    if (reports.empty()) throw ExperimentError("compare: no reports given");
    ComparisonTables tables;
    std::ostringstream os;
    os << "metric,class,xmr,value,samples\n";
    for (const auto& r : reports) {
        tables.classes.push_back(r.class_name);
        os << "mean_wid," << r.class_name << ",-," << r.wid_uctvn_mean.mean_wid << ","
           << r.wid_uctvn_mean.n_indices << "\n";
        os << "mean_uctvn," << r.class_name << ",-," << r.wid_uctvn_mean.mean_uctvn << ","
           << r.wid_uctvn_mean.n_indices << "\n";
        os << "snr," << r.class_name << ",-," << r.wid_uctvn_mean.snr << ","
           << r.wid_uctvn_mean.n_indices << "\n";
        os << "strong_mean_analysis," << r.class_name << ",-," << r.strong_mean_analysis << ","
           << (uint64_t(r.n_devices) * r.challenge_sets) << "\n";
        for (const auto& l : r.levels) {
            os << "minsize_mean," << r.class_name << "," << l.level << "," << l.minsize_mean
               << "," << r.n_devices << "\n";
            os << "pof_exponent," << r.class_name << "," << l.level << "," << l.pof.exponent
               << "," << l.pof.bits_inspected << "\n";
            os << "entropy_mean," << r.class_name << "," << l.level << "," << l.entropy_mean
               << "," << r.n_devices << "\n";
            os << "min_entropy_mean," << r.class_name << "," << l.level << ","
               << l.min_entropy_mean << "," << r.n_devices << "\n";
            os << "interchip_hd," << r.class_name << "," << l.level << ","
               << l.interchip.mean_fraction << "," << l.interchip.pairings << "\n";
            os << "interchip_hd_aligned," << r.class_name << "," << l.level << ","
               << l.interchip_aligned.mean_fraction << "," << l.interchip_aligned.pairings
               << "\n";
            uint32_t nist_pass = 0;
            for (const auto& t : l.nist.tests) nist_pass += t.verdict;
            os << "nist_tests_passed," << r.class_name << "," << l.level << "," << nist_pass
               << "," << l.nist.tests.size() << "\n";
        }
    }
    tables.csv = os.str();
    return tables;
}

}  // namespace sirf

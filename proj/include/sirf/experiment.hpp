#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sirf/fabric.hpp"
#include "sirf/keygen.hpp"
#include "sirf/measure.hpp"
#include "sirf/nist.hpp"
#include "sirf/pipeline.hpp"
#include "sirf/stats.hpp"

namespace sirf {

struct SeedConfig {
    uint64_t population = 1;
    uint64_t challenges = 2;
    uint64_t noise = 3;
};

struct ExperimentConfig {
    ClassParams params;
    uint32_t n_devices = 25;
    std::vector<EnvCorner> corners = standard_corners();
    std::vector<uint32_t> xmr_levels = {3, 5, 7, 9, 11};
    uint32_t challenge_sets = 12;
    uint32_t set_size = 2048;  // soft-data values per challenge set
    SeedConfig seeds;
    std::string output_dir;       // empty: no artifact files
    bool emit_soft_data = true;   // CSV soft data for the first challenge set
    bool parallel = true;

    void validate() const;
    uint32_t enrollment_corner() const;  // index into corners
    nlohmann::ordered_json to_json() const;
    static ExperimentConfig from_json(const nlohmann::ordered_json& j);
    uint64_t config_hash() const;
};

// One processed challenge set: index-aligned soft data for every device and
// corner, plus the public per-set metadata.
struct SetData {
    uint32_t set_index = 0;
    std::vector<uint64_t> rising_ids;   // selected candidate ids, id order
    std::vector<uint64_t> falling_ids;
    SpreadFactorTable spread;
    // soft[dev][corner]
    std::vector<std::vector<SoftDataSet>> soft;
};

// Streams challenge sets: measures candidate slabs at all corners, screens
// them for temperature compatibility (common mask across the population) and
// runs the soft-data pipeline.
class ExperimentContext {
  public:
    explicit ExperimentContext(const ExperimentConfig& cfg);

    SetData next_set();
    const ExperimentConfig& config() const { return cfg_; }
    const NetlistGraph& graph() const { return *graph_; }
    const Measurer& measurer() const { return *measurer_; }
    const std::vector<DeviceInstance>& devices() const { return measurer_->devices(); }
    uint64_t candidates_tested() const { return candidates_tested_; }
    uint64_t candidates_accepted() const { return candidates_accepted_; }

  private:
    ExperimentConfig cfg_;
    std::unique_ptr<NetlistGraph> graph_;
    std::unique_ptr<Measurer> measurer_;
    uint32_t next_set_index_ = 0;
    uint64_t cursor_ = 0;  // next unmeasured candidate id
    uint64_t candidates_tested_ = 0;
    uint64_t candidates_accepted_ = 0;
    // accepted-but-unused candidates, with their measured DVs
    struct PendingCandidate {
        uint64_t id;
        std::vector<double> dv;  // [dev * n_corners + corner]
    };
    std::vector<PendingCandidate> pending_rising_, pending_falling_;

    void refill(uint32_t need_per_polarity);
};

struct XmrLevelReport {
    uint32_t level = 0;
    double minsize_mean = 0.0;  // mean over devices of min super bits per set
    PofResult pof;
    double entropy_mean = 0.0;      // mean over devices
    double min_entropy_mean = 0.0;  // mean over devices
    double entropy_pooled = 0.0;
    double min_entropy_pooled = 0.0;
    InterChipResult interchip;          // traditional (pairs table not serialized)
    InterChipResult interchip_aligned;  // provenance-matched
    NistPopulationResult nist;
    uint64_t enroll_bits_per_device = 0;  // mean enrollment SBS length
};

struct ExperimentReport {
    std::string class_name;
    uint64_t config_hash = 0;
    uint32_t n_devices = 0;
    uint32_t challenge_sets = 0;
    uint64_t candidates_tested = 0;
    uint64_t candidates_accepted = 0;
    double acceptance_fraction = 0.0;
    WidUctvnSummary wid_uctvn_set0;
    WidUctvnSummary wid_uctvn_mean;  // averaged over challenge sets
    double analysis_threshold = 0.0;
    double strong_mean_analysis = 0.0;  // per-device strong bits at the analysis threshold
    double bitgen_threshold = 0.0;
    double strong_mean_bitgen = 0.0;
    std::vector<XmrLevelReport> levels;

    nlohmann::ordered_json to_json() const;
};

ExperimentReport run_experiment(const ExperimentConfig& cfg);

// Key assembly: iterates fresh challenge sets until `target_bits` super-strong
// bits accumulate for the device.
struct KeyResult {
    Bits key;
    uint32_t iterations = 0;
};
KeyResult assemble_key(ExperimentContext& ctx, uint32_t device_index, uint32_t target_bits,
                       uint32_t xmr_level, uint32_t max_iterations = 64);

// Class x XMR comparison tables, one CSV per metric.
struct ComparisonTables {
    std::vector<std::string> classes;
    std::string csv;  // long-format: metric,class,xmr,value,samples
};
ComparisonTables compare_classes(const std::vector<ExperimentReport>& reports);
ComparisonTables compare_report_jsons(const std::vector<nlohmann::ordered_json>& reports);

// Persistent enrollment protocol: characterizes, enrolls and saves everything
// regeneration needs (population, netlist, per-set selections and spread
// tables, public helper data) plus the enrollment bitstrings.
struct EnrollmentArtifacts {
    std::string dir;
    nlohmann::ordered_json summary;
};
EnrollmentArtifacts run_enrollment(const ExperimentConfig& cfg);

// Fresh measurement of the enrolled challenge sets at one corner (new noise
// seed), sign-only regeneration and XMR decode; writes the regenerated
// bitstrings and returns the flip report.
nlohmann::ordered_json run_regeneration(const std::string& dir, const std::string& corner_label,
                                        uint64_t noise_seed);

// Statistical battery over the bitstrings saved by enroll/regenerate runs.
nlohmann::ordered_json recompute_stats(const std::string& dir);

}  // namespace sirf

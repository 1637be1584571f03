#pragma once

#include <stdexcept>
#include <string>

namespace sirf {

// All failures carry the pipeline stage that raised them so the CLI can
// report `error [stage]: message` and exit nonzero.
class Error : public std::runtime_error {
  public:
    Error(std::string stage, const std::string& what)
        : std::runtime_error("[" + stage + "] " + what), stage_(std::move(stage)) {}
    const std::string& stage() const { return stage_; }

  private:
    std::string stage_;
};

struct ConfigError : Error {
    explicit ConfigError(const std::string& what) : Error("config", what) {}
};

struct StructuralError : Error {
    explicit StructuralError(const std::string& what) : Error("netlist", what) {}
};

struct CalibrationError : Error {
    explicit CalibrationError(const std::string& what) : Error("tdc-calibration", what) {}
};

struct MeasurementRangeError : Error {
    explicit MeasurementRangeError(const std::string& what) : Error("tdc-measure", what) {}
};

struct PipelineError : Error {
    explicit PipelineError(const std::string& what) : Error("pipeline", what) {}
};

struct KeygenError : Error {
    explicit KeygenError(const std::string& what) : Error("keygen", what) {}
};

struct StatsError : Error {
    explicit StatsError(const std::string& what) : Error("stats", what) {}
};

struct ExperimentError : Error {
    explicit ExperimentError(const std::string& what) : Error("experiment", what) {}
};

}  // namespace sirf

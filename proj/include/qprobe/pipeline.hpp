#pragma once

#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "json.hpp"
#include "qprobe/dataset.hpp"
#include "qprobe/discovery.hpp"
#include "qprobe/probing.hpp"

namespace qprobe {

struct BinarizeStep {
    std::string column;
    std::string zero_label;
    std::string one_label;
};

struct DropColumnsStep {
    std::vector<std::string> columns;
};

struct FilterRowsStep {
    std::string column;
    std::string value;
};

using PreprocessingStep = std::variant<BinarizeStep, DropColumnsStep, FilterRowsStep>;

RawDataset apply_step(const RawDataset& d, const PreprocessingStep& step);

/// Manual edit of the discovered graph before estimation.
struct GraphEdit {
    enum class Kind { Add, Remove, Reverse };
    Kind kind = Kind::Add;
    std::string from;
    std::string to;
};

/// Applies edits in order; throws ArgumentError if an edit references a
/// missing edge or node, or would create a cycle.
Dag apply_edits(const Dag& g, std::span<const GraphEdit> edits);

struct AnalysisConfig {
    std::vector<PreprocessingStep> preprocessing;
    KnowledgeSpec knowledge;
    std::pair<std::string, std::string> target;
    std::vector<ProbeSpec> probes;
    double penalty = 1.0;
    std::vector<GraphEdit> edits;
    /// Ground-truth effects per probe, recorded in the report when present.
    std::vector<double> probe_truths;
};

struct AnalysisResult {
    Cpdag pattern;
    Dag discovered;
    ValidationReport report;
};

/// Preprocessing, discovery, orientation, edits, estimation of the target and
/// every probe, validation. Errors are rethrown as PipelineError carrying the
/// failing stage.
AnalysisResult run_end_to_end(const RawDataset& data, const AnalysisConfig& cfg);

/// Same pipeline on data that needs no preprocessing.
AnalysisResult run_end_to_end(const BinaryDataset& data, const AnalysisConfig& cfg);

nlohmann::json report_to_json(const AnalysisResult& r);
std::string render_text(const AnalysisResult& r);

} // namespace qprobe

#pragma once

// Pipeline front door: structured configuration with env interpolation and a
// stable digest, run manifests with stage-level resume, line-delimited event
// logs, and orchestration of translate -> sample -> build-prefs -> evaluate
// -> report.

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "dforge/core.hpp"
#include "dforge/exec/gateway.hpp"
#include "dforge/llm/gateway.hpp"
#include "json.hpp"

namespace dforge::pipeline {

struct Diagnostic {
    enum class Severity { info, warning, error };
    Severity severity = Severity::info;
    std::string message;
};

const char* severity_tag(Diagnostic::Severity s);

class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// One structured JSON file; ${VAR} in string values interpolates from the
// environment, flag overrides take precedence over file values, and the
// digest tracks the effective configuration.
class PipelineConfig {
public:
    static PipelineConfig from_file(const std::string& path);
    static PipelineConfig from_json_text(const std::string& text, const std::string& base_dir = ".");

    // dotted key path; value parsed as JSON when possible, else kept as string
    void override_value(const std::string& key_path, const std::string& value);

    std::string digest() const;  // 16-hex-digit FNV-1a of the canonical effective config
    const nlohmann::json& raw() const { return effective_; }
    const std::string& base_dir() const { return base_dir_; }

    std::string path_value(const std::string& key_path, const std::string& fallback) const;
    nlohmann::json at(const std::string& key_path, nlohmann::json fallback) const;

private:
    nlohmann::json effective_;
    std::string base_dir_;
};

// manifest persistence; writes are write-temp-then-rename
RunManifest load_manifest(const std::string& path);
void save_manifest(const std::string& path, const RunManifest& manifest);

class PipelineRunner {
public:
    explicit PipelineRunner(PipelineConfig config);
    ~PipelineRunner();

    // Runs the requested stages in canonical order. Completed stages with an
    // unchanged config digest are skipped unless force. Exit code semantics:
    // 0 success, 1 validation failure, 2 stage failure.
    int run(const std::vector<std::string>& stages, bool force = false);

    std::vector<Diagnostic> validate();

    void set_verbose(bool verbose) { verbose_ = verbose; }

    static const std::vector<std::string>& canonical_stages();

    const std::string& out_dir() const { return out_dir_; }

private:
    struct StageOutcome {
        std::map<std::string, std::int64_t> counters;
    };

    void build_components();
    StageOutcome stage_translate();
    StageOutcome stage_sample();
    StageOutcome stage_build_prefs();
    StageOutcome stage_evaluate();
    StageOutcome stage_report();

    void log_event(const std::string& stage, nlohmann::json event);

    PipelineConfig config_;
    std::string out_dir_;
    bool verbose_ = false;
    std::unique_ptr<exec::ExecutorGateway> gateway_;
    std::shared_ptr<llm::GenerationModel> model_;
    std::unique_ptr<llm::PromptLibrary> prompts_;
    void* event_file_ = nullptr;  // FILE* for the stage currently logging
    std::string event_stage_;
};

}  // namespace dforge::pipeline

#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "hrt/nodes/planner.hpp"
#include "hrt/plan/job_plan.hpp"

namespace hrt::service {

/// A job plus the cost-model selection it asks for.
struct JobDocument {
    plan::JobPlan plan;
    nodes::CostConfig cost;
    std::optional<nodes::Variant> variant;
};

/// Parses and validates a job document. Every problem found is reported
/// with the path of the offending field; throws plan::JobError.
JobDocument parse_job(const nlohmann::json& document);
JobDocument parse_job_text(const std::string& text);
JobDocument load_job(const std::filesystem::path& path);

nlohmann::json to_json(const JobDocument& job);

}  // namespace hrt::service

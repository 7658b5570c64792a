#pragma once

#include "photogeo/manifold.hpp"
#include "photogeo/reconstruction.hpp"
#include "photogeo/scenes.hpp"

#include <filesystem>
#include <memory>
#include <optional>
#include <string>

namespace photogeo {

enum class ProjectorKind { Oracle, Replay };

struct OracleSpec
{
    /// Built-in scene name; empty when the scene comes from files.
    std::string scene;
    std::filesystem::path depth;
    std::filesystem::path albedo;
    Lighting lighting = Lighting::canonical();
    /// Default fit steps; each stage's iters2 takes precedence.
    int fit_budget = 60;
    double noise = 0.0;
    double view_learning_rate = 0.01;
    double light_learning_rate = 0.03;
};

struct RunConfig
{
    PipelineConfig pipeline;
    std::filesystem::path image;
    std::filesystem::path mask;
    std::filesystem::path ground_truth;
    /// Relative to the config file unless absolute.
    std::filesystem::path output = "out";
    /// Size of a built-in scene when no input image is given.
    int width = 64;
    int height = 64;
    ProjectorKind projector = ProjectorKind::Oracle;
    OracleSpec oracle;
    std::filesystem::path replay_dir;
    /// 0 leaves the thread count to the command line or the environment.
    int threads = 0;
};

/// Parses a JSON document. Relative paths are resolved against `base_dir`. Unknown keys
/// and ill-typed values raise ErrorCode::Config with the offending key in the message.
RunConfig parse_run_config(const std::string& text, const std::filesystem::path& base_dir = {});
RunConfig load_run_config(const std::filesystem::path& path);

/// Everything a run needs, loaded from disk or generated.
struct RunInputs
{
    Image image;
    std::optional<Mask> mask;
    std::optional<DepthMap> ground_truth;
    std::unique_ptr<ManifoldProjector> projector;
};

/// Checks that every file the run will read exists, in the order they would be read,
/// and reports the first missing one. Runs before any computation.
void validate_paths(const RunConfig& config);

RunInputs prepare_inputs(const RunConfig& config);

} // namespace photogeo

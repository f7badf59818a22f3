#pragma once

#include "kgci/monte_carlo.hpp"
#include "kgci/optimizer.hpp"
#include "kgci/performance.hpp"
#include "kgci/regression.hpp"
#include "kgci/spline_family.hpp"
#include "kgci/theory_bounds.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace kgci::io {

using nlohmann::json;
namespace fs = std::filesystem;

/// Parses a JSON file; syntax errors become ConfigError with line and column.
json read_json(const fs::path& path);
void write_json(const fs::path& path, const json& value);

struct ProblemFile {
    regression::RegressionProblem problem;
    double alpha = 0.05;
};

ProblemFile problem_from_json(const json& j);
ProblemFile read_problem(const fs::path& path);

json family_to_json(const IntervalFamily& family);
IntervalFamily family_from_json(const json& j);
IntervalFamily read_family(const fs::path& path);

/// A config file may give "m" or "rho" as arrays; each combination is one run.
struct OptimizeRun {
    std::string label;
    optim::OptimizationConfig config;
};

struct OptimizeFile {
    std::vector<OptimizeRun> runs;
    /// Upper end of the gamma axis of the exported curves.
    double plot_gamma_max = 0.0;
    std::uint64_t seed = 0;
};

OptimizeFile optimize_from_json(const json& j, const fs::path& base_dir);

json report_to_json(const optim::OptimizationReport& report, const optim::OptimizationConfig& config);

struct SimulateFile {
    mc::SimulationSpec spec;
    std::vector<double> gamma_grid;
};

SimulateFile simulate_from_json(const json& j, const fs::path& base_dir);

/// Response vector: one number per line; a non-numeric first line is taken as a header.
Eigen::VectorXd read_response(const fs::path& path);

std::string format_double(double v);

void write_family_csv(const fs::path& path, const IntervalFamily& family, int points = 401);
void write_curves_csv(const fs::path& path, const performance::PerformanceCurve& curve);
void write_bounds_csv(const fs::path& path, const std::vector<bounds::BoundResult>& rows);
void write_simulation_csv(const fs::path& path, const std::vector<mc::SimulationReport>& rows);

struct Series {
    std::string name;
    std::vector<double> x;
    std::vector<double> y;
};

struct LinePlot {
    std::string title;
    std::string x_label;
    std::string y_label;
    std::vector<Series> series;
    /// Optional horizontal reference line.
    std::optional<double> reference;
};

std::string render_svg(const LinePlot& plot, int width = 640, int height = 420);
void write_svg(const fs::path& path, const LinePlot& plot);

/// b(x), s(x), c(gamma), e^2(gamma) panels for one family.
void write_family_plots(const fs::path& dir, const IntervalFamily& family,
                        const performance::PerformanceCurve& curve, const std::string& title);

struct RunManifest {
    std::string command;
    std::string config_path;
    std::string output_dir;
    std::string tool_version;
    std::string timestamp;
    std::uint64_t seed = 0;
};

RunManifest make_manifest(const std::string& command, const std::string& config_path,
                          const std::string& output_dir, std::uint64_t seed);
void write_manifest(const fs::path& dir, const RunManifest& manifest);

}  // namespace kgci::io

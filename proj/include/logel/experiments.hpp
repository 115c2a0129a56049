#pragma once

#include <string>
#include <vector>

#include "logel/evaluation.hpp"
#include "logel/io.hpp"

namespace logel {

/// Reward of the point task: a strong position penalty and a mild effort penalty.
VectorXd point_true_weights();

GridworldSetup make_gridworld_task(const EnvironmentSpec& spec);
LinearPointEnv make_point_task(const EnvironmentSpec& spec);

TabularRun simulate_gridworld(const ExperimentConfig& config);
ContinuousRun simulate_point(const ExperimentConfig& config);

/// Run the observer on a stored run. Oracle parameters, rates and Jacobians
/// are taken from the run (or the MDP) only when the observer spec asks.
ObserverOutput observe_run(const ExperimentConfig& config, const TabularRun& run);
ObserverOutput observe_run(const ExperimentConfig& config, const ContinuousRun& run);

/// One metrics row: weight error, the learner's final return, and (when
/// eval.retrain is on) the retrained observer's final return and score.
/// Without retraining the last two columns are NaN.
MetricRow evaluate_run(const ExperimentConfig& config, const TabularRun& run, const ObserverOutput& observed,
                       std::uint64_t seed);
MetricRow evaluate_run(const ExperimentConfig& config, const ContinuousRun& run,
                       const ObserverOutput& observed, std::uint64_t seed);

enum class Figure { Fig1Batch, Fig1Steps, Fig3 };

std::string to_string(Figure figure);
Figure parse_figure(const std::string& name);

/// One simulate -> observe -> evaluate cell.
MetricRow run_cell(const ExperimentConfig& config);

/// Settings of the figure-1 regime: a learner stepping along exact
/// gradients, an observer that knows the parameters and rates and estimates
/// the Jacobians from the recorded trajectories.
ExperimentConfig fig1_config(const ExperimentConfig& base, int m, int n);
/// Figure-3 regime: m = 10, n = 50, unit learner steps, and the full pipeline
/// (cloning, estimated Jacobians, unknown rates).
ExperimentConfig fig3_config(const ExperimentConfig& base, LearnerAlgorithm algorithm);

struct Panel {
  std::string name;
  ExperimentConfig config;  ///< settings shared by the panel's cells (seed = master seed)
  std::vector<MetricRow> rows;
};

/// Every cell of a figure sweep, seeds master, master + 1, ...
std::vector<Panel> reproduce(Figure figure, const ExperimentConfig& base, int seeds);

}  // namespace logel

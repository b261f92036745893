#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "viewset/diffusion.hpp"
#include "viewset/io.hpp"
#include "viewset/plan.hpp"

namespace viewset {

/// A seeded sampling study: execute a plan repeatedly over a Gaussian toy
/// scene and measure how far each view's sampled marginal drifts from the
/// exact conditional given the observations.
struct ExperimentSpec {
    GenerationPlan plan;
    std::vector<PosedView> trajectory;  // must cover every plan view

    double scene_mean = 0.0;
    double scene_sigma = 1.0;
    double scene_length_scale = 1.0;
    int scene_dim = 4;

    int steps = 1000;
    double beta_start = 1e-4;
    double beta_end = 0.02;

    std::vector<std::uint64_t> seeds;
    std::size_t samples = 2000;

    // Conditioning-window truncation; unset means the exact denoiser.
    std::optional<std::size_t> window;

    // Observed values; when empty they are drawn once from the scene prior.
    std::map<std::string, Eigen::VectorXd> observations;
    std::uint64_t observation_seed = 0;
};

struct ExperimentRow {
    std::uint64_t seed = 0;
    std::string view_id;
    int depth = 0;
    double marginal_kl = 0.0;
};

/// Rows are ordered by seed, then by view id. Deterministic given the spec.
std::vector<ExperimentRow> run_experiment(const ExperimentSpec& spec);

/// Draws the observed views' values jointly from the scene prior.
std::map<std::string, Eigen::VectorXd> draw_observations(
    const ToySceneModel& scene, const std::vector<std::string>& observed_ids,
    std::uint64_t seed);

void write_experiment_csv(const std::vector<ExperimentRow>& rows, std::ostream& out);

}  // namespace viewset

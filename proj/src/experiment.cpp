#include "viewset/experiment.hpp"

#include <iomanip>
#include <ostream>
#include <stdexcept>

namespace viewset {

namespace {

// Distinct, reproducible per-draw seeds from (seed, draw index).
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t draw) {
    std::uint64_t x = seed + 0x9E3779B97F4A7C15ULL * (draw + 1);
    x ^= x >> 30;
    x *= 0xBF58476D1CE4E5B9ULL;
    x ^= x >> 27;
    x *= 0x94D049BB133111EBULL;
    x ^= x >> 31;
    return x;
}

}  // namespace

std::map<std::string, Eigen::VectorXd> draw_observations(
    const ToySceneModel& scene, const std::vector<std::string>& observed_ids,
    std::uint64_t seed) {
    std::map<std::string, Eigen::VectorXd> observations;
    if (observed_ids.empty()) return observations;

    const auto n = static_cast<Eigen::Index>(observed_ids.size());
    Eigen::MatrixXd cov(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            cov(i, j) = scene.covariance()(scene.index_of(observed_ids[i]),
                                           scene.index_of(observed_ids[j]));
        }
    }
    const Eigen::MatrixXd root = Eigen::LLT<Eigen::MatrixXd>(cov).matrixL();

    NoiseStream noise(seed);
    Eigen::MatrixXd draws(n, scene.dim());
    for (int d = 0; d < scene.dim(); ++d) {
        draws.col(d) = scene.mean() * Eigen::VectorXd::Ones(n) +
                       root * noise.normal_vector(static_cast<int>(n));
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        observations[observed_ids[i]] = draws.row(i).transpose();
    }
    return observations;
}

std::vector<ExperimentRow> run_experiment(const ExperimentSpec& spec) {
    const DepthReport depth_report = depth(spec.plan);

    std::vector<std::string> ids;
    std::vector<Camera> poses;
    std::map<std::string, Camera> cameras;
    for (const PosedView& view : spec.trajectory) {
        ids.push_back(view.id);
        poses.push_back(view.camera);
        cameras.emplace(view.id, view.camera);
    }
    for (const auto& [id, view] : spec.plan.views) {
        if (!cameras.count(id)) {
            throw std::invalid_argument("plan view missing from trajectory: " + id);
        }
    }

    const ToySceneModel scene =
        build_toy_scene(ids, poses, spec.scene_mean, spec.scene_sigma,
                        spec.scene_length_scale, spec.scene_dim);
    const DiffusionSchedule schedule =
        build_schedule(spec.steps, spec.beta_start, spec.beta_end);

    std::vector<std::string> observed_ids;
    for (const auto& [id, view] : spec.plan.views) {
        if (view.role == ViewRole::Observed) observed_ids.push_back(id);
    }
    std::map<std::string, Eigen::VectorXd> observations = spec.observations;
    if (observations.empty()) {
        observations = draw_observations(scene, observed_ids, spec.observation_seed);
    }

    std::shared_ptr<SetDenoiser> denoiser = analytic_denoiser(scene, schedule);
    if (spec.window) {
        denoiser = truncate_conditioning(denoiser, *spec.window, cameras);
    }

    std::vector<ExperimentRow> rows;
    for (std::uint64_t seed : spec.seeds) {
        std::vector<std::map<std::string, Eigen::VectorXd>> samples;
        samples.reserve(spec.samples);
        for (std::size_t draw = 0; draw < spec.samples; ++draw) {
            samples.push_back(execute_plan(spec.plan, *denoiser, observations,
                                           schedule, mix_seed(seed, draw)));
        }
        const DivergenceReport report =
            gaussian_divergence(samples, scene, observations);
        for (const auto& [id, kl] : report.marginal_kl) {
            rows.push_back(ExperimentRow{seed, id, depth_report.depth.at(id), kl});
        }
    }
    return rows;
}

void write_experiment_csv(const std::vector<ExperimentRow>& rows, std::ostream& out) {
    out << "seed,view,depth,marginal_kl\n";
    out << std::setprecision(17);
    for (const ExperimentRow& row : rows) {
        out << row.seed << ',' << row.view_id << ',' << row.depth << ','
            << row.marginal_kl << '\n';
    }
}

}  // namespace viewset

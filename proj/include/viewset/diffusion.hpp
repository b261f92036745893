#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "viewset/geometry.hpp"
#include "viewset/plan.hpp"

namespace viewset {

/// Forward-process coefficient tables: beta(t) and alpha(t) for t in [1, T],
/// alpha_bar(t) for t in [0, T] with alpha_bar(0) = 1.
class DiffusionSchedule {
public:
    DiffusionSchedule(std::vector<double> beta);

    int steps() const { return static_cast<int>(beta_.size()); }
    double beta(int t) const;
    double alpha(int t) const;
    double alpha_bar(int t) const;

private:
    std::vector<double> beta_;
    std::vector<double> alpha_;
    std::vector<double> alpha_bar_;  // index t, size T + 1
};

/// Linearly spaced beta schedule over `steps` steps.
DiffusionSchedule build_schedule(int steps, double beta_start, double beta_end);

/// Deterministic stream of standard normal draws.
class NoiseStream {
public:
    explicit NoiseStream(std::uint64_t seed) : engine_(seed) {}
    double normal() { return dist_(engine_); }
    Eigen::VectorXd normal_vector(int dim);

private:
    std::mt19937_64 engine_;
    std::normal_distribution<double> dist_;
};

/// Per-view sampler state; time 0 marks a conditioning view whose value is
/// held fixed through the reverse process.
struct ViewState {
    std::string id;
    Eigen::VectorXd value;
    int time = 0;
};

/// Forward noising in closed form: sqrt(abar_t) x0 + sqrt(1 - abar_t) eps.
Eigen::VectorXd q_sample(const Eigen::VectorXd& x0, int t,
                         const Eigen::VectorXd& eps,
                         const DiffusionSchedule& schedule);

/// One reverse step from x_t to x_{t-1} given a noise estimate. The noise
/// scale is sigma_t = sqrt(beta_t); zeta is ignored at t = 1 so the final
/// step is deterministic.
Eigen::VectorXd reverse_step(const Eigen::VectorXd& x_t,
                             const Eigen::VectorXd& eps_hat, int t,
                             const Eigen::VectorXd& zeta,
                             const DiffusionSchedule& schedule);

/// Permutation-invariant noise estimator over a set of view states. Returns
/// one estimate per view with time > 0, in input order; conditioning views
/// receive none. Implementations carry their own geometry.
class SetDenoiser {
public:
    virtual ~SetDenoiser() = default;
    virtual std::vector<Eigen::VectorXd> estimate_noise(
        const std::vector<ViewState>& views) const = 0;
    virtual int value_dim() const = 0;
};

/// Runs the reverse process over one view set. Views with time > 0 are
/// (re)initialized from the standard normal at time T and denoised down to
/// t = 0; views with time 0 pass through bit-identical. Noise is drawn in
/// view order, initial draws first and then one zeta per generated view per
/// step, so outputs are deterministic given the stream's seed.
std::vector<ViewState> sample_set(const SetDenoiser& denoiser,
                                  std::vector<ViewState> views,
                                  const DiffusionSchedule& schedule,
                                  NoiseStream& noise);

/// Executes a validated plan stage by stage: each stage runs sample_set with
/// its generate set, conditioned on observed or previously generated values.
/// Returns the full id -> value map.
std::map<std::string, Eigen::VectorXd> execute_plan(
    const GenerationPlan& plan, const SetDenoiser& denoiser,
    const std::map<std::string, Eigen::VectorXd>& observations,
    const DiffusionSchedule& schedule, std::uint64_t seed);

/// Gaussian toy scene over posed views: per-dimension covariance
/// k(i, j) = sigma^2 exp(-|tau_i - tau_j|^2 / (2 l^2)), dimensions i.i.d.
class ToySceneModel {
public:
    ToySceneModel(std::vector<std::string> ids, std::vector<Camera> poses,
                  double mean, double sigma, double length_scale, int dim,
                  Eigen::MatrixXd covariance);

    const std::vector<std::string>& ids() const { return ids_; }
    const std::vector<Camera>& poses() const { return poses_; }
    double mean() const { return mean_; }
    double sigma() const { return sigma_; }
    double length_scale() const { return length_scale_; }
    int dim() const { return dim_; }
    const Eigen::MatrixXd& covariance() const { return covariance_; }
    std::size_t index_of(const std::string& id) const;

private:
    std::vector<std::string> ids_;
    std::vector<Camera> poses_;
    double mean_, sigma_, length_scale_;
    int dim_;
    Eigen::MatrixXd covariance_;
    std::map<std::string, std::size_t> index_;
};

ToySceneModel build_toy_scene(const std::vector<std::string>& ids,
                              const std::vector<Camera>& poses, double mean,
                              double sigma, double length_scale, int dim);

/// Exact conditional of a scene block given observed values. `covariance`
/// is shared across the independent dimensions; `mean` is n_views x dim.
struct ConditionalGaussian {
    std::vector<std::string> ids;
    Eigen::MatrixXd mean;
    Eigen::MatrixXd covariance;
};

ConditionalGaussian conditional_moments(
    const ToySceneModel& scene, const std::vector<std::string>& generate_ids,
    const std::map<std::string, Eigen::VectorXd>& conditioning);

/// Optimal noise estimator for a Gaussian scene. Conditioning views are read
/// off the call's view set (time 0), so one instance serves every stage of a
/// plan execution.
std::shared_ptr<SetDenoiser> analytic_denoiser(ToySceneModel scene,
                                               DiffusionSchedule schedule);

/// Wraps a denoiser so that only the `window` conditioning views closest to
/// the centroid of the generated cameras survive; window 0 drops them all.
std::shared_ptr<SetDenoiser> truncate_conditioning(
    std::shared_ptr<const SetDenoiser> inner, std::size_t window,
    std::map<std::string, Camera> cameras);

/// KL(N(mean_fit, var_fit) || N(mean_true, var_true)) between scalar
/// Gaussians.
double gaussian_kl(double mean_fit, double var_fit, double mean_true,
                   double var_true);

struct DivergenceReport {
    std::map<std::string, double> marginal_kl;  // averaged over dimensions
    double max_abs_mean_error = 0.0;
    double max_abs_variance_error = 0.0;
};

/// Fits per-view Gaussian moments to joint draws and compares them against
/// the scene's exact conditional marginals. Needs at least 1000 draws.
DivergenceReport gaussian_divergence(
    const std::vector<std::map<std::string, Eigen::VectorXd>>& samples,
    const ToySceneModel& scene,
    const std::map<std::string, Eigen::VectorXd>& conditioning);

}  // namespace viewset

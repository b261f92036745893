#include "viewset/diffusion.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace viewset {

DiffusionSchedule::DiffusionSchedule(std::vector<double> beta)
    : beta_(std::move(beta)) {
    if (beta_.empty()) {
        throw std::invalid_argument("schedule needs at least one step");
    }
    alpha_.reserve(beta_.size());
    alpha_bar_.reserve(beta_.size() + 1);
    alpha_bar_.push_back(1.0);
    for (double b : beta_) {
        if (!(b > 0.0 && b < 1.0)) {
            throw std::invalid_argument("beta values must lie in (0, 1)");
        }
        alpha_.push_back(1.0 - b);
        alpha_bar_.push_back(alpha_bar_.back() * alpha_.back());
    }
}

double DiffusionSchedule::beta(int t) const {
    if (t < 1 || t > steps()) throw std::out_of_range("beta(t): t out of range");
    return beta_[t - 1];
}

double DiffusionSchedule::alpha(int t) const {
    if (t < 1 || t > steps()) throw std::out_of_range("alpha(t): t out of range");
    return alpha_[t - 1];
}

double DiffusionSchedule::alpha_bar(int t) const {
    if (t < 0 || t > steps()) throw std::out_of_range("alpha_bar(t): t out of range");
    return alpha_bar_[t];
}

DiffusionSchedule build_schedule(int steps, double beta_start, double beta_end) {
    if (steps < 1) {
        throw std::invalid_argument("schedule needs at least one step");
    }
    if (!(beta_start > 0.0) || !(beta_start <= beta_end) || !(beta_end < 1.0)) {
        throw std::invalid_argument("need 0 < beta_start <= beta_end < 1");
    }
    std::vector<double> beta(steps);
    if (steps == 1) {
        beta[0] = beta_start;
    } else {
        for (int i = 0; i < steps; ++i) {
            beta[i] = beta_start + (beta_end - beta_start) * i / (steps - 1);
        }
    }
    return DiffusionSchedule(std::move(beta));
}

Eigen::VectorXd NoiseStream::normal_vector(int dim) {
    Eigen::VectorXd v(dim);
    for (int i = 0; i < dim; ++i) v[i] = normal();
    return v;
}

Eigen::VectorXd q_sample(const Eigen::VectorXd& x0, int t,
                         const Eigen::VectorXd& eps,
                         const DiffusionSchedule& schedule) {
    const double abar = schedule.alpha_bar(t);
    return std::sqrt(abar) * x0 + std::sqrt(1.0 - abar) * eps;
}

Eigen::VectorXd reverse_step(const Eigen::VectorXd& x_t,
                             const Eigen::VectorXd& eps_hat, int t,
                             const Eigen::VectorXd& zeta,
                             const DiffusionSchedule& schedule) {
    const double alpha = schedule.alpha(t);
    const double abar = schedule.alpha_bar(t);
    Eigen::VectorXd mean =
        (x_t - ((1.0 - alpha) / std::sqrt(1.0 - abar)) * eps_hat) / std::sqrt(alpha);
    if (t > 1) {
        mean += std::sqrt(schedule.beta(t)) * zeta;
    }
    return mean;
}

std::vector<ViewState> sample_set(const SetDenoiser& denoiser,
                                  std::vector<ViewState> views,
                                  const DiffusionSchedule& schedule,
                                  NoiseStream& noise) {
    std::vector<std::size_t> generated;
    for (std::size_t i = 0; i < views.size(); ++i) {
        if (views[i].time != 0) generated.push_back(i);
    }
    if (generated.empty()) return views;

    const int dim = denoiser.value_dim();
    const int steps = schedule.steps();
    for (std::size_t g : generated) {
        views[g].value = noise.normal_vector(dim);
        views[g].time = steps;
    }

    std::vector<Eigen::VectorXd> estimates;
    const Eigen::VectorXd no_noise = Eigen::VectorXd::Zero(dim);
    for (int t = steps; t >= 1; --t) {
        for (std::size_t g : generated) views[g].time = t;
        estimates = denoiser.estimate_noise(views);
        if (estimates.size() != generated.size()) {
            throw std::runtime_error("denoiser returned wrong number of estimates");
        }
        for (std::size_t k = 0; k < generated.size(); ++k) {
            const Eigen::VectorXd zeta = t > 1 ? noise.normal_vector(dim) : no_noise;
            ViewState& view = views[generated[k]];
            view.value = reverse_step(view.value, estimates[k], t, zeta, schedule);
        }
    }
    for (std::size_t g : generated) views[g].time = 0;
    return views;
}

std::map<std::string, Eigen::VectorXd> execute_plan(
    const GenerationPlan& plan, const SetDenoiser& denoiser,
    const std::map<std::string, Eigen::VectorXd>& observations,
    const DiffusionSchedule& schedule, std::uint64_t seed) {
    const std::vector<Violation> violations = validate(plan);
    if (!violations.empty()) {
        throw std::invalid_argument("invalid plan: " + violations.front().message);
    }
    std::map<std::string, Eigen::VectorXd> values;
    for (const auto& [id, view] : plan.views) {
        if (view.role == ViewRole::Observed) {
            auto it = observations.find(id);
            if (it == observations.end()) {
                throw std::invalid_argument("missing observation for view: " + id);
            }
            values[id] = it->second;
        }
    }

    NoiseStream noise(seed);
    for (const Stage& stage : plan.stages) {
        std::vector<ViewState> views;
        views.reserve(stage.condition.size() + stage.generate.size());
        for (const std::string& id : stage.condition) {
            views.push_back(ViewState{id, values.at(id), 0});
        }
        for (const std::string& id : stage.generate) {
            views.push_back(ViewState{id, Eigen::VectorXd(), schedule.steps()});
        }
        views = sample_set(denoiser, std::move(views), schedule, noise);
        for (std::size_t i = stage.condition.size(); i < views.size(); ++i) {
            values[views[i].id] = views[i].value;
        }
    }
    return values;
}

ToySceneModel::ToySceneModel(std::vector<std::string> ids,
                             std::vector<Camera> poses, double mean,
                             double sigma, double length_scale, int dim,
                             Eigen::MatrixXd covariance)
    : ids_(std::move(ids)), poses_(std::move(poses)), mean_(mean), sigma_(sigma),
      length_scale_(length_scale), dim_(dim), covariance_(std::move(covariance)) {
    for (std::size_t i = 0; i < ids_.size(); ++i) {
        if (!index_.emplace(ids_[i], i).second) {
            throw std::invalid_argument("duplicate scene view id: " + ids_[i]);
        }
    }
}

std::size_t ToySceneModel::index_of(const std::string& id) const {
    auto it = index_.find(id);
    if (it == index_.end()) {
        throw std::invalid_argument("unknown scene view id: " + id);
    }
    return it->second;
}

ToySceneModel build_toy_scene(const std::vector<std::string>& ids,
                              const std::vector<Camera>& poses, double mean,
                              double sigma, double length_scale, int dim) {
    if (ids.size() != poses.size()) {
        throw std::invalid_argument("one id per pose required");
    }
    if (!(sigma > 0.0) || !(length_scale > 0.0)) {
        throw std::invalid_argument("sigma and length scale must be positive");
    }
    if (dim < 1) {
        throw std::invalid_argument("dimension must be positive");
    }
    const auto n = static_cast<Eigen::Index>(poses.size());
    Eigen::MatrixXd cov(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const Eigen::Vector3d ci = camera_center(poses[i]);
        for (Eigen::Index j = 0; j <= i; ++j) {
            const double d2 = (ci - camera_center(poses[j])).squaredNorm();
            const double k =
                sigma * sigma * std::exp(-d2 / (2.0 * length_scale * length_scale));
            cov(i, j) = k;
            cov(j, i) = k;
        }
    }
    if (Eigen::LLT<Eigen::MatrixXd>(cov).info() != Eigen::Success) {
        cov.diagonal().array() += 1e-9;
        if (Eigen::LLT<Eigen::MatrixXd>(cov).info() != Eigen::Success) {
            throw std::runtime_error("scene covariance is not positive definite");
        }
    }
    return ToySceneModel(ids, poses, mean, sigma, length_scale, dim, std::move(cov));
}

ConditionalGaussian conditional_moments(
    const ToySceneModel& scene, const std::vector<std::string>& generate_ids,
    const std::map<std::string, Eigen::VectorXd>& conditioning) {
    const auto n_gen = static_cast<Eigen::Index>(generate_ids.size());
    const auto n_cond = static_cast<Eigen::Index>(conditioning.size());
    const int dim = scene.dim();

    std::vector<std::size_t> gen_idx;
    gen_idx.reserve(generate_ids.size());
    for (const std::string& id : generate_ids) gen_idx.push_back(scene.index_of(id));

    std::vector<std::size_t> cond_idx;
    Eigen::MatrixXd cond_values(n_cond, dim);
    Eigen::Index row = 0;
    for (const auto& [id, value] : conditioning) {
        if (value.size() != dim) {
            throw std::invalid_argument("conditioning value dimension mismatch: " + id);
        }
        cond_idx.push_back(scene.index_of(id));
        cond_values.row(row++) = value.transpose();
    }

    ConditionalGaussian result;
    result.ids = generate_ids;
    const Eigen::MatrixXd& cov = scene.covariance();

    Eigen::MatrixXd sigma_gg(n_gen, n_gen);
    for (Eigen::Index i = 0; i < n_gen; ++i) {
        for (Eigen::Index j = 0; j < n_gen; ++j) {
            sigma_gg(i, j) = cov(gen_idx[i], gen_idx[j]);
        }
    }

    if (n_cond == 0) {
        result.mean = Eigen::MatrixXd::Constant(n_gen, dim, scene.mean());
        result.covariance = std::move(sigma_gg);
        return result;
    }

    Eigen::MatrixXd sigma_gc(n_gen, n_cond);
    Eigen::MatrixXd sigma_cc(n_cond, n_cond);
    for (Eigen::Index i = 0; i < n_gen; ++i) {
        for (Eigen::Index j = 0; j < n_cond; ++j) {
            sigma_gc(i, j) = cov(gen_idx[i], cond_idx[j]);
        }
    }
    for (Eigen::Index i = 0; i < n_cond; ++i) {
        for (Eigen::Index j = 0; j < n_cond; ++j) {
            sigma_cc(i, j) = cov(cond_idx[i], cond_idx[j]);
        }
    }

    const Eigen::LLT<Eigen::MatrixXd> llt(sigma_cc);
    if (llt.info() != Eigen::Success) {
        throw std::runtime_error("conditioning covariance is not positive definite");
    }
    const Eigen::MatrixXd gain = llt.solve(sigma_gc.transpose()).transpose();
    result.mean = Eigen::MatrixXd::Constant(n_gen, dim, scene.mean()) +
                  gain * (cond_values.array() - scene.mean()).matrix();
    result.covariance = sigma_gg - gain * sigma_gc.transpose();
    return result;
}

namespace {

class AnalyticDenoiser final : public SetDenoiser {
public:
    AnalyticDenoiser(ToySceneModel scene, DiffusionSchedule schedule)
        : scene_(std::move(scene)), schedule_(std::move(schedule)) {}

    int value_dim() const override { return scene_.dim(); }

    std::vector<Eigen::VectorXd> estimate_noise(
        const std::vector<ViewState>& views) const override {
        refresh_cache(views);

        const auto n_gen = static_cast<Eigen::Index>(cache_.gen_ids.size());
        const int dim = scene_.dim();
        int t = -1;
        Eigen::MatrixXd x(n_gen, dim);
        Eigen::Index g = 0;
        for (const ViewState& view : views) {
            if (view.time == 0) continue;
            if (t == -1) {
                t = view.time;
            } else if (view.time != t) {
                throw std::invalid_argument("generated views must share one time step");
            }
            if (view.value.size() != dim) {
                throw std::invalid_argument("view value dimension mismatch: " + view.id);
            }
            x.row(g++) = view.value.transpose();
        }
        if (t < 1 || t > schedule_.steps()) {
            throw std::out_of_range("view time outside the schedule");
        }

        const double abar = schedule_.alpha_bar(t);
        const double root_abar = std::sqrt(abar);

        // E[z | x_t] = mu + sqrt(abar) S (abar S + (1 - abar) I)^-1 (x - sqrt(abar) mu)
        Eigen::MatrixXd m = abar * cache_.sigma_bar;
        m.diagonal().array() += 1.0 - abar;
        const Eigen::MatrixXd centered = x - root_abar * cache_.mean;
        const Eigen::MatrixXd posterior =
            cache_.mean +
            root_abar * cache_.sigma_bar * Eigen::LLT<Eigen::MatrixXd>(m).solve(centered);
        const Eigen::MatrixXd eps =
            (x - root_abar * posterior) / std::sqrt(1.0 - abar);

        std::vector<Eigen::VectorXd> estimates;
        estimates.reserve(cache_.gen_ids.size());
        for (Eigen::Index i = 0; i < n_gen; ++i) {
            estimates.push_back(eps.row(i).transpose());
        }
        return estimates;
    }

private:
    struct Cache {
        bool valid = false;
        std::vector<std::string> gen_ids;
        std::vector<std::string> cond_ids;
        Eigen::MatrixXd sigma_bar;
        Eigen::MatrixXd mean;
    };

    // The conditional prior depends only on the id split and the conditioning
    // values, both constant across the steps of one stage; rebuild it only
    // when the set composition changes.
    void refresh_cache(const std::vector<ViewState>& views) const {
        if (cache_.valid && matches_cache(views)) return;

        cache_.gen_ids.clear();
        cache_.cond_ids.clear();
        std::map<std::string, Eigen::VectorXd> conditioning;
        for (const ViewState& view : views) {
            if (view.time == 0) {
                cache_.cond_ids.push_back(view.id);
                conditioning[view.id] = view.value;
            } else {
                cache_.gen_ids.push_back(view.id);
            }
        }
        if (cache_.gen_ids.empty()) {
            throw std::invalid_argument("no generated views in denoiser input");
        }
        ConditionalGaussian conditional =
            conditional_moments(scene_, cache_.gen_ids, conditioning);
        cache_.sigma_bar = std::move(conditional.covariance);
        cache_.mean = std::move(conditional.mean);
        cache_.valid = true;
    }

    bool matches_cache(const std::vector<ViewState>& views) const {
        std::size_t gi = 0, ci = 0;
        for (const ViewState& view : views) {
            if (view.time == 0) {
                if (ci >= cache_.cond_ids.size() || cache_.cond_ids[ci] != view.id) {
                    return false;
                }
                ++ci;
            } else {
                if (gi >= cache_.gen_ids.size() || cache_.gen_ids[gi] != view.id) {
                    return false;
                }
                ++gi;
            }
        }
        return gi == cache_.gen_ids.size() && ci == cache_.cond_ids.size();
    }

    ToySceneModel scene_;
    DiffusionSchedule schedule_;
    mutable Cache cache_;
};

class TruncatedDenoiser final : public SetDenoiser {
public:
    TruncatedDenoiser(std::shared_ptr<const SetDenoiser> inner, std::size_t window,
                      std::map<std::string, Camera> cameras)
        : inner_(std::move(inner)), window_(window), cameras_(std::move(cameras)) {}

    int value_dim() const override { return inner_->value_dim(); }

    std::vector<Eigen::VectorXd> estimate_noise(
        const std::vector<ViewState>& views) const override {
        std::size_t conditioners = 0;
        Eigen::Vector3d centroid = Eigen::Vector3d::Zero();
        std::size_t generated = 0;
        for (const ViewState& view : views) {
            if (view.time == 0) {
                ++conditioners;
            } else {
                centroid += camera_center(camera_for(view.id));
                ++generated;
            }
        }
        if (conditioners <= window_) {
            return inner_->estimate_noise(views);
        }
        if (generated > 0) centroid /= static_cast<double>(generated);

        std::vector<std::pair<std::pair<double, std::string>, std::size_t>> ranked;
        for (std::size_t i = 0; i < views.size(); ++i) {
            if (views[i].time == 0) {
                const double dist = (camera_center(camera_for(views[i].id)) - centroid).norm();
                ranked.push_back({{dist, views[i].id}, i});
            }
        }
        std::sort(ranked.begin(), ranked.end());

        std::vector<bool> keep(views.size(), false);
        for (std::size_t i = 0; i < window_; ++i) keep[ranked[i].second] = true;

        std::vector<ViewState> kept;
        kept.reserve(views.size() - conditioners + window_);
        for (std::size_t i = 0; i < views.size(); ++i) {
            if (views[i].time != 0 || keep[i]) kept.push_back(views[i]);
        }
        return inner_->estimate_noise(kept);
    }

private:
    const Camera& camera_for(const std::string& id) const {
        auto it = cameras_.find(id);
        if (it == cameras_.end()) {
            throw std::runtime_error("no camera registered for view: " + id);
        }
        return it->second;
    }

    std::shared_ptr<const SetDenoiser> inner_;
    std::size_t window_;
    std::map<std::string, Camera> cameras_;
};

}  // namespace

std::shared_ptr<SetDenoiser> analytic_denoiser(ToySceneModel scene,
                                               DiffusionSchedule schedule) {
    return std::make_shared<AnalyticDenoiser>(std::move(scene), std::move(schedule));
}

std::shared_ptr<SetDenoiser> truncate_conditioning(
    std::shared_ptr<const SetDenoiser> inner, std::size_t window,
    std::map<std::string, Camera> cameras) {
    return std::make_shared<TruncatedDenoiser>(std::move(inner), window,
                                               std::move(cameras));
}

double gaussian_kl(double mean_fit, double var_fit, double mean_true,
                   double var_true) {
    if (!(var_fit > 0.0) || !(var_true > 0.0)) {
        throw std::invalid_argument("variances must be positive");
    }
    const double mean_diff = mean_fit - mean_true;
    return 0.5 * (std::log(var_true / var_fit) +
                  (var_fit + mean_diff * mean_diff) / var_true - 1.0);
}

DivergenceReport gaussian_divergence(
    const std::vector<std::map<std::string, Eigen::VectorXd>>& samples,
    const ToySceneModel& scene,
    const std::map<std::string, Eigen::VectorXd>& conditioning) {
    if (samples.size() < 1000) {
        throw std::invalid_argument("need at least 1000 samples");
    }
    const int dim = scene.dim();
    const double n = static_cast<double>(samples.size());

    std::vector<std::string> view_ids;
    for (const auto& [id, value] : samples.front()) {
        if (!conditioning.count(id)) view_ids.push_back(id);
    }
    if (view_ids.empty()) {
        throw std::invalid_argument("samples contain no generated views");
    }

    const ConditionalGaussian truth =
        conditional_moments(scene, view_ids, conditioning);

    DivergenceReport report;
    for (std::size_t v = 0; v < view_ids.size(); ++v) {
        const std::string& id = view_ids[v];
        Eigen::VectorXd sum = Eigen::VectorXd::Zero(dim);
        Eigen::VectorXd sum_sq = Eigen::VectorXd::Zero(dim);
        for (const auto& sample : samples) {
            const Eigen::VectorXd& value = sample.at(id);
            sum += value;
            sum_sq += value.cwiseProduct(value);
        }
        const Eigen::VectorXd mean = sum / n;
        const Eigen::VectorXd variance =
            (sum_sq - n * mean.cwiseProduct(mean)) / (n - 1.0);

        const double true_var = truth.covariance(v, v);
        double kl = 0.0;
        for (int d = 0; d < dim; ++d) {
            if (!(variance[d] > 0.0)) {
                throw std::runtime_error("degenerate sample variance for view: " + id);
            }
            kl += gaussian_kl(mean[d], variance[d], truth.mean(v, d), true_var);
            report.max_abs_mean_error = std::max(
                report.max_abs_mean_error, std::abs(mean[d] - truth.mean(v, d)));
            report.max_abs_variance_error = std::max(
                report.max_abs_variance_error, std::abs(variance[d] - true_var));
        }
        report.marginal_kl[id] = kl / dim;
    }
    return report;
}

}  // namespace viewset

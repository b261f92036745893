#include "viewset/set_denoiser.hpp"

#include <cmath>
#include <iomanip>
#include <istream>
#include <ostream>
#include <random>
#include <stdexcept>

namespace viewset {

namespace {

Eigen::MatrixXd sinusoidal_table(int steps, int feature_dim) {
    Eigen::MatrixXd table(steps + 1, feature_dim);
    for (int t = 0; t <= steps; ++t) {
        for (int k = 0; k < feature_dim; ++k) {
            const double rate = std::pow(10000.0, (k - k % 2) / static_cast<double>(feature_dim));
            table(t, k) = k % 2 == 0 ? std::sin(t / rate) : std::cos(t / rate);
        }
    }
    return table;
}

ToyDenoiserParams make_shell(int feature_dim, int num_blocks, int steps,
                             int value_dim, int num_frequencies, int token_grid) {
    if (feature_dim < 1 || num_blocks < 1 || steps < 1 || value_dim < 1 ||
        num_frequencies < 1 || token_grid < 1) {
        throw std::invalid_argument("denoiser dimensions must be >= 1");
    }
    ToyDenoiserParams p;
    p.feature_dim = feature_dim;
    p.num_blocks = num_blocks;
    p.steps = steps;
    p.value_dim = value_dim;
    p.num_frequencies = num_frequencies;
    p.token_grid = token_grid;
    p.time_embedding = sinusoidal_table(steps, feature_dim);
    return p;
}

// Token rays are the ray-map entries nearest each cell center of a
// token_grid x token_grid partition of the image.
RayMap token_rays(const RayMap& map, int token_grid) {
    std::vector<Ray> rays;
    rays.reserve(static_cast<std::size_t>(token_grid) * token_grid);
    for (int r = 0; r < token_grid; ++r) {
        const int row = std::min(
            static_cast<int>((r + 0.5) * map.height() / token_grid), map.height() - 1);
        for (int c = 0; c < token_grid; ++c) {
            const int col = std::min(
                static_cast<int>((c + 0.5) * map.width() / token_grid), map.width() - 1);
            rays.push_back(map.at(row, col));
        }
    }
    return RayMap(map.camera_id(), map.camera(), token_grid, token_grid,
                  std::move(rays));
}

Eigen::MatrixXd encode_tokens(const RayMap& tokens, int num_frequencies) {
    const EncodedRays encoded = fourier_encode(tokens, num_frequencies);
    const int channels = encoded.channels();
    const int count = tokens.width() * tokens.height();
    Eigen::MatrixXd grid(count, channels);
    for (int i = 0; i < count; ++i) {
        for (int c = 0; c < channels; ++c) {
            grid(i, c) = encoded.values()[static_cast<std::size_t>(i) * channels + c];
        }
    }
    return grid;
}

}  // namespace

ToyDenoiserParams init_toy_denoiser(int feature_dim, int num_blocks, int steps,
                                    std::uint64_t seed, int value_dim,
                                    int num_frequencies, int token_grid) {
    ToyDenoiserParams p =
        make_shell(feature_dim, num_blocks, steps, value_dim, num_frequencies, token_grid);
    std::mt19937_64 engine(seed);
    std::normal_distribution<double> unit;
    auto random_matrix = [&](int rows, int cols) {
        const double scale = 1.0 / std::sqrt(static_cast<double>(cols));
        Eigen::MatrixXd m(rows, cols);
        for (int r = 0; r < rows; ++r) {
            for (int c = 0; c < cols; ++c) m(r, c) = unit(engine) * scale;
        }
        return m;
    };

    const int channels = p.ray_channels();
    p.input_weight = random_matrix(feature_dim, value_dim);
    p.input_bias = Eigen::VectorXd::Zero(feature_dim);
    for (int b = 0; b < num_blocks; ++b) {
        p.mix_weight.push_back(random_matrix(feature_dim, feature_dim));
        p.mix_bias.push_back(Eigen::VectorXd::Zero(feature_dim));
        p.query_weight.push_back(random_matrix(feature_dim, channels));
        p.key_weight.push_back(random_matrix(feature_dim, channels));
        p.key_feature_weight.push_back(random_matrix(feature_dim, feature_dim));
        p.value_weight.push_back(random_matrix(feature_dim, feature_dim));
    }
    p.output_weight = random_matrix(value_dim, feature_dim);
    p.output_bias = Eigen::VectorXd::Zero(value_dim);
    return p;
}

ToyDenoiserParams zero_toy_denoiser(int feature_dim, int num_blocks, int steps,
                                    int value_dim, int num_frequencies,
                                    int token_grid) {
    ToyDenoiserParams p =
        make_shell(feature_dim, num_blocks, steps, value_dim, num_frequencies, token_grid);
    const int channels = p.ray_channels();
    p.input_weight = Eigen::MatrixXd::Zero(feature_dim, value_dim);
    p.input_bias = Eigen::VectorXd::Zero(feature_dim);
    for (int b = 0; b < num_blocks; ++b) {
        p.mix_weight.push_back(Eigen::MatrixXd::Zero(feature_dim, feature_dim));
        p.mix_bias.push_back(Eigen::VectorXd::Zero(feature_dim));
        p.query_weight.push_back(Eigen::MatrixXd::Zero(feature_dim, channels));
        p.key_weight.push_back(Eigen::MatrixXd::Zero(feature_dim, channels));
        p.key_feature_weight.push_back(Eigen::MatrixXd::Zero(feature_dim, feature_dim));
        p.value_weight.push_back(Eigen::MatrixXd::Zero(feature_dim, feature_dim));
    }
    p.output_weight = Eigen::MatrixXd::Zero(value_dim, feature_dim);
    p.output_bias = Eigen::VectorXd::Zero(value_dim);
    return p;
}

std::size_t parameter_count(const ToyDenoiserParams& params) {
    const std::size_t f = params.feature_dim;
    const std::size_t d = params.value_dim;
    const std::size_t c = params.ray_channels();
    const std::size_t l = params.num_blocks;
    return f * d + f + l * (f * f + f + 2 * f * c + f * f + f * f) + d * f + d;
}

std::vector<Eigen::VectorXd> toy_forward(const ToyDenoiserParams& params,
                                         const std::vector<ViewState>& views,
                                         const std::vector<RayMap>& ray_maps,
                                         int num_frequencies) {
    if (views.size() != ray_maps.size()) {
        throw std::invalid_argument("need exactly one ray map per view");
    }
    if (views.empty()) return {};
    if (num_frequencies != params.num_frequencies) {
        throw std::invalid_argument("frequency count does not match the parameters");
    }

    const std::size_t n = views.size();
    const int tokens = params.token_grid * params.token_grid;
    const int f_dim = params.feature_dim;

    std::vector<RayMap> token_maps;
    token_maps.reserve(n);
    for (const RayMap& map : ray_maps) {
        token_maps.push_back(token_rays(map, params.token_grid));
    }

    // encoded(i, j): stream j's token rays canonicalized to stream i's camera.
    std::vector<std::vector<Eigen::MatrixXd>> encoded(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::vector<RayMap> canonical = canonicalize_set(token_maps, i);
        encoded[i].reserve(n);
        for (const RayMap& map : canonical) {
            encoded[i].push_back(encode_tokens(map, num_frequencies));
        }
    }

    std::vector<Eigen::MatrixXd> features(n);
    for (std::size_t i = 0; i < n; ++i) {
        const ViewState& view = views[i];
        if (view.value.size() != params.value_dim) {
            throw std::invalid_argument("view value dimension mismatch: " + view.id);
        }
        if (view.time < 0 || view.time > params.steps) {
            throw std::out_of_range("view time outside the embedding table");
        }
        const Eigen::VectorXd seed = params.input_weight * view.value +
                                     params.input_bias +
                                     params.time_embedding.row(view.time).transpose();
        features[i] = seed.transpose().replicate(tokens, 1);
    }

    const double scale = 1.0 / std::sqrt(static_cast<double>(f_dim));
    for (int block = 0; block < params.num_blocks; ++block) {
        for (std::size_t i = 0; i < n; ++i) {
            features[i] += ((features[i] * params.mix_weight[block].transpose()).rowwise() +
                            params.mix_bias[block].transpose())
                               .array()
                               .tanh()
                               .matrix();
        }

        std::vector<Eigen::MatrixXd> projected_values(n);
        for (std::size_t j = 0; j < n; ++j) {
            projected_values[j] = features[j] * params.value_weight[block].transpose();
        }

        std::vector<Eigen::MatrixXd> updated(n);
        for (std::size_t i = 0; i < n; ++i) {
            const Eigen::MatrixXd queries =
                encoded[i][i] * params.query_weight[block].transpose();
            Eigen::MatrixXd keys(n * tokens, f_dim);
            Eigen::MatrixXd values(n * tokens, f_dim);
            for (std::size_t j = 0; j < n; ++j) {
                Eigen::MatrixXd key_block =
                    encoded[i][j] * params.key_weight[block].transpose();
                if (params.keys_use_features) {
                    key_block += features[j] * params.key_feature_weight[block].transpose();
                }
                keys.middleRows(j * tokens, tokens) = key_block;
                values.middleRows(j * tokens, tokens) = projected_values[j];
            }

            Eigen::MatrixXd scores = queries * keys.transpose() * scale;
            for (Eigen::Index q = 0; q < scores.rows(); ++q) {
                const double peak = scores.row(q).maxCoeff();
                Eigen::ArrayXd weights = (scores.row(q).array() - peak).exp();
                scores.row(q) = (weights / weights.sum()).matrix();
            }
            updated[i] = features[i] + scores * values;
        }
        features = std::move(updated);
    }

    std::vector<Eigen::VectorXd> estimates;
    for (std::size_t i = 0; i < n; ++i) {
        if (views[i].time == 0) continue;
        const Eigen::VectorXd pooled =
            features[i].colwise().mean().transpose();
        estimates.push_back(params.output_weight * pooled + params.output_bias);
    }
    return estimates;
}

void save_toy_denoiser(const ToyDenoiserParams& params, std::ostream& out) {
    out << "viewset-toy-denoiser 1\n";
    out << params.feature_dim << ' ' << params.num_blocks << ' ' << params.steps
        << ' ' << params.value_dim << ' ' << params.num_frequencies << ' '
        << params.token_grid << ' ' << (params.keys_use_features ? 1 : 0) << '\n';
    out << std::setprecision(17);
    auto dump = [&](const Eigen::MatrixXd& m) {
        for (Eigen::Index r = 0; r < m.rows(); ++r) {
            for (Eigen::Index c = 0; c < m.cols(); ++c) {
                out << m(r, c) << (c + 1 == m.cols() ? '\n' : ' ');
            }
        }
    };
    dump(params.input_weight);
    dump(params.input_bias);
    for (int b = 0; b < params.num_blocks; ++b) {
        dump(params.mix_weight[b]);
        dump(params.mix_bias[b]);
        dump(params.query_weight[b]);
        dump(params.key_weight[b]);
        dump(params.key_feature_weight[b]);
        dump(params.value_weight[b]);
    }
    dump(params.output_weight);
    dump(params.output_bias);
}

ToyDenoiserParams load_toy_denoiser(std::istream& in) {
    std::string magic;
    int version = 0;
    in >> magic >> version;
    if (magic != "viewset-toy-denoiser" || version != 1) {
        throw std::runtime_error("unrecognized denoiser parameter file");
    }
    int feature_dim, num_blocks, steps, value_dim, num_frequencies, token_grid, flag;
    in >> feature_dim >> num_blocks >> steps >> value_dim >> num_frequencies >>
        token_grid >> flag;
    ToyDenoiserParams p =
        make_shell(feature_dim, num_blocks, steps, value_dim, num_frequencies, token_grid);
    p.keys_use_features = flag != 0;

    auto read = [&](int rows, int cols) {
        Eigen::MatrixXd m(rows, cols);
        for (int r = 0; r < rows; ++r) {
            for (int c = 0; c < cols; ++c) {
                if (!(in >> m(r, c))) {
                    throw std::runtime_error("truncated denoiser parameter file");
                }
            }
        }
        return m;
    };
    const int channels = p.ray_channels();
    p.input_weight = read(feature_dim, value_dim);
    p.input_bias = read(feature_dim, 1);
    for (int b = 0; b < num_blocks; ++b) {
        p.mix_weight.push_back(read(feature_dim, feature_dim));
        p.mix_bias.push_back(read(feature_dim, 1));
        p.query_weight.push_back(read(feature_dim, channels));
        p.key_weight.push_back(read(feature_dim, channels));
        p.key_feature_weight.push_back(read(feature_dim, feature_dim));
        p.value_weight.push_back(read(feature_dim, feature_dim));
    }
    p.output_weight = read(value_dim, feature_dim);
    p.output_bias = read(value_dim, 1);
    return p;
}

ToySetDenoiser::ToySetDenoiser(ToyDenoiserParams params,
                               std::map<std::string, RayMap> ray_maps)
    : params_(std::move(params)), ray_maps_(std::move(ray_maps)) {}

std::vector<Eigen::VectorXd> ToySetDenoiser::estimate_noise(
    const std::vector<ViewState>& views) const {
    std::vector<RayMap> maps;
    maps.reserve(views.size());
    for (const ViewState& view : views) {
        auto it = ray_maps_.find(view.id);
        if (it == ray_maps_.end()) {
            throw std::runtime_error("no ray map registered for view: " + view.id);
        }
        maps.push_back(it->second);
    }
    return toy_forward(params_, views, maps, params_.num_frequencies);
}

}  // namespace viewset

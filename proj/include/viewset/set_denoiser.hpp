#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "viewset/diffusion.hpp"
#include "viewset/geometry.hpp"

namespace viewset {

/// Weights for the toy multistream denoiser. Every stream shares the same
/// parameters; streams exchange information only through cross-attention,
/// whose queries and keys are projections of canonicalized encoded rays and
/// whose values are projections of stream features.
struct ToyDenoiserParams {
    int feature_dim = 0;
    int num_blocks = 0;
    int steps = 0;
    int value_dim = 0;
    int num_frequencies = 0;
    int token_grid = 0;  // tokens per view side; views carry token_grid^2 tokens
    bool keys_use_features = false;

    Eigen::MatrixXd input_weight;              // feature_dim x value_dim
    Eigen::VectorXd input_bias;                // feature_dim
    Eigen::MatrixXd time_embedding;            // (steps + 1) x feature_dim, sinusoidal
    std::vector<Eigen::MatrixXd> mix_weight;   // per block, feature_dim x feature_dim
    std::vector<Eigen::VectorXd> mix_bias;     // per block, feature_dim
    std::vector<Eigen::MatrixXd> query_weight; // per block, feature_dim x ray_channels
    std::vector<Eigen::MatrixXd> key_weight;   // per block, feature_dim x ray_channels
    std::vector<Eigen::MatrixXd> key_feature_weight;  // per block, feature_dim x feature_dim
    std::vector<Eigen::MatrixXd> value_weight; // per block, feature_dim x feature_dim
    Eigen::MatrixXd output_weight;             // value_dim x feature_dim
    Eigen::VectorXd output_bias;               // value_dim

    int ray_channels() const { return 12 * num_frequencies; }
};

/// Weights drawn from N(0, 1/sqrt(fan_in)) with zero biases, deterministic
/// in the seed. The time embedding table is fixed sinusoidal.
ToyDenoiserParams init_toy_denoiser(int feature_dim, int num_blocks, int steps,
                                    std::uint64_t seed, int value_dim = 4,
                                    int num_frequencies = 8, int token_grid = 2);

/// All learned weights zero; the forward pass then returns zero estimates.
ToyDenoiserParams zero_toy_denoiser(int feature_dim, int num_blocks, int steps,
                                    int value_dim = 4, int num_frequencies = 8,
                                    int token_grid = 2);

/// Number of learned scalars:
///   F*D + F                       input projection
///   L * (F*F + F + 2*F*C + F*F + F*F)   per-block mixing, query/key, key-feature, value
///   D*F + D                       output head
/// with F = feature_dim, D = value_dim, C = 12*num_frequencies, L = num_blocks.
/// The sinusoidal time table is fixed, not learned.
std::size_t parameter_count(const ToyDenoiserParams& params);

/// One forward pass over a set of streams. Per stream the value and time
/// embedding seed the token features; each block applies shared per-stream
/// mixing, then cross-attention in which stream i queries with its own
/// canonicalized rays and keys/values come from all streams' rays
/// canonicalized to i (features too when keys_use_features). Returns noise
/// estimates for views with time > 0, in input order.
std::vector<Eigen::VectorXd> toy_forward(const ToyDenoiserParams& params,
                                         const std::vector<ViewState>& views,
                                         const std::vector<RayMap>& ray_maps,
                                         int num_frequencies);

void save_toy_denoiser(const ToyDenoiserParams& params, std::ostream& out);
ToyDenoiserParams load_toy_denoiser(std::istream& in);

/// SetDenoiser adapter: binds parameters and per-view ray maps so the toy
/// network can drive sample_set / execute_plan.
class ToySetDenoiser final : public SetDenoiser {
public:
    ToySetDenoiser(ToyDenoiserParams params, std::map<std::string, RayMap> ray_maps);

    int value_dim() const override { return params_.value_dim; }
    std::vector<Eigen::VectorXd> estimate_noise(
        const std::vector<ViewState>& views) const override;

private:
    ToyDenoiserParams params_;
    std::map<std::string, RayMap> ray_maps_;
};

}  // namespace viewset

#include <algorithm>
#include <random>
#include <sstream>

#include <doctest.h>

#include "helpers.hpp"
#include "viewset/set_denoiser.hpp"

using namespace viewset;
using namespace viewset::testing;

namespace {

struct StreamSet {
    std::vector<ViewState> views;
    std::vector<RayMap> maps;
};

StreamSet random_streams(std::mt19937_64& rng, std::size_t count, int value_dim,
                         int conditioning = 1, int steps = 16) {
    std::normal_distribution<double> unit;
    StreamSet set;
    for (std::size_t i = 0; i < count; ++i) {
        Eigen::VectorXd value(value_dim);
        for (int d = 0; d < value_dim; ++d) value[d] = unit(rng);
        const int time =
            i < static_cast<std::size_t>(conditioning) ? 0 : 1 + static_cast<int>(rng() % steps);
        const std::string id = "s" + std::to_string(i);
        set.views.push_back(ViewState{id, value, time});
        set.maps.push_back(build_ray_map(random_camera(rng), id));
    }
    return set;
}

}  // namespace

TEST_CASE("initialization is deterministic in the seed") {
    const ToyDenoiserParams a = init_toy_denoiser(8, 2, 16, 99, 4, 4);
    const ToyDenoiserParams b = init_toy_denoiser(8, 2, 16, 99, 4, 4);
    const ToyDenoiserParams c = init_toy_denoiser(8, 2, 16, 100, 4, 4);
    CHECK(a.input_weight == b.input_weight);
    CHECK(a.query_weight[1] == b.query_weight[1]);
    CHECK(a.output_weight == b.output_weight);
    CHECK(a.input_weight != c.input_weight);
}

TEST_CASE("zero parameters give zero estimates") {
    std::mt19937_64 rng(61);
    const ToyDenoiserParams zero = zero_toy_denoiser(8, 2, 16, 4, 4);
    const StreamSet set = random_streams(rng, 3, 4);
    const auto estimates = toy_forward(zero, set.views, set.maps, 4);
    REQUIRE(estimates.size() == 2);
    for (const auto& estimate : estimates) {
        CHECK(estimate.norm() == 0.0);
    }
}

TEST_CASE("parameter count follows the shape formula") {
    const ToyDenoiserParams params = init_toy_denoiser(8, 2, 16, 1, 4, 8);
    // F=8, D=4, C=96, L=2: 40 + 2*(64+8+1536+64+64) + 36 = 3548
    CHECK(parameter_count(params) == 3548);

    // agrees with the actual allocation
    std::size_t total = params.input_weight.size() + params.input_bias.size() +
                        params.output_weight.size() + params.output_bias.size();
    for (int b = 0; b < params.num_blocks; ++b) {
        total += params.mix_weight[b].size() + params.mix_bias[b].size() +
                 params.query_weight[b].size() + params.key_weight[b].size() +
                 params.key_feature_weight[b].size() + params.value_weight[b].size();
    }
    CHECK(parameter_count(params) == total);
}

TEST_CASE("forward is permutation-equivariant") {
    std::mt19937_64 rng(67);
    const ToyDenoiserParams params = init_toy_denoiser(8, 2, 16, 5, 4, 3);
    for (std::size_t count = 2; count <= 6; ++count) {
        const StreamSet set = random_streams(rng, count, 4);
        const auto baseline = toy_forward(params, set.views, set.maps, 3);

        std::vector<std::size_t> order(count);
        std::iota(order.begin(), order.end(), 0);
        for (int trial = 0; trial < 5; ++trial) {
            std::shuffle(order.begin(), order.end(), rng);
            StreamSet shuffled;
            for (std::size_t index : order) {
                shuffled.views.push_back(set.views[index]);
                shuffled.maps.push_back(set.maps[index]);
            }
            const auto permuted = toy_forward(params, shuffled.views, shuffled.maps, 3);

            // match estimates by generated-view id
            std::size_t base_pos = 0;
            for (std::size_t i = 0; i < count; ++i) {
                if (set.views[i].time == 0) continue;
                std::size_t perm_pos = 0;
                for (std::size_t j = 0; j < count; ++j) {
                    if (shuffled.views[j].time == 0) continue;
                    if (shuffled.views[j].id == set.views[i].id) break;
                    ++perm_pos;
                }
                CHECK((baseline[base_pos] - permuted[perm_pos]).cwiseAbs().maxCoeff() <
                      1e-6);
                ++base_pos;
            }
        }
    }
}

TEST_CASE("forward is invariant to global rigid motion") {
    std::mt19937_64 rng(71);
    // feature-augmented keys must preserve the invariance too
    for (bool keys_use_features : {false, true}) {
        ToyDenoiserParams params = init_toy_denoiser(8, 2, 16, 6, 4, 3);
        params.keys_use_features = keys_use_features;
        const StreamSet set = random_streams(rng, 4, 4);
        const auto baseline = toy_forward(params, set.views, set.maps, 3);

        for (int trial = 0; trial < 10; ++trial) {
            const Eigen::Matrix3d r_g = random_rotation(rng);
            const Eigen::Vector3d t_g = random_vector(rng, 4.0);
            std::vector<RayMap> moved;
            for (const RayMap& map : set.maps) {
                moved.push_back(build_ray_map(transform_world(map.camera(), r_g, t_g),
                                              map.camera_id()));
            }
            const auto transformed = toy_forward(params, set.views, moved, 3);
            for (std::size_t i = 0; i < baseline.size(); ++i) {
                CHECK((baseline[i] - transformed[i]).cwiseAbs().maxCoeff() < 1e-4);
            }
        }
    }
}

TEST_CASE("feature-augmented keys stay permutation-equivariant") {
    std::mt19937_64 rng(75);
    ToyDenoiserParams params = init_toy_denoiser(8, 2, 16, 5, 4, 3);
    params.keys_use_features = true;
    const StreamSet set = random_streams(rng, 4, 4);
    const auto baseline = toy_forward(params, set.views, set.maps, 3);

    StreamSet reversed;
    for (std::size_t i = set.views.size(); i-- > 0;) {
        reversed.views.push_back(set.views[i]);
        reversed.maps.push_back(set.maps[i]);
    }
    const auto permuted = toy_forward(params, reversed.views, reversed.maps, 3);
    REQUIRE(baseline.size() == permuted.size());
    for (std::size_t i = 0; i < baseline.size(); ++i) {
        CHECK((baseline[i] - permuted[permuted.size() - 1 - i]).cwiseAbs().maxCoeff() <
              1e-6);
    }
}

TEST_CASE("identical streams get identical estimates") {
    std::mt19937_64 rng(73);
    const ToyDenoiserParams params = init_toy_denoiser(8, 2, 16, 7, 4, 3);
    const Camera camera = random_camera(rng);
    Eigen::VectorXd value(4);
    value << 0.3, -0.5, 1.1, 0.2;
    std::vector<ViewState> views{{"a", value, 4}, {"b", value, 4}};
    std::vector<RayMap> maps{build_ray_map(camera, "a"), build_ray_map(camera, "b")};
    const auto estimates = toy_forward(params, views, maps, 3);
    REQUIRE(estimates.size() == 2);
    CHECK((estimates[0] - estimates[1]).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("conditioning streams influence generated streams") {
    std::mt19937_64 rng(79);
    const ToyDenoiserParams params = init_toy_denoiser(8, 2, 16, 8, 4, 3);
    StreamSet set = random_streams(rng, 3, 4);
    const auto before = toy_forward(params, set.views, set.maps, 3);
    set.views[0].value = Eigen::VectorXd::Zero(4);  // stream 0 is conditioning
    const auto after = toy_forward(params, set.views, set.maps, 3);
    double change = 0.0;
    for (std::size_t i = 0; i < before.size(); ++i) {
        change += (before[i] - after[i]).norm();
    }
    CHECK(change > 1e-9);
}

TEST_CASE("roles matter only through time embedding and masking") {
    std::mt19937_64 rng(83);
    ToyDenoiserParams params = init_toy_denoiser(8, 2, 16, 9, 4, 3);
    // flatten the time table so time no longer distinguishes the streams
    for (Eigen::Index r = 0; r < params.time_embedding.rows(); ++r) {
        params.time_embedding.row(r) = params.time_embedding.row(1);
    }
    StreamSet set = random_streams(rng, 3, 4, /*conditioning=*/1);

    const auto with_conditioning = toy_forward(params, set.views, set.maps, 3);
    StreamSet regenerated = set;
    regenerated.views[0].time = set.views[1].time;  // promote to generated
    const auto all_generated =
        toy_forward(params, regenerated.views, regenerated.maps, 3);

    REQUIRE(with_conditioning.size() == 2);
    REQUIRE(all_generated.size() == 3);
    CHECK((with_conditioning[0] - all_generated[1]).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((with_conditioning[1] - all_generated[2]).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("parameters round-trip through the textual dump") {
    std::mt19937_64 rng(89);
    ToyDenoiserParams params = init_toy_denoiser(6, 3, 12, 10, 4, 2);
    params.keys_use_features = true;
    std::stringstream buffer;
    save_toy_denoiser(params, buffer);
    const ToyDenoiserParams loaded = load_toy_denoiser(buffer);

    CHECK(loaded.keys_use_features == params.keys_use_features);
    CHECK(loaded.input_weight == params.input_weight);
    CHECK(loaded.key_weight[2] == params.key_weight[2]);
    CHECK(loaded.output_weight == params.output_weight);

    const StreamSet set = random_streams(rng, 3, 4, 1, 12);
    const auto a = toy_forward(params, set.views, set.maps, 2);
    const auto b = toy_forward(loaded, set.views, set.maps, 2);
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i] == b[i]);
    }

    std::stringstream bad("not-a-dump 1\n");
    CHECK_THROWS_AS(load_toy_denoiser(bad), std::runtime_error);
}

TEST_CASE("toy denoiser drives the sampler") {
    std::mt19937_64 rng(97);
    const int steps = 6;
    const ToyDenoiserParams params = init_toy_denoiser(8, 1, steps, 11, 4, 3);
    std::map<std::string, RayMap> maps;
    std::vector<ViewState> views;
    for (int i = 0; i < 3; ++i) {
        const std::string id = "v" + std::to_string(i);
        maps.emplace(id, build_ray_map(random_camera(rng), id));
        views.push_back(ViewState{
            id, i == 0 ? Eigen::VectorXd::Constant(4, 0.5) : Eigen::VectorXd(),
            i == 0 ? 0 : 1});
    }
    const ToySetDenoiser denoiser(params, maps);
    const DiffusionSchedule schedule = build_schedule(steps, 0.05, 0.3);

    NoiseStream a(3), b(3);
    const auto first = sample_set(denoiser, views, schedule, a);
    const auto second = sample_set(denoiser, views, schedule, b);
    CHECK(first[1].value == second[1].value);
    CHECK(first[2].value == second[2].value);
    CHECK(first[0].value == views[0].value);

    // mismatched shapes are rejected
    const StreamSet wrong = random_streams(rng, 2, 4);
    CHECK_THROWS_AS(toy_forward(params, wrong.views, {wrong.maps[0]}, 3),
                    std::invalid_argument);
    CHECK_THROWS_AS(toy_forward(params, wrong.views, wrong.maps, 5),
                    std::invalid_argument);
}

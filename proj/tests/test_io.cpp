#include <cmath>
#include <random>
#include <sstream>

#include <doctest.h>

#include "helpers.hpp"
#include "viewset/experiment.hpp"
#include "viewset/io.hpp"

using namespace viewset;
using namespace viewset::testing;

TEST_CASE("trajectory files round-trip") {
    std::mt19937_64 rng(127);
    std::vector<PosedView> views;
    for (int i = 0; i < 5; ++i) {
        views.push_back(PosedView{"cam" + std::to_string(i), random_camera(rng)});
    }
    std::stringstream buffer;
    save_trajectory(views, buffer);
    const std::vector<PosedView> loaded = parse_trajectory(buffer, "buffer");
    REQUIRE(loaded.size() == views.size());
    for (std::size_t i = 0; i < views.size(); ++i) {
        CHECK(loaded[i].id == views[i].id);
        CHECK(loaded[i].camera.fx() == views[i].camera.fx());
        CHECK(loaded[i].camera.rotation() == views[i].camera.rotation());
        CHECK(loaded[i].camera.translation() == views[i].camera.translation());
    }
}

TEST_CASE("trajectory parsing names the offending field") {
    std::stringstream missing(R"([{"id": "a", "fy": 1.0}])");
    CHECK_THROWS_WITH_AS(parse_trajectory(missing, "t.json"),
                         doctest::Contains("fx"), ParseError);

    std::stringstream garbage("not json at all");
    CHECK_THROWS_AS(parse_trajectory(garbage, "t.json"), ParseError);

    std::stringstream short_r(R"([{"id": "a", "fx": 1, "fy": 1, "cx": 1, "cy": 1,
        "width": 2, "height": 2, "R": [1, 0, 0], "t": [0, 0, 0]}])");
    CHECK_THROWS_WITH_AS(parse_trajectory(short_r, "t.json"),
                         doctest::Contains("R"), ParseError);
}

TEST_CASE("plan files round-trip with identical depth reports") {
    std::mt19937_64 rng(131);
    std::vector<ViewSpec> views;
    views.push_back(ViewSpec{"obs", random_camera(rng), ViewRole::Observed});
    for (int i = 1; i <= 9; ++i) {
        views.push_back(ViewSpec{"g" + std::to_string(i), random_camera(rng),
                                 ViewRole::Generated});
    }
    const GenerationPlan plan = plan_keyframed(views, 2, 2, 2);

    std::stringstream buffer;
    save_plan(plan, buffer);
    const GenerationPlan loaded = parse_plan(buffer, "plan.json");

    CHECK(validate(loaded).empty());
    REQUIRE(loaded.stages.size() == plan.stages.size());
    for (std::size_t s = 0; s < plan.stages.size(); ++s) {
        CHECK(loaded.stages[s].generate == plan.stages[s].generate);
        CHECK(loaded.stages[s].condition == plan.stages[s].condition);
    }
    const DepthReport before = depth(plan);
    const DepthReport after = depth(loaded);
    CHECK(before.max_depth == after.max_depth);
    CHECK(before.depth == after.depth);

    // cameras survive exactly
    const Camera& original = *plan.views.at("g3").camera;
    const Camera& restored = *loaded.views.at("g3").camera;
    CHECK(original.rotation() == restored.rotation());
    CHECK(original.translation() == restored.translation());
    CHECK(loaded.views.at("obs").role == ViewRole::Observed);

    std::stringstream missing(R"({"views": []})");
    CHECK_THROWS_WITH_AS(parse_plan(missing, "p.json"), doctest::Contains("stages"),
                         ParseError);
}

TEST_CASE("match files round-trip") {
    MatchSet matches;
    matches.pair = {"a", "b"};
    matches.matches.push_back({{1.25, -3.5}, {0.125, 7.75}});
    matches.matches.push_back({{2.0, 3.0}, {4.0, 5.0}});
    std::stringstream buffer;
    save_match_set(matches, buffer);
    const MatchSet loaded = parse_match_set(buffer, "m.json");
    CHECK(loaded.pair == matches.pair);
    REQUIRE(loaded.matches.size() == 2);
    CHECK(loaded.matches[0].first == matches.matches[0].first);
    CHECK(loaded.matches[0].second == matches.matches[0].second);

    std::stringstream bad(R"({"pair": ["a"], "matches": []})");
    CHECK_THROWS_WITH_AS(parse_match_set(bad, "m.json"), doctest::Contains("pair"),
                         ParseError);
}

TEST_CASE("encoded ray dump matches hand computation") {
    // single-pixel canonical camera: origin zero, direction (0, 0, 1)
    const Camera tiny(1, 1, 0.5, 0.5, 1, 1, Eigen::Matrix3d::Identity(),
                      Eigen::Vector3d::Zero());
    const EncodedRays encoded = fourier_encode(build_ray_map(tiny, "t"), 1);
    std::stringstream buffer;
    write_encoded_rays(encoded, buffer);

    int width, height, channels;
    buffer >> width >> height >> channels;
    CHECK(width == 1);
    CHECK(height == 1);
    CHECK(channels == 12);
    double frequency;
    buffer >> frequency;
    CHECK(frequency == 1.0);

    std::vector<double> values(12);
    for (double& value : values) buffer >> value;
    // five zero components then direction z = 1: sin/cos alternating
    for (int c = 0; c < 5; ++c) {
        CHECK(values[2 * c] == 0.0);
        CHECK(values[2 * c + 1] == 1.0);
    }
    CHECK(std::abs(values[10] - std::sin(M_PI)) < 1e-15);
    CHECK(values[11] == doctest::Approx(-1.0));
}

TEST_CASE("experiment csv is stable") {
    std::vector<ExperimentRow> rows{{1, "a", 0, 0.0}, {1, "b", 1, 0.03125}};
    std::stringstream buffer;
    write_experiment_csv(rows, buffer);
    CHECK(buffer.str() == "seed,view,depth,marginal_kl\n1,a,0,0\n1,b,1,0.03125\n");
}

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "viewset/consistency.hpp"
#include "viewset/diffusion.hpp"
#include "viewset/experiment.hpp"
#include "viewset/geometry.hpp"
#include "viewset/io.hpp"
#include "viewset/plan.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Exit codes: 0 success, 2 input parsing, 3 validation, 4 runtime failure.
constexpr int kParseExit = 2;
constexpr int kValidationExit = 3;
constexpr int kRuntimeExit = 4;

std::ofstream open_output(const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot write to " + path);
    }
    return out;
}

std::vector<viewset::ViewSpec> as_view_specs(
    const std::vector<viewset::PosedView>& trajectory) {
    if (trajectory.empty()) {
        throw std::invalid_argument("trajectory holds no cameras");
    }
    std::vector<viewset::ViewSpec> views;
    views.reserve(trajectory.size());
    for (std::size_t i = 0; i < trajectory.size(); ++i) {
        views.push_back(viewset::ViewSpec{
            trajectory[i].id, trajectory[i].camera,
            i == 0 ? viewset::ViewRole::Observed : viewset::ViewRole::Generated});
    }
    return views;
}

std::vector<viewset::StereoFramePair> stereo_sequence(
    const std::vector<std::string>& generated_ids) {
    if (generated_ids.size() % 2 != 0) {
        throw std::invalid_argument(
            "stereo interpretation needs an even number of generated views");
    }
    std::vector<viewset::StereoFramePair> sequence;
    for (std::size_t i = 0; i + 1 < generated_ids.size(); i += 2) {
        sequence.push_back({generated_ids[i], generated_ids[i + 1]});
    }
    return sequence;
}

void print_depth_table(const viewset::GenerationPlan& plan,
                       const std::vector<std::string>& order) {
    const viewset::DepthReport report = viewset::depth(plan);
    std::cout << "view,depth\n";
    for (const std::string& id : order) {
        std::cout << id << ',' << report.depth.at(id) << '\n';
    }
    std::cout << "max_depth," << report.max_depth << '\n';
}

struct PlanOptions {
    std::string trajectory;
    std::string strategy;
    std::string out;
    int spacing = 2;
    int chunk = 4;
    int cond_count = 2;
    int keyframes = 4;
    int group_size = 2;
    double rotation_weight = 0.0;
};

void run_plan(const PlanOptions& options) {
    const std::vector<viewset::PosedView> trajectory =
        viewset::load_trajectory(options.trajectory);
    std::vector<viewset::ViewSpec> views = as_view_specs(trajectory);

    std::vector<std::string> generated_ids;
    for (std::size_t i = 1; i < trajectory.size(); ++i) {
        generated_ids.push_back(trajectory[i].id);
    }

    viewset::GenerationPlan plan;
    if (options.strategy == "chain") {
        plan = viewset::plan_chain(views);
    } else if (options.strategy == "keyframed") {
        plan = viewset::plan_keyframed(views, options.spacing, options.chunk,
                                       options.cond_count);
    } else if (options.strategy == "grouped") {
        if (options.group_size < 1) {
            throw std::invalid_argument("group size must be >= 1");
        }
        std::vector<std::vector<std::string>> groups;
        for (std::size_t i = 0; i < generated_ids.size();
             i += static_cast<std::size_t>(options.group_size)) {
            const std::size_t stop =
                std::min(i + options.group_size, generated_ids.size());
            groups.emplace_back(generated_ids.begin() + i, generated_ids.begin() + stop);
        }
        plan = viewset::plan_grouped(groups, {trajectory.front().id});
        for (auto& [id, spec] : plan.views) {
            for (const viewset::PosedView& posed : trajectory) {
                if (posed.id == id) spec.camera = posed.camera;
            }
        }
    } else if (options.strategy == "zigzag") {
        std::vector<viewset::StereoPairIds> pairs;
        for (const viewset::StereoFramePair& frame : stereo_sequence(generated_ids)) {
            pairs.push_back({frame.right, frame.left});
        }
        plan = viewset::plan_zigzag(pairs, {trajectory.front().id});
        for (auto& [id, spec] : plan.views) {
            for (const viewset::PosedView& posed : trajectory) {
                if (posed.id == id) spec.camera = posed.camera;
            }
        }
    } else if (options.strategy == "unordered") {
        plan = viewset::plan_unordered(views, options.keyframes, options.cond_count,
                                       options.rotation_weight);
    } else {
        throw std::invalid_argument("unknown strategy: " + options.strategy);
    }

    const std::vector<viewset::Violation> violations = viewset::validate(plan);
    if (!violations.empty()) {
        throw std::invalid_argument("constructed plan is invalid: " +
                                    violations.front().message);
    }

    std::ofstream out = open_output(options.out);
    viewset::save_plan(plan, out);

    std::vector<std::string> order;
    for (const viewset::PosedView& view : trajectory) order.push_back(view.id);
    print_depth_table(plan, order);
}

void run_validate(const std::string& path) {
    const viewset::GenerationPlan plan = viewset::load_plan(path);
    const std::vector<viewset::Violation> violations = viewset::validate(plan);
    if (!violations.empty()) {
        for (const viewset::Violation& violation : violations) {
            std::cerr << "stage " << violation.stage << ": " << violation.message
                      << '\n';
        }
        throw std::invalid_argument("plan has " + std::to_string(violations.size()) +
                                    " violations");
    }
    std::vector<std::string> order;
    for (const auto& [id, view] : plan.views) order.push_back(id);
    print_depth_table(plan, order);
}

struct ExperimentOptions {
    std::string config;
    std::string out;
    std::vector<std::uint64_t> seeds;  // optional override
    std::optional<std::size_t> window;
};

void run_experiment_command(const ExperimentOptions& options) {
    std::ifstream in(options.config);
    if (!in) {
        throw viewset::ParseError(options.config + ": cannot open file");
    }
    json config;
    try {
        config = json::parse(in);
    } catch (const json::exception& e) {
        throw viewset::ParseError(options.config + ": " + std::string(e.what()));
    }

    auto resolve = [&](const std::string& path) {
        const fs::path p(path);
        if (p.is_absolute()) return p.string();
        return (fs::path(options.config).parent_path() / p).string();
    };
    auto field = [&](const char* name) -> const json& {
        auto it = config.find(name);
        if (it == config.end()) {
            throw viewset::ParseError(options.config + ": missing field '" +
                                      std::string(name) + "'");
        }
        return *it;
    };

    viewset::ExperimentSpec spec;
    spec.trajectory = viewset::load_trajectory(resolve(field("trajectory")));
    spec.plan = viewset::load_plan(resolve(field("plan")));

    const json& scene = field("scene");
    spec.scene_mean = scene.value("mean", 0.0);
    spec.scene_sigma = scene.value("sigma", 1.0);
    spec.scene_length_scale = scene.value("length_scale", 1.0);
    spec.scene_dim = scene.value("dim", 4);

    const json& schedule = field("schedule");
    spec.steps = schedule.value("steps", 1000);
    spec.beta_start = schedule.value("beta_start", 1e-4);
    spec.beta_end = schedule.value("beta_end", 0.02);

    for (const json& seed : field("seeds")) {
        spec.seeds.push_back(seed.get<std::uint64_t>());
    }
    if (!options.seeds.empty()) {
        spec.seeds = options.seeds;
    }
    spec.samples = config.value("samples", 2000);
    if (config.contains("window") && !config["window"].is_null()) {
        spec.window = config["window"].get<std::size_t>();
    }
    if (options.window) {
        spec.window = options.window;
    }
    spec.observation_seed = config.value("observation_seed", 0);
    if (config.contains("observations")) {
        for (const auto& [id, values] : config["observations"].items()) {
            Eigen::VectorXd value(values.size());
            for (std::size_t i = 0; i < values.size(); ++i) {
                value[i] = values[i].get<double>();
            }
            spec.observations[id] = value;
        }
    }

    const std::vector<viewset::ExperimentRow> rows = viewset::run_experiment(spec);
    if (options.out.empty()) {
        viewset::write_experiment_csv(rows, std::cout);
    } else {
        std::ofstream out = open_output(options.out);
        viewset::write_experiment_csv(rows, out);
    }
}

struct TsedOptions {
    std::string matches_dir;
    std::string trajectory;
    std::string mode = "adjacent";
    std::string out;
    std::size_t t_matches = 10;
    std::string sweep = "1.0:4.0:0.5";
};

std::vector<double> parse_sweep(const std::string& sweep) {
    double start = 0.0, stop = 0.0, step = 0.0;
    char sep_a = 0, sep_b = 0;
    std::istringstream in(sweep);
    if (!(in >> start >> sep_a >> stop >> sep_b >> step) || sep_a != ':' ||
        sep_b != ':' || step <= 0.0 || stop < start) {
        throw std::invalid_argument("sweep must be start:stop:step");
    }
    std::vector<double> thresholds;
    for (double value = start; value <= stop + 1e-12; value += step) {
        thresholds.push_back(value);
    }
    return thresholds;
}

void run_tsed(const TsedOptions& options) {
    const std::vector<viewset::PosedView> trajectory =
        viewset::load_trajectory(options.trajectory);
    std::map<std::string, viewset::Camera> cameras;
    std::vector<std::string> generated_ids;
    for (std::size_t i = 0; i < trajectory.size(); ++i) {
        cameras.emplace(trajectory[i].id, trajectory[i].camera);
        if (i > 0) generated_ids.push_back(trajectory[i].id);
    }

    std::vector<std::pair<std::string, std::string>> pairs;
    if (options.mode == "adjacent") {
        pairs = viewset::make_pairs(generated_ids, viewset::PairMode::Adjacent);
    } else if (options.mode == "first_last") {
        pairs = viewset::make_pairs(generated_ids, viewset::PairMode::FirstLast);
    } else if (options.mode == "same_sided") {
        pairs = viewset::make_pairs(stereo_sequence(generated_ids),
                                    viewset::PairMode::SameSided);
    } else if (options.mode == "cross_sided") {
        pairs = viewset::make_pairs(stereo_sequence(generated_ids),
                                    viewset::PairMode::CrossSided);
    } else {
        throw std::invalid_argument("unknown pairing mode: " + options.mode);
    }

    // index available match files by their stated pair
    std::map<std::pair<std::string, std::string>, viewset::MatchSet> available;
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(options.matches_dir)) {
        if (entry.path().extension() == ".json") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    for (const fs::path& file : files) {
        viewset::MatchSet matches = viewset::load_match_set(file.string());
        available.emplace(matches.pair, std::move(matches));
    }

    std::vector<viewset::MatchSet> selected;
    for (const auto& pair : pairs) {
        auto it = available.find(pair);
        if (it == available.end()) {
            std::cout << "skipped," << pair.first << ',' << pair.second
                      << ",missing match file\n";
            continue;
        }
        selected.push_back(it->second);
    }

    const viewset::TSEDReport report =
        viewset::tsed_evaluate(selected, cameras, {options.t_matches, 2.0},
                               parse_sweep(options.sweep));

    std::cout << std::setprecision(17);
    for (const viewset::PairReport& pair : report.per_pair) {
        std::cout << "pair," << pair.pair.first << ',' << pair.pair.second << ','
                  << pair.count << ',';
        if (pair.median) {
            std::cout << *pair.median;
        } else {
            std::cout << "nan";
        }
        std::cout << '\n';
    }

    std::ofstream out = open_output(options.out);
    out << "threshold,percent\n" << std::setprecision(17);
    for (std::size_t i = 0; i < report.thresholds.size(); ++i) {
        out << report.thresholds[i] << ',' << report.aggregate_percent[i] << '\n';
    }
}

struct EncodeOptions {
    std::string trajectory;
    std::string view;
    std::string out;
    int frequencies = 8;
    double origin_scale = 1.0;
};

void run_encode_rays(const EncodeOptions& options) {
    const std::vector<viewset::PosedView> trajectory =
        viewset::load_trajectory(options.trajectory);
    const viewset::PosedView* found = nullptr;
    for (const viewset::PosedView& view : trajectory) {
        if (view.id == options.view) found = &view;
    }
    if (!found) {
        throw std::invalid_argument("unknown view id: " + options.view);
    }
    const viewset::EncodedRays encoded =
        viewset::fourier_encode(viewset::build_ray_map(found->camera, found->id),
                                options.frequencies, options.origin_scale);
    std::ofstream out = open_output(options.out);
    viewset::write_encoded_rays(encoded, out);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Set-based novel view generation toolkit"};
    app.require_subcommand(1);

    PlanOptions plan_options;
    CLI::App* plan = app.add_subcommand("plan", "build a generation plan");
    plan->add_option("--trajectory", plan_options.trajectory)->required();
    plan->add_option("--strategy", plan_options.strategy)->required();
    plan->add_option("--out", plan_options.out)->required();
    plan->add_option("--spacing", plan_options.spacing);
    plan->add_option("--chunk", plan_options.chunk);
    plan->add_option("--cond-count", plan_options.cond_count);
    plan->add_option("--keyframes", plan_options.keyframes);
    plan->add_option("--group-size", plan_options.group_size);
    plan->add_option("--rotation-weight", plan_options.rotation_weight);
    plan->callback([&] { run_plan(plan_options); });

    std::string validate_path;
    CLI::App* validate = app.add_subcommand("validate", "check a plan file");
    validate->add_option("--plan", validate_path)->required();
    validate->callback([&] { run_validate(validate_path); });

    ExperimentOptions experiment_options;
    std::size_t window_flag = 0;
    CLI::App* experiment =
        app.add_subcommand("experiment", "run a seeded sampling study");
    experiment->add_option("--config", experiment_options.config)->required();
    experiment->add_option("--out", experiment_options.out);
    experiment->add_option("--seeds", experiment_options.seeds);
    CLI::Option* window_option = experiment->add_option("--window", window_flag);
    experiment->callback([&] {
        if (window_option->count() > 0) experiment_options.window = window_flag;
        run_experiment_command(experiment_options);
    });

    TsedOptions tsed_options;
    CLI::App* tsed = app.add_subcommand("tsed", "evaluate epipolar consistency");
    tsed->add_option("--matches", tsed_options.matches_dir)->required();
    tsed->add_option("--trajectory", tsed_options.trajectory)->required();
    tsed->add_option("--mode", tsed_options.mode);
    tsed->add_option("--t-matches", tsed_options.t_matches);
    tsed->add_option("--sweep", tsed_options.sweep);
    tsed->add_option("--out", tsed_options.out)->required();
    tsed->callback([&] { run_tsed(tsed_options); });

    EncodeOptions encode_options;
    CLI::App* encode = app.add_subcommand("encode-rays", "export encoded rays");
    encode->add_option("--trajectory", encode_options.trajectory)->required();
    encode->add_option("--view", encode_options.view)->required();
    encode->add_option("--freqs", encode_options.frequencies);
    encode->add_option("--origin-scale", encode_options.origin_scale);
    encode->add_option("--out", encode_options.out)->required();
    encode->callback([&] { run_encode_rays(encode_options); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kParseExit;
    } catch (const viewset::ParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kParseExit;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kValidationExit;
    } catch (const std::out_of_range& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kValidationExit;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kRuntimeExit;
    }
    return 0;
}

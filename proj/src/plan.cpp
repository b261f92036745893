#include "viewset/plan.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <set>
#include <stdexcept>

namespace viewset {

namespace {

std::map<std::string, ViewSpec> index_views(const std::vector<ViewSpec>& views) {
    std::map<std::string, ViewSpec> indexed;
    for (const ViewSpec& view : views) {
        if (!indexed.emplace(view.id, view).second) {
            throw std::invalid_argument("duplicate view id: " + view.id);
        }
    }
    return indexed;
}

// Observed views must form a non-empty prefix of the sequence.
std::size_t observed_prefix(const std::vector<ViewSpec>& views) {
    std::size_t count = 0;
    while (count < views.size() && views[count].role == ViewRole::Observed) {
        ++count;
    }
    for (std::size_t i = count; i < views.size(); ++i) {
        if (views[i].role == ViewRole::Observed) {
            throw std::invalid_argument("observed views must precede generated ones");
        }
    }
    if (count == 0) {
        throw std::invalid_argument("sequence must start with an observed view");
    }
    return count;
}

}  // namespace

GenerationPlan plan_chain(const std::vector<ViewSpec>& ordered_views) {
    if (ordered_views.empty()) {
        throw std::invalid_argument("empty view sequence");
    }
    if (ordered_views.front().role != ViewRole::Observed) {
        throw std::invalid_argument("chain must start with an observed view");
    }
    for (std::size_t i = 1; i < ordered_views.size(); ++i) {
        if (ordered_views[i].role != ViewRole::Generated) {
            throw std::invalid_argument("chain views after the first must be generated");
        }
    }

    GenerationPlan plan;
    plan.views = index_views(ordered_views);
    for (std::size_t i = 1; i < ordered_views.size(); ++i) {
        plan.stages.push_back(Stage{{ordered_views[i].id}, {ordered_views[i - 1].id}});
    }
    return plan;
}

GenerationPlan plan_keyframed(const std::vector<ViewSpec>& ordered_views,
                              int spacing, int keyframe_chunk, int cond_count) {
    if (spacing < 1 || keyframe_chunk < 1 || cond_count < 1) {
        throw std::invalid_argument("keyframed plan parameters must be >= 1");
    }
    if (ordered_views.empty()) {
        throw std::invalid_argument("empty view sequence");
    }
    const std::size_t num_observed = observed_prefix(ordered_views);

    GenerationPlan plan;
    plan.views = index_views(ordered_views);

    std::vector<std::string> observed_ids;
    for (std::size_t i = 0; i < num_observed; ++i) {
        observed_ids.push_back(ordered_views[i].id);
    }

    // Keyframes are every (spacing+1)-th generated view, counted 1-based.
    const int stride = spacing + 1;
    std::vector<std::size_t> keyframe_pos;   // positions in ordered_views
    std::vector<std::size_t> inbetween_pos;
    for (std::size_t g = 0; num_observed + g < ordered_views.size(); ++g) {
        const std::size_t pos = num_observed + g;
        if ((g + 1) % static_cast<std::size_t>(stride) == 0) {
            keyframe_pos.push_back(pos);
        } else {
            inbetween_pos.push_back(pos);
        }
    }

    // Keyframe chunks, set-autoregressively: observed views plus previous chunk.
    std::vector<std::string> previous_chunk;
    for (std::size_t start = 0; start < keyframe_pos.size();
         start += static_cast<std::size_t>(keyframe_chunk)) {
        const std::size_t stop =
            std::min(start + static_cast<std::size_t>(keyframe_chunk), keyframe_pos.size());
        Stage stage;
        stage.condition = observed_ids;
        stage.condition.insert(stage.condition.end(), previous_chunk.begin(),
                               previous_chunk.end());
        for (std::size_t i = start; i < stop; ++i) {
            stage.generate.push_back(ordered_views[keyframe_pos[i]].id);
        }
        previous_chunk = stage.generate;
        plan.stages.push_back(std::move(stage));
    }

    // Candidate conditioners for in-betweens: observed views and keyframes.
    std::vector<std::size_t> candidate_pos;
    for (std::size_t i = 0; i < num_observed; ++i) candidate_pos.push_back(i);
    candidate_pos.insert(candidate_pos.end(), keyframe_pos.begin(), keyframe_pos.end());

    // Contiguous runs of in-betweens become one stage each, conditioned on
    // the cond_count candidates closest in sequence position.
    std::size_t run_start = 0;
    while (run_start < inbetween_pos.size()) {
        std::size_t run_stop = run_start + 1;
        while (run_stop < inbetween_pos.size() &&
               inbetween_pos[run_stop] == inbetween_pos[run_stop - 1] + 1) {
            ++run_stop;
        }

        std::vector<std::pair<std::size_t, std::size_t>> ranked;  // (distance, pos)
        for (std::size_t cand : candidate_pos) {
            std::size_t best = std::numeric_limits<std::size_t>::max();
            for (std::size_t i = run_start; i < run_stop; ++i) {
                const std::size_t member = inbetween_pos[i];
                const std::size_t dist =
                    cand > member ? cand - member : member - cand;
                best = std::min(best, dist);
            }
            ranked.emplace_back(best, cand);
        }
        std::sort(ranked.begin(), ranked.end());

        Stage stage;
        for (std::size_t i = run_start; i < run_stop; ++i) {
            stage.generate.push_back(ordered_views[inbetween_pos[i]].id);
        }
        const std::size_t take =
            std::min(static_cast<std::size_t>(cond_count), ranked.size());
        for (std::size_t i = 0; i < take; ++i) {
            stage.condition.push_back(ordered_views[ranked[i].second].id);
        }
        plan.stages.push_back(std::move(stage));
        run_start = run_stop;
    }
    return plan;
}

GenerationPlan plan_grouped(const std::vector<std::vector<std::string>>& groups,
                            const std::vector<std::string>& observed) {
    GenerationPlan plan;
    for (const std::string& id : observed) {
        if (!plan.views.emplace(id, ViewSpec{id, std::nullopt, ViewRole::Observed}).second) {
            throw std::invalid_argument("duplicate observed id: " + id);
        }
    }
    std::vector<std::string> previous = observed;
    for (const auto& group : groups) {
        if (group.empty()) {
            throw std::invalid_argument("groups must be non-empty");
        }
        for (const std::string& id : group) {
            if (!plan.views.emplace(id, ViewSpec{id, std::nullopt, ViewRole::Generated}).second) {
                throw std::invalid_argument("overlapping groups: id " + id);
            }
        }
        plan.stages.push_back(Stage{group, previous});
        previous = group;
    }
    return plan;
}

GenerationPlan plan_zigzag(const std::vector<StereoPairIds>& stereo_pairs,
                           const std::vector<std::string>& observed) {
    GenerationPlan plan;
    for (const std::string& id : observed) {
        if (!plan.views.emplace(id, ViewSpec{id, std::nullopt, ViewRole::Observed}).second) {
            throw std::invalid_argument("duplicate observed id: " + id);
        }
    }
    std::vector<std::string> previous = observed;
    for (const StereoPairIds& pair : stereo_pairs) {
        for (const std::string& id : {pair.right, pair.left}) {
            if (!plan.views.emplace(id, ViewSpec{id, std::nullopt, ViewRole::Generated}).second) {
                throw std::invalid_argument("overlapping stereo pairs: id " + id);
            }
            plan.stages.push_back(Stage{{id}, previous});
            previous = {id};
        }
    }
    return plan;
}

double camera_distance(const Camera& a, const Camera& b, double rotation_weight) {
    if (rotation_weight < 0.0) {
        throw std::invalid_argument("rotation weight must be non-negative");
    }
    const double translation = (camera_center(a) - camera_center(b)).norm();
    const double cos_angle = std::clamp(
        ((a.rotation() * b.rotation().transpose()).trace() - 1.0) / 2.0, -1.0, 1.0);
    return translation + rotation_weight * std::acos(cos_angle);
}

std::vector<std::size_t> select_keyframes(const std::vector<Camera>& poses,
                                          std::size_t given_index,
                                          std::size_t count,
                                          double rotation_weight) {
    if (count < 1 || count > poses.size()) {
        throw std::invalid_argument("keyframe count out of range");
    }
    if (given_index >= poses.size()) {
        throw std::out_of_range("given index out of range");
    }

    std::vector<std::size_t> selected{given_index};
    std::vector<double> min_dist(poses.size(), std::numeric_limits<double>::infinity());
    std::vector<bool> taken(poses.size(), false);
    taken[given_index] = true;

    while (selected.size() < count) {
        const std::size_t last = selected.back();
        for (std::size_t i = 0; i < poses.size(); ++i) {
            if (!taken[i]) {
                min_dist[i] = std::min(min_dist[i],
                                       camera_distance(poses[i], poses[last], rotation_weight));
            }
        }
        std::size_t best = poses.size();
        double best_dist = -1.0;
        for (std::size_t i = 0; i < poses.size(); ++i) {
            if (!taken[i] && min_dist[i] > best_dist) {
                best_dist = min_dist[i];
                best = i;
            }
        }
        selected.push_back(best);
        taken[best] = true;
    }
    return selected;
}

GenerationPlan plan_unordered(const std::vector<ViewSpec>& views,
                              std::size_t keyframe_count, std::size_t cond_size,
                              double rotation_weight) {
    if (keyframe_count < 1 || cond_size < 1) {
        throw std::invalid_argument("unordered plan parameters must be >= 1");
    }
    std::size_t observed_index = views.size();
    std::vector<Camera> poses;
    poses.reserve(views.size());
    for (std::size_t i = 0; i < views.size(); ++i) {
        if (!views[i].camera) {
            throw std::invalid_argument("unordered plan requires a camera per view: " +
                                        views[i].id);
        }
        poses.push_back(*views[i].camera);
        if (views[i].role == ViewRole::Observed) {
            if (observed_index != views.size()) {
                throw std::invalid_argument("unordered plan takes exactly one observed view");
            }
            observed_index = i;
        }
    }
    if (observed_index == views.size()) {
        throw std::invalid_argument("unordered plan takes exactly one observed view");
    }
    if (keyframe_count + 1 > views.size()) {
        throw std::invalid_argument("keyframe count exceeds the number of views");
    }

    GenerationPlan plan;
    plan.views = index_views(views);

    const std::vector<std::size_t> seeded =
        select_keyframes(poses, observed_index, keyframe_count + 1, rotation_weight);
    const std::vector<std::size_t> keyframes(seeded.begin() + 1, seeded.end());

    Stage keyframe_stage;
    for (std::size_t k : keyframes) keyframe_stage.generate.push_back(views[k].id);
    keyframe_stage.condition.push_back(views[observed_index].id);
    plan.stages.push_back(std::move(keyframe_stage));

    // Order the remaining views farthest-first against everything already
    // scheduled, then emit them in stages of cond_size.
    std::vector<bool> scheduled(views.size(), false);
    scheduled[observed_index] = true;
    for (std::size_t k : keyframes) scheduled[k] = true;

    std::vector<double> min_dist(views.size(), std::numeric_limits<double>::infinity());
    for (std::size_t i = 0; i < views.size(); ++i) {
        if (scheduled[i]) continue;
        for (std::size_t s = 0; s < views.size(); ++s) {
            if (scheduled[s]) {
                min_dist[i] = std::min(min_dist[i],
                                       camera_distance(poses[i], poses[s], rotation_weight));
            }
        }
    }

    std::vector<std::size_t> order;
    for (std::size_t remaining = views.size() - keyframes.size() - 1; remaining > 0;
         --remaining) {
        std::size_t best = views.size();
        double best_dist = -1.0;
        for (std::size_t i = 0; i < views.size(); ++i) {
            if (!scheduled[i] && min_dist[i] > best_dist) {
                best_dist = min_dist[i];
                best = i;
            }
        }
        order.push_back(best);
        scheduled[best] = true;
        for (std::size_t i = 0; i < views.size(); ++i) {
            if (!scheduled[i]) {
                min_dist[i] = std::min(min_dist[i],
                                       camera_distance(poses[i], poses[best], rotation_weight));
            }
        }
    }

    std::vector<std::size_t> available{observed_index};
    available.insert(available.end(), keyframes.begin(), keyframes.end());
    for (std::size_t start = 0; start < order.size(); start += cond_size) {
        const std::size_t stop = std::min(start + cond_size, order.size());
        Stage stage;
        std::set<std::size_t> condition;
        for (std::size_t i = start; i < stop; ++i) {
            stage.generate.push_back(views[order[i]].id);
            std::vector<std::pair<double, std::size_t>> ranked;
            for (std::size_t a : available) {
                ranked.emplace_back(
                    camera_distance(poses[order[i]], poses[a], rotation_weight), a);
            }
            std::sort(ranked.begin(), ranked.end());
            const std::size_t take = std::min(cond_size, ranked.size());
            for (std::size_t r = 0; r < take; ++r) {
                condition.insert(ranked[r].second);
            }
        }
        for (std::size_t c : condition) stage.condition.push_back(views[c].id);
        plan.stages.push_back(std::move(stage));
        for (std::size_t i = start; i < stop; ++i) available.push_back(order[i]);
    }
    return plan;
}

std::vector<Violation> validate(const GenerationPlan& plan) {
    std::vector<Violation> violations;
    std::set<std::string> generated_so_far;
    std::set<std::string> observed;
    for (const auto& [id, view] : plan.views) {
        if (view.role == ViewRole::Observed) observed.insert(id);
    }

    for (std::size_t s = 0; s < plan.stages.size(); ++s) {
        const Stage& stage = plan.stages[s];
        const int stage_index = static_cast<int>(s);
        if (stage.generate.empty()) {
            violations.push_back({stage_index, "empty generate set"});
        }

        std::set<std::string> stage_generate;
        for (const std::string& id : stage.generate) {
            if (!plan.views.count(id)) {
                violations.push_back({stage_index, "unknown generated id: " + id});
                continue;
            }
            if (!stage_generate.insert(id).second) {
                violations.push_back({stage_index, "id repeated in generate set: " + id});
                continue;
            }
            if (observed.count(id)) {
                violations.push_back({stage_index, "observed view in generate set: " + id});
            }
            if (generated_so_far.count(id)) {
                violations.push_back(
                    {stage_index, "id generated in an earlier stage: " + id});
            }
        }

        std::set<std::string> stage_condition;
        for (const std::string& id : stage.condition) {
            if (!plan.views.count(id)) {
                violations.push_back({stage_index, "unknown conditioning id: " + id});
                continue;
            }
            if (!stage_condition.insert(id).second) {
                violations.push_back({stage_index, "id repeated in condition set: " + id});
                continue;
            }
            if (stage_generate.count(id)) {
                violations.push_back(
                    {stage_index, "id both generated and conditioned on: " + id});
            } else if (!observed.count(id) && !generated_so_far.count(id)) {
                violations.push_back(
                    {stage_index, "conditioning on a view not yet available: " + id});
            }
        }
        generated_so_far.insert(stage_generate.begin(), stage_generate.end());
    }

    for (const auto& [id, view] : plan.views) {
        if (view.role == ViewRole::Generated && !generated_so_far.count(id)) {
            violations.push_back({-1, "generated view never scheduled: " + id});
        }
    }
    return violations;
}

DepthReport depth(const GenerationPlan& plan) {
    const std::vector<Violation> violations = validate(plan);
    if (!violations.empty()) {
        throw std::invalid_argument("invalid plan: " + violations.front().message);
    }

    DepthReport report;
    for (const auto& [id, view] : plan.views) {
        if (view.role == ViewRole::Observed) report.depth[id] = 0;
    }
    for (const Stage& stage : plan.stages) {
        int stage_depth = 0;
        if (!stage.condition.empty()) {
            int nearest = std::numeric_limits<int>::max();
            for (const std::string& id : stage.condition) {
                nearest = std::min(nearest, report.depth.at(id));
            }
            stage_depth = 1 + nearest;
        }
        for (const std::string& id : stage.generate) {
            report.depth[id] = stage_depth;
        }
    }
    report.max_depth = 0;
    for (const auto& [id, d] : report.depth) {
        report.max_depth = std::max(report.max_depth, d);
    }
    return report;
}

}  // namespace viewset

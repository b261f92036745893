#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "viewset/geometry.hpp"

namespace viewset {

enum class ViewRole { Observed, Generated };

/// One view in a generation plan. The camera is optional: purely structural
/// constructors (grouped, zigzag) work on identifiers alone, while the
/// pose-driven ones (keyframed, unordered) require it.
struct ViewSpec {
    std::string id;
    std::optional<Camera> camera;
    ViewRole role = ViewRole::Generated;
};

/// One set-autoregression step: sample every view in `generate` jointly,
/// conditioned on the views in `condition`.
struct Stage {
    std::vector<std::string> generate;
    std::vector<std::string> condition;
};

/// Ordered partition of the generated views into stages with conditioning
/// sets drawn from observed views and earlier stages.
struct GenerationPlan {
    std::map<std::string, ViewSpec> views;
    std::vector<Stage> stages;
};

struct DepthReport {
    std::map<std::string, int> depth;
    int max_depth = 0;
};

struct Violation {
    int stage;  // -1 for plan-level problems
    std::string message;
};

/// First-order autoregression: each view conditioned on its predecessor.
/// The first view must be observed and all others generated.
GenerationPlan plan_chain(const std::vector<ViewSpec>& ordered_views);

/// Keyframes (every (spacing+1)-th generated view) are sampled first in
/// chunks of keyframe_chunk, each chunk conditioned on the observed views
/// plus the previous chunk. The remaining views are grouped per keyframe
/// interval and conditioned on the cond_count nearest of {observed views,
/// keyframes}, measured by sequence position.
GenerationPlan plan_keyframed(const std::vector<ViewSpec>& ordered_views,
                              int spacing, int keyframe_chunk, int cond_count);

/// Set-autoregression over explicit groups: stage i generates groups[i]
/// conditioned on groups[i-1] (the observed set for the first stage).
GenerationPlan plan_grouped(const std::vector<std::vector<std::string>>& groups,
                            const std::vector<std::string>& observed);

struct StereoPairIds {
    std::string right;
    std::string left;
};

/// Ordered single-view baseline over stereo pairs: R1, L1, R2, L2, ... with
/// each view conditioned on the immediately preceding one.
GenerationPlan plan_zigzag(const std::vector<StereoPairIds>& stereo_pairs,
                           const std::vector<std::string>& observed);

/// Translation distance plus rotation_weight times the geodesic rotation
/// angle (radians) between the two poses.
double camera_distance(const Camera& a, const Camera& b, double rotation_weight);

/// Greedy max-min (farthest point) selection seeded at given_index; ties go
/// to the lowest index. Returns `count` indices into `poses` in pick order.
std::vector<std::size_t> select_keyframes(const std::vector<Camera>& poses,
                                          std::size_t given_index,
                                          std::size_t count,
                                          double rotation_weight);

/// Plan for view sets with no natural order: keyframe_count keyframes are
/// picked farthest-first from the single observed view and generated
/// together; the rest follow in farthest-first order, emitted in stages of
/// cond_size views, each stage conditioned on its members' cond_size nearest
/// previously available views.
GenerationPlan plan_unordered(const std::vector<ViewSpec>& views,
                              std::size_t keyframe_count, std::size_t cond_size,
                              double rotation_weight);

/// Checks every structural invariant; an empty result means the plan is
/// feasible in the stated stage order.
std::vector<Violation> validate(const GenerationPlan& plan);

/// Minimum conditional-generation path length from the observed views,
/// computed stage by stage. Views generated with no conditioning get 0.
/// Throws if the plan does not validate.
DepthReport depth(const GenerationPlan& plan);

}  // namespace viewset

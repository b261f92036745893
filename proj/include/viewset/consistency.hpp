#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "viewset/geometry.hpp"

namespace viewset {

/// Matched pixel coordinates between two views.
struct MatchSet {
    std::pair<std::string, std::string> pair;
    std::vector<std::pair<Eigen::Vector2d, Eigen::Vector2d>> matches;
};

struct TSEDConfig {
    std::size_t t_matches = 10;
    double t_error = 2.0;  // pixels
};

/// Symmetric epipolar distance in pixels: the mean of the two point-to-line
/// distances under F and F^T. Points at an epipole give +infinity.
double sed(const Eigen::Matrix3d& f, const Eigen::Vector2d& x_a,
           const Eigen::Vector2d& x_b);

struct PairVerdict {
    bool consistent = false;
    std::optional<double> median;  // absent when there are no matches
    std::size_t count = 0;
};

/// A pair is consistent when it has at least t_matches matches and the
/// median SED is below t_error. Even-count medians average the middle two;
/// infinite distances sort last and dominate only when they are a majority.
PairVerdict tsed_pair(const MatchSet& matches, const Eigen::Matrix3d& f,
                      const TSEDConfig& config);

enum class PairMode { Adjacent, FirstLast, SameSided, CrossSided };

struct StereoFramePair {
    std::string right;
    std::string left;
};

/// Pairs over an ordered trajectory: (i, i+1) for Adjacent, the single
/// (first, last) pair for FirstLast. Stereo modes reject this overload.
std::vector<std::pair<std::string, std::string>> make_pairs(
    const std::vector<std::string>& ordered_ids, PairMode mode);

/// Pairs over a stereo sequence: SameSided gives (L_i, L_i+1) and
/// (R_i, R_i+1); CrossSided gives (L_i, R_i+1) and (R_i, L_i+1).
std::vector<std::pair<std::string, std::string>> make_pairs(
    const std::vector<StereoFramePair>& sequence, PairMode mode);

struct PairReport {
    std::pair<std::string, std::string> pair;
    std::optional<double> median;
    std::size_t count = 0;
    std::vector<bool> consistent;  // one flag per sweep threshold
};

struct TSEDReport {
    std::vector<double> thresholds;
    std::vector<PairReport> per_pair;
    std::vector<double> aggregate_percent;  // per threshold
};

std::vector<double> default_threshold_sweep();  // 1.0 to 4.0, step 0.5

/// Evaluates every match set against the pose-implied fundamental matrix and
/// aggregates the share of consistent pairs per threshold.
TSEDReport tsed_evaluate(const std::vector<MatchSet>& match_sets,
                         const std::map<std::string, Camera>& cameras,
                         const TSEDConfig& config,
                         const std::vector<double>& threshold_sweep);

}  // namespace viewset

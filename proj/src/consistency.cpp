#include "viewset/consistency.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace viewset {

namespace {

double point_line_distance(const Eigen::Vector3d& line, const Eigen::Vector2d& point) {
    const double norm = std::hypot(line.x(), line.y());
    if (norm < 1e-15) {
        return std::numeric_limits<double>::infinity();
    }
    return std::abs(line.x() * point.x() + line.y() * point.y() + line.z()) / norm;
}

std::optional<double> median_of(std::vector<double> values) {
    if (values.empty()) return std::nullopt;
    std::sort(values.begin(), values.end());
    const std::size_t mid = values.size() / 2;
    if (values.size() % 2 == 1) return values[mid];
    return 0.5 * (values[mid - 1] + values[mid]);
}

}  // namespace

double sed(const Eigen::Matrix3d& f, const Eigen::Vector2d& x_a,
           const Eigen::Vector2d& x_b) {
    if (f.norm() < 1e-15) {
        throw std::invalid_argument("fundamental matrix is zero");
    }
    const Eigen::Vector3d ha(x_a.x(), x_a.y(), 1.0);
    const Eigen::Vector3d hb(x_b.x(), x_b.y(), 1.0);
    // spelled-out products keep sed(F, a, b) == sed(F^T, b, a) bit-exact
    Eigen::Vector3d line_b, line_a;
    for (int i = 0; i < 3; ++i) {
        line_b[i] = f(i, 0) * ha[0] + f(i, 1) * ha[1] + f(i, 2) * ha[2];
        line_a[i] = f(0, i) * hb[0] + f(1, i) * hb[1] + f(2, i) * hb[2];
    }
    return 0.5 * (point_line_distance(line_b, x_b) + point_line_distance(line_a, x_a));
}

PairVerdict tsed_pair(const MatchSet& matches, const Eigen::Matrix3d& f,
                      const TSEDConfig& config) {
    PairVerdict verdict;
    verdict.count = matches.matches.size();
    std::vector<double> errors;
    errors.reserve(matches.matches.size());
    for (const auto& [a, b] : matches.matches) {
        errors.push_back(sed(f, a, b));
    }
    verdict.median = median_of(std::move(errors));
    verdict.consistent = verdict.count >= config.t_matches && verdict.median &&
                         *verdict.median < config.t_error;
    return verdict;
}

std::vector<std::pair<std::string, std::string>> make_pairs(
    const std::vector<std::string>& ordered_ids, PairMode mode) {
    std::vector<std::pair<std::string, std::string>> pairs;
    switch (mode) {
        case PairMode::Adjacent:
            for (std::size_t i = 0; i + 1 < ordered_ids.size(); ++i) {
                pairs.emplace_back(ordered_ids[i], ordered_ids[i + 1]);
            }
            return pairs;
        case PairMode::FirstLast:
            if (ordered_ids.size() < 2) {
                throw std::invalid_argument("first/last pairing needs at least two views");
            }
            pairs.emplace_back(ordered_ids.front(), ordered_ids.back());
            return pairs;
        default:
            throw std::invalid_argument("stereo pairing modes need a stereo sequence");
    }
}

std::vector<std::pair<std::string, std::string>> make_pairs(
    const std::vector<StereoFramePair>& sequence, PairMode mode) {
    if (mode != PairMode::SameSided && mode != PairMode::CrossSided) {
        throw std::invalid_argument("trajectory pairing modes need an ordered id list");
    }
    std::vector<std::pair<std::string, std::string>> pairs;
    for (std::size_t i = 0; i + 1 < sequence.size(); ++i) {
        if (mode == PairMode::SameSided) {
            pairs.emplace_back(sequence[i].left, sequence[i + 1].left);
            pairs.emplace_back(sequence[i].right, sequence[i + 1].right);
        } else {
            pairs.emplace_back(sequence[i].left, sequence[i + 1].right);
            pairs.emplace_back(sequence[i].right, sequence[i + 1].left);
        }
    }
    return pairs;
}

std::vector<double> default_threshold_sweep() {
    return {1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0};
}

TSEDReport tsed_evaluate(const std::vector<MatchSet>& match_sets,
                         const std::map<std::string, Camera>& cameras,
                         const TSEDConfig& config,
                         const std::vector<double>& threshold_sweep) {
    TSEDReport report;
    report.thresholds = threshold_sweep;
    std::vector<std::size_t> consistent_counts(threshold_sweep.size(), 0);

    for (const MatchSet& matches : match_sets) {
        auto cam_a = cameras.find(matches.pair.first);
        auto cam_b = cameras.find(matches.pair.second);
        if (cam_a == cameras.end() || cam_b == cameras.end()) {
            throw std::invalid_argument("missing camera for pair (" +
                                        matches.pair.first + ", " +
                                        matches.pair.second + ")");
        }
        const Eigen::Matrix3d f = fundamental_matrix(cam_a->second, cam_b->second);

        PairReport entry;
        entry.pair = matches.pair;
        for (std::size_t i = 0; i < threshold_sweep.size(); ++i) {
            TSEDConfig sweep_config = config;
            sweep_config.t_error = threshold_sweep[i];
            const PairVerdict verdict = tsed_pair(matches, f, sweep_config);
            entry.median = verdict.median;
            entry.count = verdict.count;
            entry.consistent.push_back(verdict.consistent);
            if (verdict.consistent) ++consistent_counts[i];
        }
        report.per_pair.push_back(std::move(entry));
    }

    for (std::size_t count : consistent_counts) {
        report.aggregate_percent.push_back(
            report.per_pair.empty()
                ? 0.0
                : 100.0 * static_cast<double>(count) / report.per_pair.size());
    }
    return report;
}

}  // namespace viewset

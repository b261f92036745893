#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

namespace viewset {

/// Pinhole camera: intrinsics (zero skew) plus a world-to-camera rigid
/// transform x_cam = R x_world + t. Rotations are row-major 3x3 throughout.
class Camera {
public:
    Camera(double fx, double fy, double cx, double cy, int width, int height,
           const Eigen::Matrix3d& rotation, const Eigen::Vector3d& translation);

    double fx() const { return fx_; }
    double fy() const { return fy_; }
    double cx() const { return cx_; }
    double cy() const { return cy_; }
    int width() const { return width_; }
    int height() const { return height_; }
    const Eigen::Matrix3d& rotation() const { return rotation_; }
    const Eigen::Vector3d& translation() const { return translation_; }

    Eigen::Matrix3d intrinsics() const;
    Eigen::Matrix3d inverse_intrinsics() const;

private:
    double fx_, fy_, cx_, cy_;
    int width_, height_;
    Eigen::Matrix3d rotation_;
    Eigen::Vector3d translation_;
};

/// One pixel ray in world coordinates; direction is unit length.
struct Ray {
    Eigen::Vector3d origin;
    Eigen::Vector3d direction;
};

/// Rigid map applied to rays: origin -> R*origin + t, direction -> R*direction.
struct RigidTransform {
    Eigen::Matrix3d rotation;
    Eigen::Vector3d translation;
};

Ray apply(const RigidTransform& transform, const Ray& ray);

/// Per-pixel ray grid for one camera, row-major with entry (row v, col u)
/// holding the ray through pixel center (u + 0.5, v + 0.5).
class RayMap {
public:
    RayMap(std::string camera_id, const Camera& camera, int width, int height,
           std::vector<Ray> rays);

    const std::string& camera_id() const { return camera_id_; }
    const Camera& camera() const { return camera_; }
    int width() const { return width_; }
    int height() const { return height_; }
    const Ray& at(int row, int col) const { return rays_[static_cast<std::size_t>(row) * width_ + col]; }
    const std::vector<Ray>& rays() const { return rays_; }

private:
    std::string camera_id_;
    Camera camera_;
    int width_, height_;
    std::vector<Ray> rays_;
};

RayMap apply(const RigidTransform& transform, const RayMap& map);

/// Fourier features of a ray grid. Channel layout per pixel is
/// component-major over the 6 ray components (origin xyz, direction xyz);
/// within a component, frequencies f_k = 2^(k-1) in increasing order with
/// sin before cos: channel(c, k, s) = c*2K + 2k + s, s = 0 for sin.
class EncodedRays {
public:
    EncodedRays(int width, int height, std::vector<double> frequencies,
                std::vector<double> values);

    int width() const { return width_; }
    int height() const { return height_; }
    int channels() const { return static_cast<int>(frequencies_.size()) * 12; }
    const std::vector<double>& frequencies() const { return frequencies_; }
    const std::vector<double>& values() const { return values_; }
    double at(int row, int col, int channel) const;

private:
    int width_, height_;
    std::vector<double> frequencies_;
    std::vector<double> values_;
};

/// Camera center in world coordinates, tau = -R^T t.
Eigen::Vector3d camera_center(const Camera& camera);

/// World-space ray through pixel coordinates (u, v); direction is the
/// normalized R^T K^-1 [u v 1]^T.
Ray pixel_ray(const Camera& camera, double u, double v);

RayMap build_ray_map(const Camera& camera, const std::string& camera_id = "");

/// Encodes all six ray components through sin/cos at K frequencies
/// f_k = base_frequency * 2^(k-1). origin_scale rescales ray origins before
/// encoding so unbounded positions can be mapped into a low-aliasing range.
EncodedRays fourier_encode(const RayMap& map, int num_frequencies,
                           double origin_scale = 1.0,
                           double base_frequency = 1.0);

/// Rigid transform taking world rays into the reference camera's frame; the
/// reference's own rays land at the origin with intrinsics-only directions.
RigidTransform canonicalizing_transform(const Camera& reference);

/// Re-expresses every map relative to the camera of maps[reference_index].
std::vector<RayMap> canonicalize_set(const std::vector<RayMap>& maps,
                                     std::size_t reference_index);

/// Fundamental matrix mapping pixels of cam_a to epipolar lines in cam_b,
/// F = K_b^-T [t_rel]x R_rel K_a^-1, normalized to unit Frobenius norm.
/// Throws if the camera centers coincide.
Eigen::Matrix3d fundamental_matrix(const Camera& cam_a, const Camera& cam_b);

}  // namespace viewset

#pragma once

#include <random>

#include <Eigen/Dense>

#include "viewset/geometry.hpp"

namespace viewset::testing {

/// Uniform random rotation from a normalized quaternion.
inline Eigen::Matrix3d random_rotation(std::mt19937_64& rng) {
    std::normal_distribution<double> unit;
    Eigen::Quaterniond q(unit(rng), unit(rng), unit(rng), unit(rng));
    q.normalize();
    return q.toRotationMatrix();
}

inline Eigen::Vector3d random_vector(std::mt19937_64& rng, double scale = 1.0) {
    std::normal_distribution<double> unit;
    return Eigen::Vector3d(unit(rng), unit(rng), unit(rng)) * scale;
}

/// Camera with unit focal length and principal point at the image center;
/// with width = height = 2 the pixel frame matches normalized coordinates
/// shifted by one.
inline Camera simple_camera(const Eigen::Matrix3d& rotation,
                            const Eigen::Vector3d& translation, int size = 2) {
    return Camera(1.0, 1.0, size / 2.0, size / 2.0, size, size, rotation, translation);
}

inline Camera camera_at(const Eigen::Vector3d& center,
                        const Eigen::Matrix3d& rotation = Eigen::Matrix3d::Identity(),
                        int size = 2) {
    return Camera(1.0, 1.0, size / 2.0, size / 2.0, size, size, rotation,
                  -rotation * center);
}

inline Camera random_camera(std::mt19937_64& rng, double center_scale = 2.0) {
    std::uniform_real_distribution<double> focal(50.0, 200.0);
    std::uniform_real_distribution<double> principal(0.4, 0.6);
    const int width = 64, height = 48;
    const Eigen::Matrix3d rotation = random_rotation(rng);
    const Eigen::Vector3d center = random_vector(rng, center_scale);
    return Camera(focal(rng), focal(rng), principal(rng) * width,
                  principal(rng) * height, width, height, rotation,
                  -rotation * center);
}

/// The same camera observing a world rigidly moved by x' = R_g x + t_g.
inline Camera transform_world(const Camera& camera, const Eigen::Matrix3d& r_g,
                              const Eigen::Vector3d& t_g) {
    const Eigen::Matrix3d rotation = camera.rotation() * r_g.transpose();
    return Camera(camera.fx(), camera.fy(), camera.cx(), camera.cy(),
                  camera.width(), camera.height(), rotation,
                  camera.translation() - rotation * t_g);
}

inline Eigen::Matrix3d rot_z(double radians) {
    return Eigen::AngleAxisd(radians, Eigen::Vector3d::UnitZ()).toRotationMatrix();
}

/// Camera at `center` with its optical axis on `target`.
inline Camera look_at(const Eigen::Vector3d& center, const Eigen::Vector3d& target,
                      double focal = 60.0, int width = 64, int height = 48) {
    const Eigen::Vector3d forward = (target - center).normalized();
    Eigen::Vector3d up = Eigen::Vector3d::UnitY();
    if (std::abs(forward.dot(up)) > 0.99) up = Eigen::Vector3d::UnitX();
    const Eigen::Vector3d right = up.cross(forward).normalized();
    const Eigen::Vector3d down = forward.cross(right).normalized();
    Eigen::Matrix3d rotation;
    rotation.row(0) = right;
    rotation.row(1) = down;
    rotation.row(2) = forward;
    return Camera(focal, focal, width * 0.5, height * 0.5, width, height, rotation,
                  -rotation * center);
}

}  // namespace viewset::testing

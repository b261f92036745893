#include "viewset/geometry.hpp"

#include <cmath>
#include <stdexcept>

namespace viewset {

namespace {

constexpr double kOrthonormalTol = 1e-9;

void check_rotation(const Eigen::Matrix3d& rotation) {
    const Eigen::Matrix3d gram = rotation.transpose() * rotation;
    if ((gram - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() > kOrthonormalTol) {
        throw std::invalid_argument("rotation is not orthonormal");
    }
    if (std::abs(rotation.determinant() - 1.0) > kOrthonormalTol) {
        throw std::invalid_argument("rotation determinant is not +1");
    }
}

Eigen::Matrix3d cross_matrix(const Eigen::Vector3d& v) {
    Eigen::Matrix3d m;
    m << 0.0, -v.z(), v.y(),
         v.z(), 0.0, -v.x(),
         -v.y(), v.x(), 0.0;
    return m;
}

}  // namespace

Camera::Camera(double fx, double fy, double cx, double cy, int width, int height,
               const Eigen::Matrix3d& rotation, const Eigen::Vector3d& translation)
    : fx_(fx), fy_(fy), cx_(cx), cy_(cy), width_(width), height_(height),
      rotation_(rotation), translation_(translation) {
    if (width <= 0 || height <= 0) {
        throw std::invalid_argument("image dimensions must be positive");
    }
    if (!(fx > 0.0) || !(fy > 0.0)) {
        throw std::invalid_argument("focal lengths must be positive");
    }
    if (!(cx > 0.0 && cx < width) || !(cy > 0.0 && cy < height)) {
        throw std::invalid_argument("principal point must lie inside the image");
    }
    check_rotation(rotation);
}

Eigen::Matrix3d Camera::intrinsics() const {
    Eigen::Matrix3d k = Eigen::Matrix3d::Identity();
    k(0, 0) = fx_;
    k(1, 1) = fy_;
    k(0, 2) = cx_;
    k(1, 2) = cy_;
    return k;
}

Eigen::Matrix3d Camera::inverse_intrinsics() const {
    Eigen::Matrix3d k = Eigen::Matrix3d::Identity();
    k(0, 0) = 1.0 / fx_;
    k(1, 1) = 1.0 / fy_;
    k(0, 2) = -cx_ / fx_;
    k(1, 2) = -cy_ / fy_;
    return k;
}

Ray apply(const RigidTransform& transform, const Ray& ray) {
    return Ray{transform.rotation * ray.origin + transform.translation,
               transform.rotation * ray.direction};
}

RayMap::RayMap(std::string camera_id, const Camera& camera, int width, int height,
               std::vector<Ray> rays)
    : camera_id_(std::move(camera_id)), camera_(camera), width_(width),
      height_(height), rays_(std::move(rays)) {
    if (rays_.size() != static_cast<std::size_t>(width_) * height_) {
        throw std::invalid_argument("ray grid does not match its dimensions");
    }
}

RayMap apply(const RigidTransform& transform, const RayMap& map) {
    std::vector<Ray> rays;
    rays.reserve(map.rays().size());
    for (const Ray& ray : map.rays()) {
        rays.push_back(apply(transform, ray));
    }
    return RayMap(map.camera_id(), map.camera(), map.width(), map.height(), std::move(rays));
}

EncodedRays::EncodedRays(int width, int height, std::vector<double> frequencies,
                         std::vector<double> values)
    : width_(width), height_(height), frequencies_(std::move(frequencies)),
      values_(std::move(values)) {
    const std::size_t expected =
        static_cast<std::size_t>(width_) * height_ * frequencies_.size() * 12;
    if (values_.size() != expected) {
        throw std::invalid_argument("encoded grid does not match its dimensions");
    }
}

double EncodedRays::at(int row, int col, int channel) const {
    const int c = channels();
    return values_[(static_cast<std::size_t>(row) * width_ + col) * c + channel];
}

Eigen::Vector3d camera_center(const Camera& camera) {
    return -(camera.rotation().transpose() * camera.translation());
}

Ray pixel_ray(const Camera& camera, double u, double v) {
    const Eigen::Vector3d unnormalized =
        camera.rotation().transpose() *
        (camera.inverse_intrinsics() * Eigen::Vector3d(u, v, 1.0));
    const double norm = unnormalized.norm();
    if (norm < 1e-12) {
        throw std::invalid_argument("degenerate pixel ray direction");
    }
    return Ray{camera_center(camera), unnormalized / norm};
}

RayMap build_ray_map(const Camera& camera, const std::string& camera_id) {
    std::vector<Ray> rays;
    rays.reserve(static_cast<std::size_t>(camera.width()) * camera.height());
    for (int v = 0; v < camera.height(); ++v) {
        for (int u = 0; u < camera.width(); ++u) {
            rays.push_back(pixel_ray(camera, u + 0.5, v + 0.5));
        }
    }
    return RayMap(camera_id, camera, camera.width(), camera.height(), std::move(rays));
}

EncodedRays fourier_encode(const RayMap& map, int num_frequencies,
                           double origin_scale, double base_frequency) {
    if (num_frequencies < 1) {
        throw std::invalid_argument("need at least one frequency");
    }
    if (!(base_frequency > 0.0)) {
        throw std::invalid_argument("base frequency must be positive");
    }
    std::vector<double> frequencies(num_frequencies);
    for (int k = 0; k < num_frequencies; ++k) {
        frequencies[k] = base_frequency * std::pow(2.0, k);
    }

    std::vector<double> values;
    values.reserve(map.rays().size() * num_frequencies * 12);
    for (const Ray& ray : map.rays()) {
        const double components[6] = {
            ray.origin.x() * origin_scale, ray.origin.y() * origin_scale,
            ray.origin.z() * origin_scale, ray.direction.x(),
            ray.direction.y(),             ray.direction.z()};
        for (double component : components) {
            for (double f : frequencies) {
                const double phase = f * M_PI * component;
                values.push_back(std::sin(phase));
                values.push_back(std::cos(phase));
            }
        }
    }
    return EncodedRays(map.width(), map.height(), std::move(frequencies), std::move(values));
}

RigidTransform canonicalizing_transform(const Camera& reference) {
    return RigidTransform{reference.rotation(), reference.translation()};
}

std::vector<RayMap> canonicalize_set(const std::vector<RayMap>& maps,
                                     std::size_t reference_index) {
    if (reference_index >= maps.size()) {
        throw std::out_of_range("reference index out of range");
    }
    const RigidTransform transform =
        canonicalizing_transform(maps[reference_index].camera());
    std::vector<RayMap> canonical;
    canonical.reserve(maps.size());
    for (const RayMap& map : maps) {
        canonical.push_back(apply(transform, map));
    }
    return canonical;
}

Eigen::Matrix3d fundamental_matrix(const Camera& cam_a, const Camera& cam_b) {
    const Eigen::Matrix3d relative_rotation =
        cam_b.rotation() * cam_a.rotation().transpose();
    const Eigen::Vector3d relative_translation =
        cam_b.translation() - relative_rotation * cam_a.translation();
    if (relative_translation.norm() <= 1e-9) {
        throw std::invalid_argument(
            "camera centers coincide; epipolar geometry is undefined");
    }
    Eigen::Matrix3d f = cam_b.inverse_intrinsics().transpose() *
                        cross_matrix(relative_translation) * relative_rotation *
                        cam_a.inverse_intrinsics();
    return f / f.norm();
}

}  // namespace viewset

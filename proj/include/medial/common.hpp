#pragma once

#include <cstddef>
#include <functional>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace medial {

template <typename Scalar>
using Vector3 = Eigen::Matrix<Scalar, 3, 1>;
template <typename Scalar>
using Vector4 = Eigen::Matrix<Scalar, 4, 1>;
template <typename Scalar>
using Matrix3 = Eigen::Matrix<Scalar, 3, 3>;
template <typename Scalar>
using Matrix4 = Eigen::Matrix<Scalar, 4, 4>;

using Vec3 = Vector3<double>;
using Vec4 = Vector4<double>;
using Mat3 = Matrix3<double>;
using Mat4 = Matrix4<double>;

/// Relative geometric tolerance; multiplied by the bounding-box diagonal.
inline constexpr double kRelGeomEps = 1e-9;

/// Number of worker threads used by parallel_for. 0 selects hardware concurrency.
void set_worker_count(unsigned workers);
unsigned worker_count();

/// Runs fn(i) for i in [0, n). Work items must be independent; results are
/// identical for any worker count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace medial

#include <cmath>

#include "gprt/errors.hpp"
#include "gprt/splat.hpp"

namespace gprt {

Quat rotation_between(const Vec3& from, const Vec3& to) {
    if (!is_unit(from) || !is_unit(to))
        throw InvalidInput("rotation_between: inputs must be unit length");
    double c = dot(from, to);
    if (c < -1.0 + 1e-9)
        throw InvalidInput("rotation_between: antiparallel directions have no unique axis");
    Vec3 axis = cross(from, to);
    // q = (cos(t/2), sin(t/2)*axis) via the half-angle identity
    Quat q{1.0 + c, axis.x, axis.y, axis.z};
    return q.normalized();
}

Quat quat_from_matrix(const Mat3& m) {
    double trace = m.m[0][0] + m.m[1][1] + m.m[2][2];
    Quat q;
    if (trace > 0.0) {
        double s = std::sqrt(trace + 1.0) * 2.0;
        q = {0.25 * s, (m.m[2][1] - m.m[1][2]) / s, (m.m[0][2] - m.m[2][0]) / s,
             (m.m[1][0] - m.m[0][1]) / s};
    } else {
        int i = 0;
        if (m.m[1][1] > m.m[0][0]) i = 1;
        if (m.m[2][2] > m.m[i][i]) i = 2;
        int j = (i + 1) % 3, k = (i + 2) % 3;
        double s = std::sqrt(std::max(1e-300, m.m[i][i] - m.m[j][j] - m.m[k][k] + 1.0)) * 2.0;
        double v[4];
        v[0] = (m.m[k][j] - m.m[j][k]) / s;
        v[i + 1] = 0.25 * s;
        v[j + 1] = (m.m[j][i] + m.m[i][j]) / s;
        v[k + 1] = (m.m[k][i] + m.m[i][k]) / s;
        q = {v[0], v[1], v[2], v[3]};
    }
    return q.normalized();
}

Mat3 covariance_from_qs(const Quat& q, const Vec3& s) {
    Mat3 r = q.to_matrix();
    Mat3 m = r * Mat3::diagonal({s.x * s.x, s.y * s.y, s.z * s.z});
    return m * r.transposed();
}

ProjectedGaussian project_gaussian(const Camera& cam, const Gaussian3D& g) {
    if (!g.valid()) throw InvalidInput("project_gaussian: invalid gaussian");
    ProjectedGaussian out;
    Vec3 p = cam.world_to_cam(g.position);
    if (p.z <= cam.near_plane || p.z >= cam.far_plane) {
        out.culled = true;
        return out;
    }
    out.depth = p.z;
    out.mean_px = {cam.fx * p.x / p.z + cam.cx, cam.fy * p.y / p.z + cam.cy};

    Mat3 sigma = covariance_from_qs(g.rotation.normalized(), g.scale);
    Mat3 sigma_cam = cam.rot * sigma * cam.rot.transposed();

    // perspective Jacobian rows at the mean
    double inv_z = 1.0 / p.z;
    Vec3 j0{cam.fx * inv_z, 0.0, -cam.fx * p.x * inv_z * inv_z};
    Vec3 j1{0.0, cam.fy * inv_z, -cam.fy * p.y * inv_z * inv_z};

    Vec3 sj0 = sigma_cam * j0;
    Vec3 sj1 = sigma_cam * j1;
    out.cov_xx = dot(j0, sj0) + kCovLowPassFloor;
    out.cov_xy = dot(j0, sj1);
    out.cov_yy = dot(j1, sj1) + kCovLowPassFloor;
    return out;
}

}  // namespace gprt

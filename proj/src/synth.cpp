#include "gprt/synth.hpp"

#include <cmath>

#include "gprt/errors.hpp"
#include "gprt/parallel.hpp"
#include "gprt/sh.hpp"

namespace gprt {

namespace {

// Lat-long ellipsoid shell appended to the mesh.
void append_ellipsoid(GuideMesh& mesh, const Vec3& center, const Vec3& radii, int rings,
                      int segments) {
    int base = int(mesh.vertices.size());
    for (int r = 0; r <= rings; ++r) {
        double theta = kPi * r / rings;
        for (int s = 0; s < segments; ++s) {
            double phi = kTwoPi * s / segments;
            Vec3 unit{std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi),
                      std::cos(theta)};
            mesh.vertices.push_back(center + unit * radii);
        }
    }
    auto idx = [&](int r, int s) { return base + r * segments + (s % segments); };
    for (int r = 0; r < rings; ++r)
        for (int s = 0; s < segments; ++s) {
            if (r > 0) mesh.triangles.push_back({idx(r, s), idx(r + 1, s), idx(r, s + 1)});
            if (r < rings - 1)
                mesh.triangles.push_back({idx(r, s + 1), idx(r + 1, s), idx(r + 1, s + 1)});
        }
}

// Open tube along z from z0 down to z1.
void append_tube(GuideMesh& mesh, const Vec3& axis_center, double radius, double z0,
                 double z1, int rings, int segments) {
    int base = int(mesh.vertices.size());
    for (int r = 0; r <= rings; ++r) {
        double z = z0 + (z1 - z0) * r / rings;
        for (int s = 0; s < segments; ++s) {
            double phi = kTwoPi * s / segments;
            mesh.vertices.push_back(axis_center +
                                    Vec3{radius * std::cos(phi), radius * std::sin(phi), z});
        }
    }
    auto idx = [&](int r, int s) { return base + r * segments + (s % segments); };
    for (int r = 0; r < rings; ++r)
        for (int s = 0; s < segments; ++s) {
            mesh.triangles.push_back({idx(r, s), idx(r + 1, s), idx(r, s + 1)});
            mesh.triangles.push_back({idx(r, s + 1), idx(r + 1, s), idx(r + 1, s + 1)});
        }
}

void compute_vertex_normals(GuideMesh& mesh) {
    mesh.normals.assign(mesh.vertices.size(), Vec3{});
    for (const auto& t : mesh.triangles) {
        Vec3 fn = cross(mesh.vertices[t[1]] - mesh.vertices[t[0]],
                        mesh.vertices[t[2]] - mesh.vertices[t[0]]);
        for (int i : t) mesh.normals[i] += fn;
    }
    for (Vec3& n : mesh.normals) n = length(n) > 1e-12 ? normalize(n) : Vec3{0.0, 0.0, 1.0};
}

// Head above, shoulders below, neck blending in between.
Vec3 skin_weight_for(double z) {
    if (z >= -0.08) return {1.0, 0.0, 0.0};
    if (z >= -0.16) {
        double t = (-0.08 - z) / 0.08;
        return {1.0 - t, t, 0.0};
    }
    if (z >= -0.20) {
        double t = (-0.16 - z) / 0.04;
        return {0.0, 1.0 - t, t};
    }
    return {0.0, 0.0, 1.0};
}

}  // namespace

Avatar make_toy_head(int n_gaussians, std::uint64_t seed) {
    if (n_gaussians < 10) throw InvalidInput("make_toy_head: need at least 10 gaussians");
    Rng rng(seed);

    Avatar avatar;
    avatar.sh_order = 3;
    avatar.has_rig = true;

    GuideMesh& mesh = avatar.mesh;
    append_ellipsoid(mesh, {0.0, 0.0, 0.0}, {0.085, 0.09, 0.11}, 16, 24);      // skull
    append_tube(mesh, {-0.01, 0.0, 0.0}, 0.045, -0.09, -0.19, 4, 16);          // neck
    append_ellipsoid(mesh, {-0.01, 0.0, -0.24}, {0.09, 0.22, 0.055}, 8, 24);   // shoulders
    compute_vertex_normals(mesh);
    mesh.skin_weights.resize(mesh.vertices.size());
    for (size_t i = 0; i < mesh.vertices.size(); ++i)
        mesh.skin_weights[i] = skin_weight_for(mesh.vertices[i].z);
    mesh.neck_pivot = {-0.01, 0.0, -0.14};

    // area-weighted triangle CDF for anchor placement
    std::vector<double> cdf(mesh.triangles.size());
    double total_area = 0.0;
    for (size_t t = 0; t < mesh.triangles.size(); ++t) {
        const auto& tri = mesh.triangles[t];
        total_area += 0.5 * length(cross(mesh.vertices[tri[1]] - mesh.vertices[tri[0]],
                                         mesh.vertices[tri[2]] - mesh.vertices[tri[0]]));
        cdf[t] = total_area;
    }

    const double spacing = std::sqrt(total_area / n_gaussians);
    avatar.anchors.resize(n_gaussians);
    avatar.gaussians.resize(n_gaussians);
    avatar.transfer.resize(n_gaussians);

    for (int k = 0; k < n_gaussians; ++k) {
        double u = rng.uniform() * total_area;
        int tri = int(std::lower_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
        tri = std::min(tri, int(mesh.triangles.size()) - 1);
        double r1 = std::sqrt(rng.uniform()), r2 = rng.uniform();
        Anchor& a = avatar.anchors[k];
        a.triangle = tri;
        a.bary = {1.0 - r1, r1 * (1.0 - r2), r1 * r2};
        // offset components live in the (edge, normal, binormal) frame
        a.offset = {rng.uniform(-0.2, 0.2) * spacing, rng.uniform(0.2, 0.7) * spacing,
                    rng.uniform(-0.2, 0.2) * spacing};

        Gaussian3D& g = avatar.gaussians[k];
        double st = spacing * rng.uniform(0.5, 0.9);
        g.scale = {st, 0.35 * st, st};  // thin along the local normal (frame y)
        g.opacity = rng.uniform(0.6, 0.95);
        const auto& tv = mesh.triangles[tri];
        g.rotation = quat_from_matrix(
            triangle_frame(mesh.vertices[tv[0]], mesh.vertices[tv[1]], mesh.vertices[tv[2]]));

        TransferParams& t = avatar.transfer[k];
        Vec3 tone{0.7, 0.55, 0.45};
        t.albedo = {std::clamp(tone.x + rng.uniform(-0.15, 0.15), 0.05, 0.95),
                    std::clamp(tone.y + rng.uniform(-0.15, 0.15), 0.05, 0.95),
                    std::clamp(tone.z + rng.uniform(-0.15, 0.15), 0.05, 0.95)};
        t.roughness = rng.uniform(0.15, 0.6);
        t.visibility = rng.uniform(0.05, 0.45);
    }

    // rest-pose placement defines the stored gaussians and normals
    PosedMesh rest{mesh.vertices, mesh.normals};
    AnchoredGaussians anchored = anchor_gaussians(mesh, rest, avatar.anchors, avatar.gaussians);
    avatar.gaussians = std::move(anchored.gaussians);
    avatar.normals = std::move(anchored.normals);

    // ground-truth Lambertian diffuse transfer about the anchored normal
    const int nc = SHCoeffs::coeff_count(avatar.sh_order);
    for (int k = 0; k < n_gaussians; ++k) {
        SHCoeffs cc = clamped_cosine_coeffs(avatar.normals[k], avatar.sh_order);
        TransferParams& t = avatar.transfer[k];
        t.d_color.resize(std::min(nc, 4));
        for (int j = 0; j < int(t.d_color.size()); ++j) {
            double d = cc.at(j) / kPi;
            t.d_color[j] = {d, d, d};
        }
        t.d_mono.resize(std::max(0, nc - 4));
        for (int j = 0; j < int(t.d_mono.size()); ++j) t.d_mono[j] = cc.at(j + 4) / kPi;
    }

    // eye regions: gaussians near the two front patches rotate with gaze
    avatar.rig.rest_gaze_left = avatar.rig.rest_gaze_right = {1.0, 0.0, 0.0};
    avatar.rig.eye_center_left = {0.055, 0.035, 0.025};
    avatar.rig.eye_center_right = {0.055, -0.035, 0.025};
    for (int k = 0; k < n_gaussians; ++k) {
        if (length(avatar.gaussians[k].position - Vec3{0.082, 0.034, 0.024}) < 0.018)
            avatar.rig.eye_left.push_back(k);
        else if (length(avatar.gaussians[k].position - Vec3{0.082, -0.034, 0.024}) < 0.018)
            avatar.rig.eye_right.push_back(k);
    }
    return avatar;
}

std::vector<Camera> default_cameras(int count, int resolution, double distance) {
    if (count < 1) throw InvalidInput("default_cameras: need at least one camera");
    std::vector<Camera> cams;
    double focal = 1.4 * resolution;
    for (int i = 0; i < count; ++i) {
        // fan across the front, alternating a little elevation
        double az = count == 1 ? 0.0 : (-0.6 + 1.2 * i / (count - 1));
        double el = 0.15 * ((i % 3) - 1);
        Vec3 eye{distance * std::cos(az) * std::cos(el), distance * std::sin(az) * std::cos(el),
                 distance * std::sin(el) - 0.02};
        cams.push_back(Camera::look_at(eye, {0.0, 0.0, -0.02}, {0.0, 0.0, 1.0}, focal,
                                       resolution, resolution));
    }
    return cams;
}

OlatDataset make_olat_dataset(const Avatar& avatar, std::span<const Vec3> light_dirs,
                              std::span<const Camera> cameras, double intensity,
                              bool five_light_groups, std::uint64_t seed) {
    if (!avatar.valid()) throw InvalidInput("make_olat_dataset: invalid avatar");
    if (light_dirs.empty() || cameras.empty())
        throw InvalidInput("make_olat_dataset: need lights and cameras");

    OlatDataset data;
    data.seed = seed;
    data.cameras.assign(cameras.begin(), cameras.end());

    std::vector<int> order(light_dirs.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = int(i);
    const int group = five_light_groups ? 5 : 1;
    if (five_light_groups) {
        Rng rng(seed);
        for (size_t i = order.size(); i > 1; --i)
            std::swap(order[i - 1], order[size_t(rng.next_u64() % i)]);
    }

    RigPose rest;
    rest.gaze_left = avatar.rig.rest_gaze_left;
    rest.gaze_right = avatar.rig.rest_gaze_right;
    for (size_t g = 0; g + group <= order.size(); g += group) {
        PointLightSet lights;
        for (int j = 0; j < group; ++j) {
            lights.directions.push_back(normalize(light_dirs[order[g + j]]));
            lights.intensities.push_back({intensity, intensity, intensity});
        }
        LightEnvironment env = make_light_environment(lights, avatar.sh_order);
        for (size_t c = 0; c < cameras.size(); ++c) {
            OlatFrame frame;
            frame.camera = int(c);
            frame.lights = lights;
            RenderTarget rt = render_avatar(avatar, rest, env, cameras[c]);
            frame.target = std::move(rt.color);
            data.frames.push_back(std::move(frame));
        }
    }
    return data;
}

EnvQuadrature::EnvQuadrature(const EnvMap& env, int grid_h, int grid_w)
    : grid_h_(grid_h), grid_w_(grid_w) {
    if (!env.valid()) throw InvalidInput("EnvQuadrature: invalid env map");
    if (grid_h < 2 || grid_w < 2) throw InvalidInput("EnvQuadrature: grid too small");
    dirs_.resize(size_t(grid_h) * grid_w);
    radiance_dw_.resize(dirs_.size());
    parallel_for(0, grid_h, [&](std::int64_t y0, std::int64_t y1) {
        for (std::int64_t y = y0; y < y1; ++y) {
            double theta = kPi * (y + 0.5) / grid_h_;
            double dw = std::sin(theta) * (kPi / grid_h_) * (kTwoPi / grid_w_);
            for (int x = 0; x < grid_w_; ++x) {
                double phi = kTwoPi * (x + 0.5) / grid_w_;
                Vec3 dir{std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi),
                         std::cos(theta)};
                size_t i = size_t(y) * grid_w_ + x;
                dirs_[i] = dir;
                radiance_dw_[i] = env.sample(dir) * dw;
            }
        }
    });
}

Vec3 EnvQuadrature::shade(const Vec3& normal, const Vec3& albedo, double roughness,
                          double visibility, const Vec3& wo) const {
    if (!is_unit(normal)) throw InvalidInput("EnvQuadrature::shade: normal must be unit");
    Vec3 diffuse;
    for (size_t i = 0; i < dirs_.size(); ++i) {
        double c = dot(normal, dirs_[i]);
        if (c > 0.0) diffuse += radiance_dw_[i] * c;
    }
    Vec3 out = albedo * (diffuse / kPi);
    if (visibility > 0.0) {
        Vec3 axis = reflect_dir(wo, normal);
        double lam = roughness_to_sharpness(roughness);
        Vec3 spec;
        for (size_t i = 0; i < dirs_.size(); ++i)
            spec += radiance_dw_[i] * std::exp(lam * (dot(dirs_[i], axis) - 1.0));
        out += spec * visibility;
    }
    return out;
}

Vec3 EnvQuadrature::integral() const {
    Vec3 acc;
    for (const Vec3& r : radiance_dw_) acc += r;
    return acc;
}

Vec3 quadrature_shade(const Vec3& normal, const Vec3& albedo, double roughness,
                      double visibility, const EnvMap& env, const Vec3& wo, int grid_h,
                      int grid_w) {
    return EnvQuadrature(env, grid_h, grid_w).shade(normal, albedo, roughness, visibility, wo);
}

EnvMap make_random_envmap(std::uint64_t seed, int height, int n_lobes, double max_sharpness,
                          double base) {
    Rng rng(seed);
    std::vector<Vec3> axes(n_lobes);
    std::vector<Vec3> amps(n_lobes);
    std::vector<double> sharps(n_lobes);
    for (int l = 0; l < n_lobes; ++l) {
        axes[l] = rng.unit_vector();
        amps[l] = {rng.uniform(0.3, 2.0), rng.uniform(0.3, 2.0), rng.uniform(0.3, 2.0)};
        sharps[l] = rng.uniform(1.0, max_sharpness);
    }
    EnvMap env = EnvMap::constant(height, {base, base, base});
    for (int y = 0; y < env.height; ++y)
        for (int x = 0; x < env.width; ++x) {
            Vec3 dir = env.texel_direction(x, y);
            Vec3 v{base, base, base};
            for (int l = 0; l < n_lobes; ++l)
                v += amps[l] * std::exp(sharps[l] * (dot(dir, axes[l]) - 1.0));
            env.at(x, y) = v;
        }
    return env;
}

}  // namespace gprt

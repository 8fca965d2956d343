#pragma once

#include <array>
#include <filesystem>
#include <span>
#include <vector>

#include "gprt/math.hpp"
#include "gprt/splat.hpp"

namespace gprt {

// Skinned guide mesh the Gaussians are anchored on. Three bones
// (head, neck, shoulder); per-vertex weights sum to 1. The neck pivot is
// part of the rig data and ships with the mesh.
struct GuideMesh {
    std::vector<Vec3> vertices;                 // rest pose
    std::vector<std::array<int, 3>> triangles;
    std::vector<Vec3> skin_weights;             // (head, neck, shoulder)
    std::vector<Vec3> normals;                  // rest vertex normals
    Vec3 neck_pivot;

    bool valid() const;
};

struct RigPose {
    Vec3 gaze_left{0.0, 0.0, 1.0};
    Vec3 gaze_right{0.0, 0.0, 1.0};
    Vec3 neck_rotation;  // axis-angle, radians
};

// Barycentric anchor with a position offset in the triangle's tangent frame.
struct Anchor {
    int triangle = 0;
    Vec3 bary{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
    Vec3 offset;

    bool valid(int triangle_count) const;
};

struct PosedMesh {
    std::vector<Vec3> vertices;
    std::vector<Vec3> normals;
};

// Linear blend skinning: v' = sum_b w_b * T_b(v). Head and shoulder bones are
// the identity; the neck bone rotates about the pivot by the pose's axis-angle.
// Normals go through the blended rotation and are renormalized.
PosedMesh lbs_apply(const GuideMesh& mesh, const RigPose& pose);

// Deterministic per-triangle frame: columns (e1, n, e1 x n) with
// e1 = normalize(v1 - v0) and n the face normal.
Mat3 triangle_frame(const Vec3& v0, const Vec3& v1, const Vec3& v2);

struct AnchoredGaussians {
    std::vector<Gaussian3D> gaussians;
    std::vector<Vec3> normals;   // barycentric posed mesh normal per gaussian
    std::vector<char> skipped;   // 1 where the anchor triangle was degenerate
};

// Places each Gaussian at its barycentric surface point plus the
// frame-rotated offset; orientation is composed with the rest-to-posed frame
// rotation. Degenerate triangles are skipped (gaussian passed through
// unchanged and flagged).
AnchoredGaussians anchor_gaussians(const GuideMesh& rest, const PosedMesh& posed,
                                   std::span<const Anchor> anchors,
                                   std::span<const Gaussian3D> gaussians);

// Rigid rotation about `center` taking `rest_gaze` to `gaze`, applied to the
// selected gaussians and their normals in place.
void apply_gaze(std::span<Gaussian3D> gaussians, std::span<Vec3> normals,
                std::span<const int> indices, const Vec3& center,
                const Vec3& gaze, const Vec3& rest_gaze);

// OBJ geometry (v/vn/f). Missing normals are computed area-weighted.
GuideMesh load_obj(const std::filesystem::path& path);
void save_obj(const GuideMesh& mesh, const std::filesystem::path& path);

// JSON sidecar: skin weights, neck pivot, eye centers/rest gazes/index sets,
// anchors.
struct RigData {
    std::vector<Vec3> skin_weights;
    Vec3 neck_pivot;
    Vec3 eye_center_left, eye_center_right;
    Vec3 rest_gaze_left{0.0, 0.0, 1.0}, rest_gaze_right{0.0, 0.0, 1.0};
    std::vector<int> eye_left, eye_right;  // gaussian indices
    std::vector<Anchor> anchors;
};

RigData load_rig_json(const std::filesystem::path& path);
void save_rig_json(const RigData& rig, const std::filesystem::path& path);

}  // namespace gprt

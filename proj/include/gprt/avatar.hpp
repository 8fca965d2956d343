#pragma once

#include <filesystem>
#include <vector>

#include "gprt/lighting.hpp"
#include "gprt/rig.hpp"
#include "gprt/shading.hpp"
#include "gprt/splat.hpp"

namespace gprt {

struct RigMeta {
    Vec3 eye_center_left, eye_center_right;
    Vec3 rest_gaze_left{0.0, 0.0, 1.0}, rest_gaze_right{0.0, 0.0, 1.0};
    std::vector<int> eye_left, eye_right;  // gaussian indices
};

// A relightable Gaussian avatar: splat geometry in rest pose, per-Gaussian
// radiance transfer, and (optionally) the guide-mesh rig that poses it.
struct Avatar {
    int sh_order = 3;
    std::vector<Gaussian3D> gaussians;      // rest pose
    std::vector<TransferParams> transfer;
    std::vector<Vec3> normals;              // rest base normal per gaussian

    bool has_rig = false;
    GuideMesh mesh;
    std::vector<Anchor> anchors;
    RigMeta rig;

    size_t size() const { return gaussians.size(); }
    bool valid() const;
};

struct PosedAvatar {
    std::vector<Gaussian3D> gaussians;
    std::vector<Vec3> normals;
};

// Applies LBS + anchoring + gaze. Identity pose (or a rigless avatar)
// passes the rest state through.
PosedAvatar pose_avatar(const Avatar& avatar, const RigPose& pose);

// Illumination as consumed by shading: SH for the diffuse term, point
// lights for the specular term.
struct LightEnvironment {
    SHCoeffs sh;            // 3 channels
    PointLightSet lights;
};

LightEnvironment make_light_environment(const PointLightSet& lights, int sh_order);
LightEnvironment make_light_environment(const EnvMap& env, int n_lights, int sh_order);

// Shades every Gaussian for the camera's viewpoint (pre-clamp colors
// optionally captured for the negative-color regularizer).
std::vector<Vec3> shade_avatar(const PosedAvatar& posed,
                               std::span<const TransferParams> transfer,
                               const LightEnvironment& light, const Camera& cam,
                               const ShadingOptions& opts = {},
                               std::vector<Vec3>* preclamp = nullptr);

RenderTarget render_avatar(const Avatar& avatar, const RigPose& pose,
                           const LightEnvironment& light, const Camera& cam,
                           RasterMode mode = RasterMode::kTiled,
                           const ShadingOptions& opts = {});

// Avatar file pair: JSON manifest + little-endian float32 blob, plus OBJ/JSON
// rig sidecars for rigged avatars. `path` is the manifest; companions sit
// next to it.
void save_avatar(const Avatar& avatar, const std::filesystem::path& path);
Avatar load_avatar(const std::filesystem::path& path);

// Point-light set and SH coefficient JSON files.
void save_lights_json(const PointLightSet& lights, const std::filesystem::path& path);
PointLightSet load_lights_json(const std::filesystem::path& path);
void save_sh_json(const SHCoeffs& sh, const std::filesystem::path& path);
SHCoeffs load_sh_json(const std::filesystem::path& path);

}  // namespace gprt

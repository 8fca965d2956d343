#include "gprt/avatar.hpp"

#include "gprt/errors.hpp"
#include "gprt/parallel.hpp"

namespace gprt {

bool Avatar::valid() const {
    if (gaussians.size() != transfer.size() || gaussians.size() != normals.size())
        return false;
    if (sh_order < 0 || sh_order > kMaxShOrder) return false;
    for (const auto& g : gaussians)
        if (!g.valid()) return false;
    for (const auto& t : transfer) {
        if (!t.valid()) return false;
        if (t.order() != sh_order) return false;
    }
    for (const Vec3& n : normals)
        if (!is_unit(n, 1e-5)) return false;
    if (has_rig) {
        if (!mesh.valid()) return false;
        if (anchors.size() != gaussians.size()) return false;
        for (const Anchor& a : anchors)
            if (!a.valid(int(mesh.triangles.size()))) return false;
    }
    return true;
}

PosedAvatar pose_avatar(const Avatar& avatar, const RigPose& pose) {
    const bool rest_pose = length(pose.neck_rotation) == 0.0 &&
                           pose.gaze_left == avatar.rig.rest_gaze_left &&
                           pose.gaze_right == avatar.rig.rest_gaze_right;
    if (!avatar.has_rig || rest_pose) return {avatar.gaussians, avatar.normals};

    PosedMesh posed = lbs_apply(avatar.mesh, pose);
    AnchoredGaussians anchored =
        anchor_gaussians(avatar.mesh, posed, avatar.anchors, avatar.gaussians);
    PosedAvatar out{std::move(anchored.gaussians), std::move(anchored.normals)};
    if (!avatar.rig.eye_left.empty())
        apply_gaze(out.gaussians, out.normals, avatar.rig.eye_left,
                   avatar.rig.eye_center_left, pose.gaze_left, avatar.rig.rest_gaze_left);
    if (!avatar.rig.eye_right.empty())
        apply_gaze(out.gaussians, out.normals, avatar.rig.eye_right,
                   avatar.rig.eye_center_right, pose.gaze_right, avatar.rig.rest_gaze_right);
    return out;
}

LightEnvironment make_light_environment(const PointLightSet& lights, int sh_order) {
    return {pointlights_to_sh(lights, sh_order), lights};
}

LightEnvironment make_light_environment(const EnvMap& env, int n_lights, int sh_order) {
    PointLightSet lights = envmap_to_pointlights(env, n_lights);
    return {pointlights_to_sh(lights, sh_order), std::move(lights)};
}

std::vector<Vec3> shade_avatar(const PosedAvatar& posed,
                               std::span<const TransferParams> transfer,
                               const LightEnvironment& light, const Camera& cam,
                               const ShadingOptions& opts, std::vector<Vec3>* preclamp) {
    if (transfer.size() != posed.gaussians.size())
        throw InvalidInput("shade_avatar: transfer count mismatch");
    const Vec3 eye = cam.position();
    std::vector<Vec3> colors(posed.gaussians.size());
    if (preclamp) preclamp->resize(posed.gaussians.size());
    parallel_for(0, std::int64_t(posed.gaussians.size()), [&](std::int64_t k0, std::int64_t k1) {
        for (std::int64_t k = k0; k < k1; ++k) {
            Vec3 wo = normalize(eye - posed.gaussians[k].position);
            Vec3 pre;
            colors[k] = shade_gaussian(transfer[k], posed.normals[k], wo, light.sh,
                                       light.lights, opts, &pre);
            if (preclamp) (*preclamp)[k] = pre;
        }
    });
    return colors;
}

RenderTarget render_avatar(const Avatar& avatar, const RigPose& pose,
                           const LightEnvironment& light, const Camera& cam,
                           RasterMode mode, const ShadingOptions& opts) {
    PosedAvatar posed = pose_avatar(avatar, pose);
    std::vector<Vec3> colors = shade_avatar(posed, avatar.transfer, light, cam, opts);
    return rasterize(posed.gaussians, colors, cam, mode);
}

}  // namespace gprt

#include "gprt/camera.hpp"

#include <fstream>

#include "gprt/errors.hpp"
#include "json.hpp"

namespace gprt {

Camera Camera::look_at(const Vec3& eye, const Vec3& target, const Vec3& up,
                       double focal_px, int width, int height) {
    Vec3 forward = normalize(target - eye);          // camera +z
    Vec3 right = normalize(cross(forward, up));      // camera +x
    Vec3 down = cross(forward, right);               // camera +y (image down)
    Camera cam;
    cam.fx = cam.fy = focal_px;
    cam.cx = 0.5 * width;
    cam.cy = 0.5 * height;
    cam.width = width;
    cam.height = height;
    // rows of world-to-cam rotation = camera axes in world space
    cam.rot.m[0] = {right.x, right.y, right.z};
    cam.rot.m[1] = {down.x, down.y, down.z};
    cam.rot.m[2] = {forward.x, forward.y, forward.z};
    cam.trans = cam.rot * eye * -1.0;
    return cam;
}

Camera load_camera(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw InvalidInput("load_camera: cannot open " + path.string());
    nlohmann::json j;
    try {
        f >> j;
    } catch (const nlohmann::json::exception& e) {
        throw InvalidInput("load_camera: bad JSON in " + path.string() + ": " + e.what());
    }
    Camera cam;
    try {
        cam.fx = j.at("fx").get<double>();
        cam.fy = j.at("fy").get<double>();
        cam.cx = j.at("cx").get<double>();
        cam.cy = j.at("cy").get<double>();
        cam.width = j.at("width").get<int>();
        cam.height = j.at("height").get<int>();
        auto m = j.at("world_to_cam").get<std::vector<double>>();
        if (m.size() != 16) throw InvalidInput("load_camera: world_to_cam must have 16 entries");
        for (int r = 0; r < 3; ++r) {
            for (int c = 0; c < 3; ++c) cam.rot.m[r][c] = m[size_t(r) * 4 + c];
            cam.trans[r] = m[size_t(r) * 4 + 3];
        }
        cam.near_plane = j.value("near", 0.01);
        cam.far_plane = j.value("far", 1e9);
    } catch (const nlohmann::json::exception& e) {
        throw InvalidInput("load_camera: missing field in " + path.string() + ": " + e.what());
    }
    if (!cam.valid()) throw InvalidInput("load_camera: invalid camera in " + path.string());
    return cam;
}

void save_camera(const Camera& cam, const std::filesystem::path& path) {
    std::vector<double> m(16, 0.0);
    for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) m[size_t(r) * 4 + c] = cam.rot.m[r][c];
        m[size_t(r) * 4 + 3] = cam.trans[r];
    }
    m[15] = 1.0;
    nlohmann::json j{{"fx", cam.fx},         {"fy", cam.fy},
                     {"cx", cam.cx},         {"cy", cam.cy},
                     {"width", cam.width},   {"height", cam.height},
                     {"world_to_cam", m},    {"near", cam.near_plane},
                     {"far", cam.far_plane}};
    std::ofstream f(path);
    if (!f) throw InvalidInput("save_camera: cannot open " + path.string());
    f << j.dump(2) << "\n";
}

}  // namespace gprt

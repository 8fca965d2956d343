#include "gprt/rig.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "gprt/errors.hpp"
#include "json.hpp"

namespace gprt {

bool GuideMesh::valid() const {
    if (vertices.empty() || triangles.empty()) return false;
    if (skin_weights.size() != vertices.size() || normals.size() != vertices.size())
        return false;
    for (const auto& t : triangles)
        for (int i : t)
            if (i < 0 || i >= int(vertices.size())) return false;
    for (const Vec3& w : skin_weights) {
        if (w.x < 0 || w.y < 0 || w.z < 0) return false;
        if (std::abs(w.x + w.y + w.z - 1.0) > 1e-6) return false;
    }
    return true;
}

bool Anchor::valid(int triangle_count) const {
    if (triangle < 0 || triangle >= triangle_count) return false;
    if (bary.x < -1e-9 || bary.y < -1e-9 || bary.z < -1e-9) return false;
    return std::abs(bary.x + bary.y + bary.z - 1.0) <= 1e-6;
}

PosedMesh lbs_apply(const GuideMesh& mesh, const RigPose& pose) {
    if (!mesh.valid()) throw InvalidInput("lbs_apply: invalid mesh");
    if (!is_unit(pose.gaze_left) || !is_unit(pose.gaze_right))
        throw InvalidInput("lbs_apply: gaze vectors must be unit length");

    PosedMesh out;
    out.vertices.resize(mesh.vertices.size());
    out.normals.resize(mesh.vertices.size());
    if (length(pose.neck_rotation) == 0.0) {
        out.vertices = mesh.vertices;
        out.normals = mesh.normals;
        return out;
    }
    Mat3 neck_rot = Quat::from_axis_angle(pose.neck_rotation).normalized().to_matrix();
    for (size_t i = 0; i < mesh.vertices.size(); ++i) {
        const Vec3& w = mesh.skin_weights[i];
        const Vec3& v = mesh.vertices[i];
        // head and shoulder bones are the identity
        Vec3 neck_v = neck_rot * (v - mesh.neck_pivot) + mesh.neck_pivot;
        out.vertices[i] = v * (w.x + w.z) + neck_v * w.y;
        Mat3 blended = Mat3::identity() * (w.x + w.z) + neck_rot * w.y;
        out.normals[i] = normalize(blended * mesh.normals[i]);
    }
    return out;
}

Mat3 triangle_frame(const Vec3& v0, const Vec3& v1, const Vec3& v2) {
    Vec3 e1 = normalize(v1 - v0);
    Vec3 n = normalize(cross(v1 - v0, v2 - v0));
    return Mat3::from_columns(e1, n, cross(e1, n));
}

AnchoredGaussians anchor_gaussians(const GuideMesh& rest, const PosedMesh& posed,
                                   std::span<const Anchor> anchors,
                                   std::span<const Gaussian3D> gaussians) {
    if (anchors.size() != gaussians.size())
        throw InvalidInput("anchor_gaussians: anchor count must match gaussian count");
    if (posed.vertices.size() != rest.vertices.size())
        throw InvalidInput("anchor_gaussians: posed mesh size mismatch");

    AnchoredGaussians out;
    out.gaussians.assign(gaussians.begin(), gaussians.end());
    out.normals.resize(gaussians.size());
    out.skipped.assign(gaussians.size(), 0);

    for (size_t k = 0; k < anchors.size(); ++k) {
        const Anchor& a = anchors[k];
        if (!a.valid(int(rest.triangles.size())))
            throw InvalidInput("anchor_gaussians: invalid anchor");
        const auto& tri = rest.triangles[a.triangle];
        const Vec3 &p0 = posed.vertices[tri[0]], &p1 = posed.vertices[tri[1]],
                   &p2 = posed.vertices[tri[2]];
        Vec3 cross_posed = cross(p1 - p0, p2 - p0);
        const Vec3 &r0 = rest.vertices[tri[0]], &r1 = rest.vertices[tri[1]],
                   &r2 = rest.vertices[tri[2]];
        Vec3 cross_rest = cross(r1 - r0, r2 - r0);
        if (length(cross_posed) < 1e-12 || length(cross_rest) < 1e-12) {
            out.skipped[k] = 1;
            out.normals[k] = rest.normals[tri[0]];
            continue;
        }
        Mat3 frame_posed = triangle_frame(p0, p1, p2);
        Mat3 frame_rest = triangle_frame(r0, r1, r2);
        Mat3 delta = frame_posed * frame_rest.transposed();

        Vec3 surface = p0 * a.bary.x + p1 * a.bary.y + p2 * a.bary.z;
        out.gaussians[k].position = surface + frame_posed * a.offset;
        // compose rest orientation with the rest-to-posed frame rotation
        Quat dq = quat_from_matrix(delta);
        out.gaussians[k].rotation = (dq * gaussians[k].rotation).normalized();

        Vec3 n = posed.normals[tri[0]] * a.bary.x + posed.normals[tri[1]] * a.bary.y +
                 posed.normals[tri[2]] * a.bary.z;
        out.normals[k] = normalize(n);
    }
    return out;
}

void apply_gaze(std::span<Gaussian3D> gaussians, std::span<Vec3> normals,
                std::span<const int> indices, const Vec3& center, const Vec3& gaze,
                const Vec3& rest_gaze) {
    if (gaze == rest_gaze) return;
    Quat q = rotation_between(rest_gaze, gaze);
    Mat3 rot = q.to_matrix();
    for (int idx : indices) {
        if (idx < 0 || size_t(idx) >= gaussians.size())
            throw InvalidInput("apply_gaze: gaussian index out of range");
        Gaussian3D& g = gaussians[idx];
        g.position = rot * (g.position - center) + center;
        g.rotation = (q * g.rotation).normalized();
        if (!normals.empty()) normals[idx] = rot * normals[idx];
    }
}

GuideMesh load_obj(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw InvalidInput("load_obj: cannot open " + path.string());
    GuideMesh mesh;
    std::vector<Vec3> file_normals;
    std::vector<int> normal_of_vertex;
    std::string line;
    while (std::getline(f, line)) {
        std::istringstream ss(line);
        std::string tag;
        ss >> tag;
        if (tag == "v") {
            Vec3 v;
            ss >> v.x >> v.y >> v.z;
            mesh.vertices.push_back(v);
        } else if (tag == "vn") {
            Vec3 n;
            ss >> n.x >> n.y >> n.z;
            file_normals.push_back(n);
        } else if (tag == "f") {
            std::array<int, 3> tri{};
            std::array<int, 3> ni{-1, -1, -1};
            for (int i = 0; i < 3; ++i) {
                std::string vert;
                if (!(ss >> vert)) throw InvalidInput("load_obj: face needs 3 vertices");
                // forms: v, v/vt, v//vn, v/vt/vn
                size_t s1 = vert.find('/');
                tri[i] = std::stoi(vert.substr(0, s1)) - 1;
                if (s1 != std::string::npos) {
                    size_t s2 = vert.find('/', s1 + 1);
                    if (s2 != std::string::npos && s2 + 1 < vert.size())
                        ni[i] = std::stoi(vert.substr(s2 + 1)) - 1;
                }
            }
            std::string extra;
            if (ss >> extra) throw InvalidInput("load_obj: only triangle meshes supported");
            mesh.triangles.push_back(tri);
            if (normal_of_vertex.size() < mesh.vertices.size())
                normal_of_vertex.resize(mesh.vertices.size(), -1);
            for (int i = 0; i < 3; ++i)
                if (ni[i] >= 0) normal_of_vertex[tri[i]] = ni[i];
        }
    }
    if (mesh.vertices.empty() || mesh.triangles.empty())
        throw InvalidInput("load_obj: no geometry in " + path.string());

    mesh.normals.assign(mesh.vertices.size(), Vec3{});
    bool have_all = !file_normals.empty() && normal_of_vertex.size() == mesh.vertices.size();
    if (have_all)
        for (int ni : normal_of_vertex) have_all = have_all && ni >= 0 && ni < int(file_normals.size());
    if (have_all) {
        for (size_t i = 0; i < mesh.vertices.size(); ++i)
            mesh.normals[i] = normalize(file_normals[normal_of_vertex[i]]);
    } else {
        for (const auto& t : mesh.triangles) {
            Vec3 fn = cross(mesh.vertices[t[1]] - mesh.vertices[t[0]],
                            mesh.vertices[t[2]] - mesh.vertices[t[0]]);
            for (int i : t) mesh.normals[i] += fn;  // area-weighted
        }
        for (Vec3& n : mesh.normals)
            n = length(n) > 1e-12 ? normalize(n) : Vec3{0.0, 0.0, 1.0};
    }
    mesh.skin_weights.assign(mesh.vertices.size(), Vec3{1.0, 0.0, 0.0});
    return mesh;
}

void save_obj(const GuideMesh& mesh, const std::filesystem::path& path) {
    std::ofstream f(path);
    if (!f) throw InvalidInput("save_obj: cannot open " + path.string());
    f.precision(17);
    for (const Vec3& v : mesh.vertices) f << "v " << v.x << " " << v.y << " " << v.z << "\n";
    for (const Vec3& n : mesh.normals) f << "vn " << n.x << " " << n.y << " " << n.z << "\n";
    for (const auto& t : mesh.triangles)
        f << "f " << t[0] + 1 << "//" << t[0] + 1 << " " << t[1] + 1 << "//" << t[1] + 1 << " "
          << t[2] + 1 << "//" << t[2] + 1 << "\n";
}

namespace {

Vec3 json_vec3(const nlohmann::json& j) {
    if (!j.is_array() || j.size() != 3) throw InvalidInput("rig json: expected 3-vector");
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

nlohmann::json vec3_json(const Vec3& v) { return {v.x, v.y, v.z}; }

}  // namespace

RigData load_rig_json(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw InvalidInput("load_rig_json: cannot open " + path.string());
    nlohmann::json j;
    try {
        f >> j;
    } catch (const nlohmann::json::exception& e) {
        throw InvalidInput("load_rig_json: bad JSON: " + std::string(e.what()));
    }
    RigData rig;
    try {
        for (const auto& w : j.at("skin_weights")) rig.skin_weights.push_back(json_vec3(w));
        rig.neck_pivot = json_vec3(j.at("neck_pivot"));
        rig.eye_center_left = json_vec3(j.at("eyeball_centers").at("left"));
        rig.eye_center_right = json_vec3(j.at("eyeball_centers").at("right"));
        rig.rest_gaze_left = json_vec3(j.at("rest_gaze").at("left"));
        rig.rest_gaze_right = json_vec3(j.at("rest_gaze").at("right"));
        rig.eye_left = j.at("eye_gaussians").at("left").get<std::vector<int>>();
        rig.eye_right = j.at("eye_gaussians").at("right").get<std::vector<int>>();
        for (const auto& a : j.at("anchors")) {
            Anchor anchor;
            anchor.triangle = a.at("triangle").get<int>();
            anchor.bary = json_vec3(a.at("bary"));
            anchor.offset = json_vec3(a.at("offset"));
            rig.anchors.push_back(anchor);
        }
    } catch (const nlohmann::json::exception& e) {
        throw InvalidInput("load_rig_json: missing field: " + std::string(e.what()));
    }
    return rig;
}

void save_rig_json(const RigData& rig, const std::filesystem::path& path) {
    nlohmann::json j;
    for (const Vec3& w : rig.skin_weights) j["skin_weights"].push_back(vec3_json(w));
    j["neck_pivot"] = vec3_json(rig.neck_pivot);
    j["eyeball_centers"] = {{"left", vec3_json(rig.eye_center_left)},
                            {"right", vec3_json(rig.eye_center_right)}};
    j["rest_gaze"] = {{"left", vec3_json(rig.rest_gaze_left)},
                      {"right", vec3_json(rig.rest_gaze_right)}};
    j["eye_gaussians"] = {{"left", rig.eye_left}, {"right", rig.eye_right}};
    j["anchors"] = nlohmann::json::array();
    for (const Anchor& a : rig.anchors)
        j["anchors"].push_back({{"triangle", a.triangle},
                                {"bary", vec3_json(a.bary)},
                                {"offset", vec3_json(a.offset)}});
    std::ofstream f(path);
    if (!f) throw InvalidInput("save_rig_json: cannot open " + path.string());
    f << j.dump() << "\n";
}

}  // namespace gprt

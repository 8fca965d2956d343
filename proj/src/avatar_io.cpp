#include <cstdint>
#include <fstream>

#include "gprt/avatar.hpp"
#include "gprt/errors.hpp"
#include "json.hpp"

namespace gprt {

namespace {

constexpr const char* kAvatarVersion = "1.0";

struct BlobWriter {
    std::vector<float> data;
    nlohmann::json arrays = nlohmann::json::object();

    void add(const std::string& name, const std::vector<double>& values,
             std::vector<size_t> shape) {
        arrays[name] = {{"offset", data.size()}, {"shape", shape}};
        data.reserve(data.size() + values.size());
        for (double v : values) data.push_back(float(v));
    }
};

class BlobReader {
public:
    BlobReader(std::vector<float> data, const nlohmann::json& arrays)
        : data_(std::move(data)), arrays_(arrays) {}

    std::vector<double> read(const std::string& name, std::vector<size_t> expect_shape) const {
        if (!arrays_.contains(name))
            throw InvalidInput("load_avatar: blob array missing: " + name);
        const auto& a = arrays_.at(name);
        auto shape = a.at("shape").get<std::vector<size_t>>();
        if (shape != expect_shape)
            throw InvalidInput("load_avatar: unexpected shape for array: " + name);
        size_t count = 1;
        for (size_t s : shape) count *= s;
        size_t offset = a.at("offset").get<size_t>();
        if (offset + count > data_.size())
            throw InvalidInput("load_avatar: blob too short for array: " + name);
        std::vector<double> out(count);
        for (size_t i = 0; i < count; ++i) out[i] = double(data_[offset + i]);
        return out;
    }

private:
    std::vector<float> data_;
    const nlohmann::json& arrays_;
};

void flatten_vec3(const Vec3& v, std::vector<double>& out) {
    out.push_back(v.x);
    out.push_back(v.y);
    out.push_back(v.z);
}

}  // namespace

void save_avatar(const Avatar& avatar, const std::filesystem::path& path) {
    if (!avatar.valid()) throw InvalidInput("save_avatar: invalid avatar");
    const size_t k = avatar.size();
    const size_t dc = avatar.transfer.empty() ? 0 : avatar.transfer[0].d_color.size();
    const size_t dm = avatar.transfer.empty() ? 0 : avatar.transfer[0].d_mono.size();

    BlobWriter blob;
    std::vector<double> buf;
    buf.reserve(k * 4);

    buf.clear();
    for (const auto& g : avatar.gaussians) flatten_vec3(g.position, buf);
    blob.add("position", buf, {k, 3});
    buf.clear();
    for (const auto& g : avatar.gaussians) {
        buf.push_back(g.rotation.w); buf.push_back(g.rotation.x);
        buf.push_back(g.rotation.y); buf.push_back(g.rotation.z);
    }
    blob.add("rotation", buf, {k, 4});
    buf.clear();
    for (const auto& g : avatar.gaussians) flatten_vec3(g.scale, buf);
    blob.add("scale", buf, {k, 3});
    buf.clear();
    for (const auto& g : avatar.gaussians) buf.push_back(g.opacity);
    blob.add("opacity", buf, {k});
    buf.clear();
    for (const auto& n : avatar.normals) flatten_vec3(n, buf);
    blob.add("normal", buf, {k, 3});

    buf.clear();
    for (const auto& t : avatar.transfer) flatten_vec3(t.albedo, buf);
    blob.add("albedo", buf, {k, 3});
    buf.clear();
    for (const auto& t : avatar.transfer)
        for (const Vec3& c : t.d_color) flatten_vec3(c, buf);
    blob.add("d_color", buf, {k, dc, 3});
    buf.clear();
    for (const auto& t : avatar.transfer)
        for (double v : t.d_mono) buf.push_back(v);
    blob.add("d_mono", buf, {k, dm});
    buf.clear();
    for (const auto& t : avatar.transfer) buf.push_back(t.roughness);
    blob.add("roughness", buf, {k});
    buf.clear();
    for (const auto& t : avatar.transfer) buf.push_back(t.visibility);
    blob.add("visibility", buf, {k});
    buf.clear();
    for (const auto& t : avatar.transfer) flatten_vec3(t.normal_offset, buf);
    blob.add("normal_offset", buf, {k, 3});

    const std::string stem = path.stem().string();
    nlohmann::json manifest;
    manifest["version"] = kAvatarVersion;
    manifest["gaussian_count"] = k;
    manifest["sh_order"] = avatar.sh_order;
    manifest["blob"] = stem + ".bin";
    manifest["blob_floats"] = blob.data.size();
    manifest["arrays"] = blob.arrays;

    if (avatar.has_rig) {
        manifest["rig"] = {{"mesh", stem + "_mesh.obj"}, {"data", stem + "_rig.json"}};
        save_obj(avatar.mesh, path.parent_path() / (stem + "_mesh.obj"));
        RigData rig;
        rig.skin_weights = avatar.mesh.skin_weights;
        rig.neck_pivot = avatar.mesh.neck_pivot;
        rig.eye_center_left = avatar.rig.eye_center_left;
        rig.eye_center_right = avatar.rig.eye_center_right;
        rig.rest_gaze_left = avatar.rig.rest_gaze_left;
        rig.rest_gaze_right = avatar.rig.rest_gaze_right;
        rig.eye_left = avatar.rig.eye_left;
        rig.eye_right = avatar.rig.eye_right;
        rig.anchors = avatar.anchors;
        save_rig_json(rig, path.parent_path() / (stem + "_rig.json"));
    }

    std::ofstream bf(path.parent_path() / (stem + ".bin"), std::ios::binary);
    if (!bf) throw InvalidInput("save_avatar: cannot open blob file");
    bf.write(reinterpret_cast<const char*>(blob.data.data()),
             std::streamsize(blob.data.size() * sizeof(float)));

    std::ofstream mf(path);
    if (!mf) throw InvalidInput("save_avatar: cannot open " + path.string());
    mf << manifest.dump(2) << "\n";
}

Avatar load_avatar(const std::filesystem::path& path) {
    std::ifstream mf(path);
    if (!mf) throw InvalidInput("load_avatar: cannot open " + path.string());
    nlohmann::json manifest;
    try {
        mf >> manifest;
    } catch (const nlohmann::json::exception& e) {
        throw InvalidInput("load_avatar: bad JSON: " + std::string(e.what()));
    }
    if (!manifest.contains("version"))
        throw InvalidInput("load_avatar: manifest missing version string");

    Avatar avatar;
    size_t k;
    try {
        k = manifest.at("gaussian_count").get<size_t>();
        avatar.sh_order = manifest.at("sh_order").get<int>();
    } catch (const nlohmann::json::exception& e) {
        throw InvalidInput("load_avatar: missing field: " + std::string(e.what()));
    }
    const int n_coeffs = SHCoeffs::coeff_count(avatar.sh_order);
    const size_t dc = size_t(std::min(n_coeffs, 4));
    const size_t dm = size_t(std::max(0, n_coeffs - 4));

    std::filesystem::path blob_path = path.parent_path() / manifest.at("blob").get<std::string>();
    std::ifstream bf(blob_path, std::ios::binary);
    if (!bf) throw InvalidInput("load_avatar: cannot open blob " + blob_path.string());
    bf.seekg(0, std::ios::end);
    size_t bytes = size_t(bf.tellg());
    bf.seekg(0);
    if (bytes != manifest.at("blob_floats").get<size_t>() * sizeof(float))
        throw InvalidInput("load_avatar: blob length does not match manifest");
    std::vector<float> data(bytes / sizeof(float));
    bf.read(reinterpret_cast<char*>(data.data()), std::streamsize(bytes));
    BlobReader blob(std::move(data), manifest.at("arrays"));

    auto position = blob.read("position", {k, 3});
    auto rotation = blob.read("rotation", {k, 4});
    auto scale = blob.read("scale", {k, 3});
    auto opacity = blob.read("opacity", {k});
    auto normal = blob.read("normal", {k, 3});
    auto albedo = blob.read("albedo", {k, 3});
    auto d_color = blob.read("d_color", {k, dc, 3});
    auto d_mono = blob.read("d_mono", {k, dm});
    auto roughness = blob.read("roughness", {k});
    auto visibility = blob.read("visibility", {k});
    auto normal_offset = blob.read("normal_offset", {k, 3});

    avatar.gaussians.resize(k);
    avatar.transfer.resize(k);
    avatar.normals.resize(k);
    for (size_t i = 0; i < k; ++i) {
        Gaussian3D& g = avatar.gaussians[i];
        g.position = {position[i * 3], position[i * 3 + 1], position[i * 3 + 2]};
        g.rotation = Quat{rotation[i * 4], rotation[i * 4 + 1], rotation[i * 4 + 2],
                          rotation[i * 4 + 3]}.normalized();
        g.scale = {scale[i * 3], scale[i * 3 + 1], scale[i * 3 + 2]};
        g.opacity = opacity[i];
        avatar.normals[i] = normalize(
            Vec3{normal[i * 3], normal[i * 3 + 1], normal[i * 3 + 2]});
        TransferParams& t = avatar.transfer[i];
        t.albedo = {albedo[i * 3], albedo[i * 3 + 1], albedo[i * 3 + 2]};
        t.d_color.resize(dc);
        for (size_t j = 0; j < dc; ++j)
            t.d_color[j] = {d_color[(i * dc + j) * 3], d_color[(i * dc + j) * 3 + 1],
                            d_color[(i * dc + j) * 3 + 2]};
        t.d_mono.assign(d_mono.begin() + std::ptrdiff_t(i * dm),
                        d_mono.begin() + std::ptrdiff_t((i + 1) * dm));
        t.roughness = roughness[i];
        t.visibility = visibility[i];
        t.normal_offset = {normal_offset[i * 3], normal_offset[i * 3 + 1],
                           normal_offset[i * 3 + 2]};
    }

    if (manifest.contains("rig")) {
        avatar.has_rig = true;
        avatar.mesh =
            load_obj(path.parent_path() / manifest["rig"].at("mesh").get<std::string>());
        RigData rig =
            load_rig_json(path.parent_path() / manifest["rig"].at("data").get<std::string>());
        if (rig.skin_weights.size() != avatar.mesh.vertices.size())
            throw InvalidInput("load_avatar: skin weight count mismatch");
        avatar.mesh.skin_weights = rig.skin_weights;
        avatar.mesh.neck_pivot = rig.neck_pivot;
        avatar.anchors = rig.anchors;
        avatar.rig.eye_center_left = rig.eye_center_left;
        avatar.rig.eye_center_right = rig.eye_center_right;
        avatar.rig.rest_gaze_left = rig.rest_gaze_left;
        avatar.rig.rest_gaze_right = rig.rest_gaze_right;
        avatar.rig.eye_left = rig.eye_left;
        avatar.rig.eye_right = rig.eye_right;
    }

    if (!avatar.valid()) throw InvalidInput("load_avatar: avatar fails validation");
    return avatar;
}

void save_lights_json(const PointLightSet& lights, const std::filesystem::path& path) {
    nlohmann::json j;
    j["type"] = "pointlights";
    j["count"] = lights.size();
    auto& dirs = j["directions"] = nlohmann::json::array();
    auto& ints = j["intensities"] = nlohmann::json::array();
    for (size_t i = 0; i < lights.size(); ++i) {
        dirs.push_back({lights.directions[i].x, lights.directions[i].y, lights.directions[i].z});
        ints.push_back({lights.intensities[i].x, lights.intensities[i].y,
                        lights.intensities[i].z});
    }
    std::ofstream f(path);
    if (!f) throw InvalidInput("save_lights_json: cannot open " + path.string());
    f << j.dump() << "\n";
}

PointLightSet load_lights_json(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw InvalidInput("load_lights_json: cannot open " + path.string());
    nlohmann::json j;
    try {
        f >> j;
    } catch (const nlohmann::json::exception& e) {
        throw InvalidInput("load_lights_json: bad JSON: " + std::string(e.what()));
    }
    PointLightSet lights;
    try {
        if (j.at("type").get<std::string>() != "pointlights")
            throw InvalidInput("load_lights_json: not a point-light file");
        for (const auto& d : j.at("directions"))
            lights.directions.push_back(
                normalize(Vec3{d[0].get<double>(), d[1].get<double>(), d[2].get<double>()}));
        for (const auto& c : j.at("intensities"))
            lights.intensities.push_back(
                {c[0].get<double>(), c[1].get<double>(), c[2].get<double>()});
    } catch (const nlohmann::json::exception& e) {
        throw InvalidInput("load_lights_json: missing field: " + std::string(e.what()));
    }
    if (!lights.valid()) throw InvalidInput("load_lights_json: invalid light set");
    return lights;
}

void save_sh_json(const SHCoeffs& sh, const std::filesystem::path& path) {
    nlohmann::json j{{"type", "sh"}, {"order", sh.order}, {"channels", sh.channels},
                     {"values", sh.values}};
    std::ofstream f(path);
    if (!f) throw InvalidInput("save_sh_json: cannot open " + path.string());
    f << j.dump() << "\n";
}

SHCoeffs load_sh_json(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw InvalidInput("load_sh_json: cannot open " + path.string());
    nlohmann::json j;
    try {
        f >> j;
    } catch (const nlohmann::json::exception& e) {
        throw InvalidInput("load_sh_json: bad JSON: " + std::string(e.what()));
    }
    SHCoeffs sh;
    try {
        sh.order = j.at("order").get<int>();
        sh.channels = j.at("channels").get<int>();
        sh.values = j.at("values").get<std::vector<double>>();
    } catch (const nlohmann::json::exception& e) {
        throw InvalidInput("load_sh_json: missing field: " + std::string(e.what()));
    }
    if (!sh.valid()) throw InvalidInput("load_sh_json: invalid coefficients");
    return sh;
}

}  // namespace gprt

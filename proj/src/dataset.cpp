#include "gprt/dataset.hpp"

#include <fstream>

#include "gprt/errors.hpp"
#include "json.hpp"

namespace gprt {

bool OlatDataset::valid() const {
    if (cameras.empty() || frames.empty()) return false;
    for (const OlatFrame& f : frames) {
        if (f.camera < 0 || f.camera >= int(cameras.size())) return false;
        if (f.target.width <= 0 || f.target.channels != 3) return false;
        if (f.has_lights() && !f.lights.valid()) return false;
        if (f.has_mask() &&
            (f.mask.width != f.target.width || f.mask.height != f.target.height))
            return false;
    }
    return true;
}

namespace {

nlohmann::json lights_to_json(const PointLightSet& lights) {
    nlohmann::json j;
    auto& dirs = j["directions"] = nlohmann::json::array();
    auto& ints = j["intensities"] = nlohmann::json::array();
    for (size_t i = 0; i < lights.size(); ++i) {
        dirs.push_back({lights.directions[i].x, lights.directions[i].y,
                        lights.directions[i].z});
        ints.push_back({lights.intensities[i].x, lights.intensities[i].y,
                        lights.intensities[i].z});
    }
    return j;
}

PointLightSet lights_from_json(const nlohmann::json& j) {
    PointLightSet lights;
    for (const auto& d : j.at("directions"))
        lights.directions.push_back({d[0].get<double>(), d[1].get<double>(), d[2].get<double>()});
    for (const auto& c : j.at("intensities"))
        lights.intensities.push_back({c[0].get<double>(), c[1].get<double>(), c[2].get<double>()});
    return lights;
}

std::string frame_name(size_t i, const char* prefix, const char* ext) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%s%04zu%s", prefix, i, ext);
    return buf;
}

}  // namespace

void save_olat_dataset(const OlatDataset& data, const std::filesystem::path& dir) {
    if (!data.valid()) throw InvalidInput("save_olat_dataset: invalid dataset");
    std::filesystem::create_directories(dir / "cameras");
    std::filesystem::create_directories(dir / "frames");

    nlohmann::json manifest;
    manifest["version"] = "1.0";
    manifest["seed"] = data.seed;
    if (!data.avatar_ref.empty()) manifest["avatar"] = data.avatar_ref;
    if (!data.environment_ref.empty()) manifest["environment"] = data.environment_ref;

    auto& cams = manifest["cameras"] = nlohmann::json::array();
    for (size_t c = 0; c < data.cameras.size(); ++c) {
        std::string rel = "cameras/" + frame_name(c, "cam", ".json");
        save_camera(data.cameras[c], dir / rel);
        cams.push_back(rel);
    }

    bool any_mask = false;
    for (const OlatFrame& f : data.frames) any_mask = any_mask || f.has_mask();
    if (any_mask) std::filesystem::create_directories(dir / "masks");

    auto& frames = manifest["frames"] = nlohmann::json::array();
    for (size_t i = 0; i < data.frames.size(); ++i) {
        const OlatFrame& f = data.frames[i];
        nlohmann::json jf;
        std::string rel = "frames/" + frame_name(i, "f", ".pfm");
        save_pfm(f.target, dir / rel);
        jf["image"] = rel;
        jf["camera"] = f.camera;
        if (f.has_lights()) jf["lights"] = lights_to_json(f.lights);
        if (f.has_mask()) {
            std::string mrel = "masks/" + frame_name(i, "m", ".pfm");
            save_pfm(f.mask, dir / mrel);
            jf["mask"] = mrel;
        }
        frames.push_back(std::move(jf));
    }

    std::ofstream mf(dir / "manifest.json");
    if (!mf) throw InvalidInput("save_olat_dataset: cannot open manifest");
    mf << manifest.dump(2) << "\n";
}

OlatDataset load_olat_dataset(const std::filesystem::path& dir) {
    std::ifstream mf(dir / "manifest.json");
    if (!mf) throw InvalidInput("load_olat_dataset: cannot open manifest in " + dir.string());
    nlohmann::json manifest;
    try {
        mf >> manifest;
    } catch (const nlohmann::json::exception& e) {
        throw InvalidInput("load_olat_dataset: bad manifest JSON: " + std::string(e.what()));
    }

    OlatDataset data;
    try {
        data.seed = manifest.value("seed", std::uint64_t(0));
        data.avatar_ref = manifest.value("avatar", std::string());
        data.environment_ref = manifest.value("environment", std::string());
        for (const auto& rel : manifest.at("cameras"))
            data.cameras.push_back(load_camera(dir / rel.get<std::string>()));
        for (const auto& jf : manifest.at("frames")) {
            OlatFrame frame;
            frame.camera = jf.at("camera").get<int>();
            frame.target = load_pfm(dir / jf.at("image").get<std::string>());
            if (jf.contains("lights")) frame.lights = lights_from_json(jf.at("lights"));
            if (jf.contains("mask")) frame.mask = load_pfm(dir / jf.at("mask").get<std::string>());
            data.frames.push_back(std::move(frame));
        }
    } catch (const nlohmann::json::exception& e) {
        throw InvalidInput("load_olat_dataset: missing field: " + std::string(e.what()));
    }
    if (!data.valid()) throw InvalidInput("load_olat_dataset: dataset fails validation");
    return data;
}

}  // namespace gprt

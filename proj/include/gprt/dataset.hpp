#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "gprt/camera.hpp"
#include "gprt/image.hpp"
#include "gprt/lighting.hpp"

namespace gprt {

// One rendered frame: target image, camera index, the exact lights it was
// rendered under (empty when the illumination is the unknown being fitted),
// and an optional fit mask.
struct OlatFrame {
    int camera = 0;
    PointLightSet lights;
    Image target;
    Image mask;  // single channel; empty = all pixels

    bool has_lights() const { return !lights.directions.empty(); }
    bool has_mask() const { return mask.width > 0; }
};

struct OlatDataset {
    std::vector<Camera> cameras;
    std::vector<OlatFrame> frames;
    std::uint64_t seed = 0;
    std::string avatar_ref;       // relative path of the avatar manifest, optional
    std::string environment_ref;  // relative path of the ground-truth env, optional

    bool valid() const;
};

// Directory layout: manifest.json + cameras/*.json + frames/*.pfm
// (+ masks/*.pfm). The manifest records the exact light set per frame.
void save_olat_dataset(const OlatDataset& data, const std::filesystem::path& dir);
OlatDataset load_olat_dataset(const std::filesystem::path& dir);

}  // namespace gprt

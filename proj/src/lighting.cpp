#include "gprt/lighting.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "gprt/errors.hpp"
#include "gprt/image.hpp"

namespace gprt {

EnvMap EnvMap::constant(int height, const Vec3& radiance) {
    EnvMap env;
    env.height = height;
    env.width = 2 * height;
    env.texels.assign(size_t(env.width) * env.height, radiance);
    return env;
}

Vec3 EnvMap::texel_direction(int x, int y) const {
    double theta = kPi * (y + 0.5) / height;
    double phi = kTwoPi * (x + 0.5) / width;
    double st = std::sin(theta);
    return {st * std::cos(phi), st * std::sin(phi), std::cos(theta)};
}

double EnvMap::texel_solid_angle(int y) const {
    double theta = kPi * (y + 0.5) / height;
    return std::sin(theta) * (kPi / height) * (kTwoPi / width);
}

Vec3 EnvMap::sample(const Vec3& dir) const {
    double theta = std::acos(std::clamp(dir.z, -1.0, 1.0));
    double phi = std::atan2(dir.y, dir.x);
    if (phi < 0.0) phi += kTwoPi;
    // Texel centers sit at half-integer coordinates.
    double u = phi / kTwoPi * width - 0.5;
    double v = theta / kPi * height - 0.5;
    int x0 = int(std::floor(u)), y0 = int(std::floor(v));
    double fx = u - x0, fy = v - y0;
    auto wrap_x = [&](int x) { return ((x % width) + width) % width; };
    auto clamp_y = [&](int y) { return std::clamp(y, 0, height - 1); };
    const Vec3& a = at(wrap_x(x0), clamp_y(y0));
    const Vec3& b = at(wrap_x(x0 + 1), clamp_y(y0));
    const Vec3& c = at(wrap_x(x0), clamp_y(y0 + 1));
    const Vec3& d = at(wrap_x(x0 + 1), clamp_y(y0 + 1));
    return a * ((1 - fx) * (1 - fy)) + b * (fx * (1 - fy)) +
           c * ((1 - fx) * fy) + d * (fx * fy);
}

Vec3 EnvMap::total_flux() const {
    Vec3 acc;
    for (int y = 0; y < height; ++y) {
        double dw = texel_solid_angle(y);
        for (int x = 0; x < width; ++x) acc += at(x, y) * dw;
    }
    return acc;
}

bool EnvMap::valid() const {
    if (width != 2 * height || height <= 0) return false;
    if (texels.size() != size_t(width) * height) return false;
    for (const Vec3& t : texels)
        if (!all_finite(t) || t.x < 0 || t.y < 0 || t.z < 0) return false;
    return true;
}

bool PointLightSet::valid() const {
    if (directions.empty() || directions.size() != intensities.size()) return false;
    for (const Vec3& d : directions)
        if (!is_unit(d)) return false;
    for (const Vec3& c : intensities)
        if (!all_finite(c) || c.x < 0 || c.y < 0 || c.z < 0) return false;
    return true;
}

std::vector<Vec3> fibonacci_directions(int n) {
    if (n < 1) throw InvalidInput("fibonacci_directions: n must be >= 1");
    // Golden-angle spiral, z stratified over (-1, 1).
    const double golden_angle = kPi * (3.0 - std::sqrt(5.0));
    std::vector<Vec3> dirs(n);
    for (int i = 0; i < n; ++i) {
        double z = 1.0 - (2.0 * i + 1.0) / n;
        double r = std::sqrt(std::max(0.0, 1.0 - z * z));
        double phi = golden_angle * i;
        dirs[i] = {r * std::cos(phi), r * std::sin(phi), z};
    }
    return dirs;
}

PointLightSet envmap_to_pointlights(const EnvMap& env, int n) {
    if (!env.valid()) throw InvalidInput("envmap_to_pointlights: invalid env map");
    PointLightSet lights;
    lights.directions = fibonacci_directions(n);
    lights.intensities.resize(lights.directions.size());
    for (size_t i = 0; i < lights.directions.size(); ++i)
        lights.intensities[i] = env.sample(lights.directions[i]);
    return lights;
}

SHCoeffs pointlights_to_sh(const PointLightSet& lights, int order) {
    if (!lights.valid()) throw InvalidInput("pointlights_to_sh: invalid light set");
    std::vector<SphereSample> samples(lights.size());
    const double dw = lights.solid_angle();
    for (size_t i = 0; i < lights.size(); ++i)
        samples[i] = {lights.directions[i], lights.intensities[i], dw};
    return project_sphere_fn(samples, order, 3);
}

// ---- file IO ----

namespace {

Vec3 decode_rgbe(const std::uint8_t rgbe[4]) {
    if (rgbe[3] == 0) return {};
    double f = std::ldexp(1.0, int(rgbe[3]) - (128 + 8));
    return {rgbe[0] * f, rgbe[1] * f, rgbe[2] * f};
}

void encode_rgbe(const Vec3& c, std::uint8_t rgbe[4]) {
    double m = std::max({c.x, c.y, c.z, 0.0});
    if (m < 1e-32) {
        rgbe[0] = rgbe[1] = rgbe[2] = rgbe[3] = 0;
        return;
    }
    int e;
    double scale = std::frexp(m, &e) * 256.0 / m;
    rgbe[0] = std::uint8_t(std::max(0.0, c.x) * scale);
    rgbe[1] = std::uint8_t(std::max(0.0, c.y) * scale);
    rgbe[2] = std::uint8_t(std::max(0.0, c.z) * scale);
    rgbe[3] = std::uint8_t(e + 128);
}

EnvMap load_hdr(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw InvalidInput("load_hdr: cannot open " + path.string());
    std::string line;
    std::getline(f, line);
    if (line.rfind("#?", 0) != 0) throw InvalidInput("load_hdr: missing #? signature");
    while (std::getline(f, line) && !line.empty()) {
        // header attributes ignored; linear RGBE assumed
    }
    std::getline(f, line);
    int w = 0, h = 0;
    if (std::sscanf(line.c_str(), "-Y %d +X %d", &h, &w) != 2)
        throw InvalidInput("load_hdr: unsupported orientation: " + line);

    EnvMap env;
    env.width = w;
    env.height = h;
    env.texels.resize(size_t(w) * h);
    std::vector<std::uint8_t> scan(size_t(w) * 4);
    for (int y = 0; y < h; ++y) {
        std::uint8_t head[4];
        f.read(reinterpret_cast<char*>(head), 4);
        if (!f) throw InvalidInput("load_hdr: truncated file");
        if (head[0] == 2 && head[1] == 2 && ((head[2] << 8) | head[3]) == w && w >= 8) {
            // new-style RLE: four planes, run/dump packets
            for (int c = 0; c < 4; ++c) {
                int x = 0;
                while (x < w) {
                    int code = f.get();
                    if (code < 0) throw InvalidInput("load_hdr: truncated RLE");
                    if (code > 128) {
                        int count = code - 128;
                        int value = f.get();
                        while (count-- > 0) scan[size_t(x++) * 4 + c] = std::uint8_t(value);
                    } else {
                        int count = code;
                        while (count-- > 0) scan[size_t(x++) * 4 + c] = std::uint8_t(f.get());
                    }
                }
            }
        } else {
            std::memcpy(scan.data(), head, 4);
            f.read(reinterpret_cast<char*>(scan.data() + 4), std::streamsize(size_t(w) * 4 - 4));
            if (!f) throw InvalidInput("load_hdr: truncated file");
        }
        for (int x = 0; x < w; ++x) env.at(x, y) = decode_rgbe(&scan[size_t(x) * 4]);
    }
    return env;
}

void save_hdr(const EnvMap& env, const std::filesystem::path& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw InvalidInput("save_hdr: cannot open " + path.string());
    f << "#?RADIANCE\nFORMAT=32-bit_rle_rgbe\n\n-Y " << env.height << " +X " << env.width << "\n";
    std::vector<std::uint8_t> scan(size_t(env.width) * 4);
    for (int y = 0; y < env.height; ++y) {
        for (int x = 0; x < env.width; ++x) encode_rgbe(env.at(x, y), &scan[size_t(x) * 4]);
        f.write(reinterpret_cast<const char*>(scan.data()), std::streamsize(scan.size()));
    }
}

}  // namespace

EnvMap load_envmap(const std::filesystem::path& path) {
    EnvMap env;
    if (path.extension() == ".hdr") {
        env = load_hdr(path);
    } else if (path.extension() == ".pfm") {
        Image img = load_pfm(path);
        if (img.channels != 3) throw InvalidInput("load_envmap: PFM env map must be RGB");
        env.width = img.width;
        env.height = img.height;
        env.texels.resize(img.pixel_count());
        for (int y = 0; y < img.height; ++y)
            for (int x = 0; x < img.width; ++x) env.at(x, y) = img.rgb(x, y);
    } else {
        throw InvalidInput("load_envmap: unsupported extension " + path.extension().string());
    }
    if (!env.valid()) throw InvalidInput("load_envmap: invalid map in " + path.string());
    return env;
}

void save_envmap(const EnvMap& env, const std::filesystem::path& path) {
    if (!env.valid()) throw InvalidInput("save_envmap: invalid map");
    if (path.extension() == ".hdr") {
        save_hdr(env, path);
    } else if (path.extension() == ".pfm") {
        Image img(env.width, env.height, 3);
        for (int y = 0; y < env.height; ++y)
            for (int x = 0; x < env.width; ++x) img.set_rgb(x, y, env.at(x, y));
        save_pfm(img, path);
    } else {
        throw InvalidInput("save_envmap: unsupported extension " + path.extension().string());
    }
}

}  // namespace gprt

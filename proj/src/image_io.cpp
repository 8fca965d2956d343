#include <zlib.h>

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "gprt/errors.hpp"
#include "gprt/image.hpp"

namespace gprt {

namespace {

void write_exact(std::ofstream& f, const void* p, size_t n) {
    f.write(static_cast<const char*>(p), std::streamsize(n));
}

static_assert(std::endian::native == std::endian::little,
              "PFM/blob IO assumes a little-endian host");

}  // namespace

Image load_pfm(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw InvalidInput("load_pfm: cannot open " + path.string());
    std::string magic;
    f >> magic;
    int channels;
    if (magic == "PF") channels = 3;
    else if (magic == "Pf") channels = 1;
    else throw InvalidInput("load_pfm: bad magic in " + path.string());
    int w, h;
    double scale;
    f >> w >> h >> scale;
    f.get();  // single whitespace after header
    if (w <= 0 || h <= 0) throw InvalidInput("load_pfm: bad dimensions");
    if (scale >= 0.0) throw InvalidInput("load_pfm: big-endian PFM not supported");

    std::vector<float> row(size_t(w) * channels);
    Image img(w, h, channels);
    // PFM rows are bottom-to-top.
    for (int y = h - 1; y >= 0; --y) {
        f.read(reinterpret_cast<char*>(row.data()), std::streamsize(row.size() * 4));
        if (!f) throw InvalidInput("load_pfm: truncated file");
        for (size_t i = 0; i < row.size(); ++i)
            img.data[(size_t(y) * w) * channels + i] = double(row[i]);
    }
    return img;
}

void save_pfm(const Image& img, const std::filesystem::path& path) {
    if (img.channels != 1 && img.channels != 3)
        throw InvalidInput("save_pfm: channels must be 1 or 3");
    std::ofstream f(path, std::ios::binary);
    if (!f) throw InvalidInput("save_pfm: cannot open " + path.string());
    f << (img.channels == 3 ? "PF" : "Pf") << "\n"
      << img.width << " " << img.height << "\n-1.0\n";
    std::vector<float> row(size_t(img.width) * img.channels);
    for (int y = img.height - 1; y >= 0; --y) {
        for (size_t i = 0; i < row.size(); ++i)
            row[i] = float(img.data[(size_t(y) * img.width) * img.channels + i]);
        write_exact(f, row.data(), row.size() * 4);
    }
}

namespace {

// PNG container with a single zlib-compressed IDAT; enough for our output path.
void png_chunk(std::ofstream& f, const char type[4], const std::uint8_t* data, size_t n) {
    std::uint8_t head[8];
    std::uint32_t len = std::uint32_t(n);
    head[0] = len >> 24; head[1] = len >> 16; head[2] = len >> 8; head[3] = len;
    std::memcpy(head + 4, type, 4);
    write_exact(f, head, 8);
    if (n > 0) write_exact(f, data, n);
    std::uint32_t crc = crc32(0, head + 4, 4);
    if (n > 0) crc = crc32(crc, data, uInt(n));
    std::uint8_t tail[4] = {std::uint8_t(crc >> 24), std::uint8_t(crc >> 16),
                            std::uint8_t(crc >> 8), std::uint8_t(crc)};
    write_exact(f, tail, 4);
}

std::uint8_t encode_srgb8(double v) {
    double c = std::clamp(v, 0.0, 1.0);
    return std::uint8_t(std::lround(255.0 * std::pow(c, 1.0 / 2.2)));
}

}  // namespace

void save_png(const Image& img, const std::filesystem::path& path, const Image* alpha) {
    if (img.channels != 1 && img.channels != 3)
        throw InvalidInput("save_png: channels must be 1 or 3");
    if (alpha && (alpha->width != img.width || alpha->height != img.height))
        throw InvalidInput("save_png: alpha size mismatch");

    const int out_ch = (img.channels == 3 ? 3 : 1) + (alpha ? 1 : 0);
    const std::uint8_t color_type = img.channels == 3 ? (alpha ? 6 : 2) : (alpha ? 4 : 0);
    const size_t stride = size_t(img.width) * out_ch + 1;  // +1 filter byte
    std::vector<std::uint8_t> raw(stride * img.height, 0);
    for (int y = 0; y < img.height; ++y) {
        std::uint8_t* row = raw.data() + stride * y;
        row[0] = 0;  // filter: none
        for (int x = 0; x < img.width; ++x) {
            std::uint8_t* px = row + 1 + size_t(x) * out_ch;
            for (int c = 0; c < img.channels; ++c) px[c] = encode_srgb8(img.at(x, y, c));
            if (alpha) {
                double a = std::clamp(alpha->at(x, y, 0), 0.0, 1.0);
                px[out_ch - 1] = std::uint8_t(std::lround(255.0 * a));
            }
        }
    }

    uLongf comp_size = compressBound(uLong(raw.size()));
    std::vector<std::uint8_t> comp(comp_size);
    if (compress2(comp.data(), &comp_size, raw.data(), uLong(raw.size()), 6) != Z_OK)
        throw std::runtime_error("save_png: deflate failed");

    std::ofstream f(path, std::ios::binary);
    if (!f) throw InvalidInput("save_png: cannot open " + path.string());
    static const std::uint8_t sig[8] = {137, 80, 78, 71, 13, 10, 26, 10};
    write_exact(f, sig, 8);
    std::uint8_t ihdr[13];
    auto put32 = [](std::uint8_t* p, std::uint32_t v) {
        p[0] = v >> 24; p[1] = v >> 16; p[2] = v >> 8; p[3] = v;
    };
    put32(ihdr, std::uint32_t(img.width));
    put32(ihdr + 4, std::uint32_t(img.height));
    ihdr[8] = 8;  // bit depth
    ihdr[9] = color_type;
    ihdr[10] = ihdr[11] = ihdr[12] = 0;
    png_chunk(f, "IHDR", ihdr, 13);
    png_chunk(f, "IDAT", comp.data(), comp_size);
    png_chunk(f, "IEND", nullptr, 0);
}

double psnr(const Image& a, const Image& b) {
    if (!a.same_shape(b)) throw InvalidInput("psnr: shape mismatch");
    if (a.data.empty()) throw InvalidInput("psnr: empty images");
    double mse = 0.0;
    for (size_t i = 0; i < a.data.size(); ++i) {
        double d = a.data[i] - b.data[i];
        mse += d * d;
    }
    mse /= double(a.data.size());
    if (mse == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(1.0 / mse);
}

}  // namespace gprt

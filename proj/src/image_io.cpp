#include "photogeo/image_io.hpp"

#include "photogeo/error.hpp"

#include <png.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <sstream>
#include <vector>

namespace photogeo {

namespace fs = std::filesystem;

namespace {

static_assert(std::endian::native == std::endian::little, "PFM writer assumes a little-endian host");

fs::path temp_path_for(const fs::path& path)
{
    auto tmp = path;
    tmp += ".tmp";
    return tmp;
}

void commit(const fs::path& tmp, const fs::path& path)
{
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec)
        throw Error(ErrorCode::IoFailure, "cannot move " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

std::string read_all(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(ErrorCode::MissingFile, "cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

template <int Channels>
std::string encode_pfm(int width, int height, const float* rows_top_down)
{
    std::ostringstream out;
    out << (Channels == 3 ? "PF" : "Pf") << "\n" << width << " " << height << "\n-1.0\n";
    const std::size_t row_floats = static_cast<std::size_t>(width) * Channels;
    for (int y = height - 1; y >= 0; --y)
        out.write(reinterpret_cast<const char*>(rows_top_down + y * row_floats),
                  static_cast<std::streamsize>(row_floats * sizeof(float)));
    return out.str();
}

struct PfmData
{
    int width = 0, height = 0, channels = 0;
    std::vector<float> top_down;
};

PfmData decode_pfm(const fs::path& path)
{
    const std::string bytes = read_all(path);
    std::istringstream in(bytes);
    std::string magic;
    PfmData d;
    double scale = 0.0;
    in >> magic >> d.width >> d.height >> scale;
    if (!in || (magic != "PF" && magic != "Pf") || d.width <= 0 || d.height <= 0)
        throw Error(ErrorCode::DecodeFailure, "malformed PFM header in " + path.string());
    in.get();
    d.channels = magic == "PF" ? 3 : 1;
    const std::size_t row_floats = static_cast<std::size_t>(d.width) * d.channels;
    const std::size_t offset = static_cast<std::size_t>(in.tellg());
    if (bytes.size() < offset + row_floats * d.height * sizeof(float))
        throw Error(ErrorCode::DecodeFailure, "truncated PFM payload in " + path.string());
    d.top_down.resize(row_floats * d.height);
    for (int y = 0; y < d.height; ++y) {
        const char* src = bytes.data() + offset + static_cast<std::size_t>(d.height - 1 - y) * row_floats * sizeof(float);
        std::memcpy(d.top_down.data() + y * row_floats, src, row_floats * sizeof(float));
    }
    if (scale > 0.0)
        for (float& v : d.top_down) {
            std::uint32_t u;
            std::memcpy(&u, &v, 4);
            u = __builtin_bswap32(u);
            std::memcpy(&v, &u, 4);
        }
    return d;
}

std::uint8_t quantize(double v)
{
    return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

std::string encode_png(int width, int height, int channels, const std::vector<std::uint8_t>& pixels)
{
    // The simplified writer tags 8-bit output with an sRGB chunk.
    png_image image;
    std::memset(&image, 0, sizeof(image));
    image.version = PNG_IMAGE_VERSION;
    image.width = static_cast<png_uint_32>(width);
    image.height = static_cast<png_uint_32>(height);
    image.format = channels == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
    png_alloc_size_t size = 0;
    if (!png_image_write_to_memory(&image, nullptr, &size, 0, pixels.data(), 0, nullptr))
        throw Error(ErrorCode::IoFailure, std::string("png encode: ") + image.message);
    std::string out(size, '\0');
    if (!png_image_write_to_memory(&image, out.data(), &size, 0, pixels.data(), 0, nullptr))
        throw Error(ErrorCode::IoFailure, std::string("png encode: ") + image.message);
    out.resize(size);
    return out;
}

struct PngData
{
    int width = 0, height = 0;
    std::vector<std::uint8_t> rgb;
};

PngData decode_png(const fs::path& path)
{
    const std::string bytes = read_all(path);
    if (bytes.size() < 8 || png_sig_cmp(reinterpret_cast<png_const_bytep>(bytes.data()), 0, 8) != 0)
        throw Error(ErrorCode::DecodeFailure, path.string() + " is not a PNG file");

    png_image image;
    std::memset(&image, 0, sizeof(image));
    image.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size()))
        throw Error(ErrorCode::DecodeFailure, path.string() + ": " + image.message);
    image.format = PNG_FORMAT_RGB;
    PngData d;
    d.width = static_cast<int>(image.width);
    d.height = static_cast<int>(image.height);
    d.rgb.resize(PNG_IMAGE_SIZE(image));
    if (!png_image_finish_read(&image, nullptr, d.rgb.data(), 0, nullptr)) {
        png_image_free(&image);
        throw Error(ErrorCode::DecodeFailure, path.string() + ": " + image.message);
    }
    return d;
}

} // namespace

void write_file_atomic(const fs::path& path, const std::string& bytes)
{
    const auto tmp = temp_path_for(path);
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw Error(ErrorCode::IoFailure, "cannot write " + tmp.string());
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!out)
            throw Error(ErrorCode::IoFailure, "short write to " + tmp.string());
    }
    commit(tmp, path);
}

void write_pfm(const fs::path& path, const ScalarMap& map)
{
    std::vector<float> buf(map.size());
    std::transform(map.begin(), map.end(), buf.begin(), [](double v) { return static_cast<float>(v); });
    write_file_atomic(path, encode_pfm<1>(map.width(), map.height(), buf.data()));
}

void write_pfm(const fs::path& path, const Grid<Vec3>& map)
{
    std::vector<float> buf;
    buf.reserve(map.size() * 3);
    for (const auto& v : map)
        for (int c = 0; c < 3; ++c)
            buf.push_back(static_cast<float>(v[c]));
    write_file_atomic(path, encode_pfm<3>(map.width(), map.height(), buf.data()));
}

ScalarMap read_pfm_scalar(const fs::path& path)
{
    const auto d = decode_pfm(path);
    if (d.channels != 1)
        throw Error(ErrorCode::DecodeFailure, path.string() + " is a colour PFM, expected greyscale");
    ScalarMap out(d.width, d.height);
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = d.top_down[i];
    return out;
}

Grid<Vec3> read_pfm_color(const fs::path& path)
{
    const auto d = decode_pfm(path);
    if (d.channels != 3)
        throw Error(ErrorCode::DecodeFailure, path.string() + " is a greyscale PFM, expected colour");
    Grid<Vec3> out(d.width, d.height);
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = Vec3(d.top_down[3 * i], d.top_down[3 * i + 1], d.top_down[3 * i + 2]);
    return out;
}

void write_png(const fs::path& path, const Image& image)
{
    std::vector<std::uint8_t> px;
    px.reserve(image.size() * 3);
    for (const auto& v : image)
        for (int c = 0; c < 3; ++c)
            px.push_back(quantize(v[c]));
    write_file_atomic(path, encode_png(image.width(), image.height(), 3, px));
}

void write_png(const fs::path& path, const Mask& mask)
{
    std::vector<std::uint8_t> px(mask.size());
    std::transform(mask.begin(), mask.end(), px.begin(), [](std::uint8_t m) { return m ? 255 : 0; });
    write_file_atomic(path, encode_png(mask.width(), mask.height(), 1, px));
}

Image read_png(const fs::path& path)
{
    const auto d = decode_png(path);
    Image out(d.width, d.height);
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = Vec3(d.rgb[3 * i], d.rgb[3 * i + 1], d.rgb[3 * i + 2]) / 255.0;
    return out;
}

Mask read_png_mask(const fs::path& path)
{
    const auto d = decode_png(path);
    Mask out(d.width, d.height, 0);
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = (d.rgb[3 * i] >= 128 || d.rgb[3 * i + 1] >= 128 || d.rgb[3 * i + 2] >= 128) ? 1 : 0;
    return out;
}

} // namespace photogeo

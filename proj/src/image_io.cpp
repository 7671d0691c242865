#include "dsu/image_io.hpp"

#include <zlib.h>

#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>

namespace dsu {

namespace {

std::function<void(const std::string&)>& audit_hook() {
    static std::function<void(const std::string&)> hook;
    return hook;
}

void audit(const std::string& path) {
    if (audit_hook()) audit_hook()(path);
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open file: " + path);
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return bytes;
}

bool has_suffix(const std::string& s, const char* suf) {
    const std::size_t n = std::strlen(suf);
    return s.size() >= n && s.compare(s.size() - n, n, suf) == 0;
}

// ---- PGM (P5, maxval 255) ----

struct PgmHeader {
    int width = 0, height = 0, maxval = 0;
    std::size_t data_offset = 0;
};

PgmHeader parse_pgm_header(const std::string& bytes, const std::string& path) {
    std::size_t pos = 0;
    auto skip_ws = [&]() {
        while (pos < bytes.size()) {
            const char c = bytes[pos];
            if (c == '#') {
                while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
            } else if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
                ++pos;
            } else {
                break;
            }
        }
    };
    auto read_int = [&](int& out) {
        skip_ws();
        std::size_t start = pos;
        while (pos < bytes.size() && bytes[pos] >= '0' && bytes[pos] <= '9') ++pos;
        if (pos == start)
            throw DecodeError(DecodeErrorKind::MalformedHeader, "PGM: bad header field in " + path);
        out = std::stoi(bytes.substr(start, pos - start));
    };

    if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5')
        throw DecodeError(DecodeErrorKind::MalformedHeader, "PGM: missing P5 magic in " + path);
    pos = 2;
    PgmHeader h;
    read_int(h.width);
    read_int(h.height);
    read_int(h.maxval);
    if (h.width <= 0 || h.height <= 0)
        throw DecodeError(DecodeErrorKind::MalformedHeader, "PGM: bad dimensions in " + path);
    if (h.maxval != 255)
        throw DecodeError(DecodeErrorKind::UnsupportedBitDepth,
                          "PGM: maxval " + std::to_string(h.maxval) + " unsupported (need 255) in " + path);
    // exactly one whitespace byte separates the header from raster data
    if (pos >= bytes.size())
        throw DecodeError(DecodeErrorKind::MalformedHeader, "PGM: truncated header in " + path);
    ++pos;
    h.data_offset = pos;
    return h;
}

ScalarField load_pgm(const std::string& path) {
    const std::string bytes = read_file(path);
    const PgmHeader h = parse_pgm_header(bytes, path);
    const std::size_t need = static_cast<std::size_t>(h.width) * h.height;
    if (bytes.size() - h.data_offset < need)
        throw DecodeError(DecodeErrorKind::DimensionMismatch,
                          "PGM: raster shorter than declared size in " + path);
    ScalarField f(h.width, h.height);
    for (std::size_t i = 0; i < need; ++i)
        f.data[i] = static_cast<float>(static_cast<std::uint8_t>(bytes[h.data_offset + i])) / 255.0f;
    return f;
}

void save_pgm(const std::string& path, const ScalarField& f) {
    char header[64];
    std::snprintf(header, sizeof(header), "P5\n%d %d\n255\n", f.width, f.height);
    std::string out(header);
    out.reserve(out.size() + f.size());
    for (const float v : f.data) out.push_back(static_cast<char>(quantize8(v)));
    atomic_write_file(path, out);
}

// ---- PNG: minimal codec over zlib ----
// Supports bit depth 8, color types 0 (gray) and 2 (RGB), no interlace.
// All five scanline filters are handled on read; the writer emits filter 0.

constexpr unsigned char kPngSig[8] = {0x89, 'P', 'N', 'G', 0x0d, 0x0a, 0x1a, 0x0a};

std::uint32_t be32(const unsigned char* p) {
    return (std::uint32_t(p[0]) << 24) | (std::uint32_t(p[1]) << 16) | (std::uint32_t(p[2]) << 8) |
           std::uint32_t(p[3]);
}

void put_be32(std::string& s, std::uint32_t v) {
    s.push_back(static_cast<char>((v >> 24) & 0xff));
    s.push_back(static_cast<char>((v >> 16) & 0xff));
    s.push_back(static_cast<char>((v >> 8) & 0xff));
    s.push_back(static_cast<char>(v & 0xff));
}

struct PngImage {
    int width = 0, height = 0;
    int channels = 0; // 1 = gray, 3 = rgb
    std::vector<std::uint8_t> pixels; // row-major, interleaved
};

std::vector<std::uint8_t> zlib_inflate(const unsigned char* src, std::size_t n,
                                       std::size_t expect) {
    std::vector<std::uint8_t> out(expect);
    uLongf dst_len = static_cast<uLongf>(expect);
    const int rc = uncompress(out.data(), &dst_len, src, static_cast<uLong>(n));
    if (rc != Z_OK || dst_len != expect)
        throw DecodeError(DecodeErrorKind::DimensionMismatch, "PNG: bad or truncated IDAT stream");
    return out;
}

std::string zlib_deflate(const std::uint8_t* src, std::size_t n) {
    uLongf cap = compressBound(static_cast<uLong>(n));
    std::string out(cap, '\0');
    const int rc = compress2(reinterpret_cast<Bytef*>(out.data()), &cap, src,
                             static_cast<uLong>(n), 6);
    if (rc != Z_OK) throw DataError("PNG: deflate failed");
    out.resize(cap);
    return out;
}

int paeth(int a, int b, int c) {
    const int p = a + b - c;
    const int pa = std::abs(p - a), pb = std::abs(p - b), pc = std::abs(p - c);
    if (pa <= pb && pa <= pc) return a;
    if (pb <= pc) return b;
    return c;
}

PngImage load_png(const std::string& path) {
    const std::string bytes = read_file(path);
    if (bytes.size() < 8 || std::memcmp(bytes.data(), kPngSig, 8) != 0)
        throw DecodeError(DecodeErrorKind::MalformedHeader, "PNG: missing signature in " + path);

    PngImage img;
    int bit_depth = 0, color_type = -1, interlace = 0;
    std::vector<unsigned char> idat;
    std::size_t pos = 8;
    bool saw_ihdr = false, saw_iend = false;

    while (pos + 8 <= bytes.size() && !saw_iend) {
        const auto* p = reinterpret_cast<const unsigned char*>(bytes.data() + pos);
        const std::uint32_t len = be32(p);
        if (pos + 12 + len > bytes.size())
            throw DecodeError(DecodeErrorKind::MalformedHeader, "PNG: truncated chunk in " + path);
        const std::string type = bytes.substr(pos + 4, 4);
        const unsigned char* data = p + 8;
        const std::uint32_t want_crc = be32(p + 8 + len);
        const std::uint32_t got_crc = static_cast<std::uint32_t>(
            crc32(crc32(0L, Z_NULL, 0), p + 4, len + 4));
        if (want_crc != got_crc)
            throw DecodeError(DecodeErrorKind::BadChecksum, "PNG: chunk CRC mismatch in " + path);

        if (type == "IHDR") {
            if (len != 13)
                throw DecodeError(DecodeErrorKind::MalformedHeader, "PNG: bad IHDR in " + path);
            img.width = static_cast<int>(be32(data));
            img.height = static_cast<int>(be32(data + 4));
            bit_depth = data[8];
            color_type = data[9];
            interlace = data[12];
            saw_ihdr = true;
        } else if (type == "IDAT") {
            idat.insert(idat.end(), data, data + len);
        } else if (type == "IEND") {
            saw_iend = true;
        } // ancillary chunks ignored
        pos += 12 + len;
    }
    if (!saw_ihdr || img.width <= 0 || img.height <= 0)
        throw DecodeError(DecodeErrorKind::MalformedHeader, "PNG: missing IHDR in " + path);
    if (bit_depth != 8)
        throw DecodeError(DecodeErrorKind::UnsupportedBitDepth,
                          "PNG: bit depth " + std::to_string(bit_depth) + " unsupported in " + path);
    if (color_type == 0) img.channels = 1;
    else if (color_type == 2) img.channels = 3;
    else
        throw DecodeError(DecodeErrorKind::UnsupportedColorType,
                          "PNG: color type " + std::to_string(color_type) + " unsupported in " + path);
    if (interlace != 0)
        throw DecodeError(DecodeErrorKind::UnsupportedColorType,
                          "PNG: interlaced images unsupported in " + path);

    const std::size_t stride = static_cast<std::size_t>(img.width) * img.channels;
    const std::size_t raw_len = (stride + 1) * img.height;
    std::vector<std::uint8_t> raw = zlib_inflate(idat.data(), idat.size(), raw_len);

    img.pixels.resize(stride * img.height);
    const int bpp = img.channels;
    for (int y = 0; y < img.height; ++y) {
        const std::uint8_t filter = raw[(stride + 1) * y];
        const std::uint8_t* src = raw.data() + (stride + 1) * y + 1;
        std::uint8_t* dst = img.pixels.data() + stride * y;
        const std::uint8_t* up = y > 0 ? img.pixels.data() + stride * (y - 1) : nullptr;
        for (std::size_t x = 0; x < stride; ++x) {
            const int a = x >= static_cast<std::size_t>(bpp) ? dst[x - bpp] : 0;
            const int b = up ? up[x] : 0;
            const int c = (up && x >= static_cast<std::size_t>(bpp)) ? up[x - bpp] : 0;
            int v = src[x];
            switch (filter) {
                case 0: break;
                case 1: v += a; break;
                case 2: v += b; break;
                case 3: v += (a + b) / 2; break;
                case 4: v += paeth(a, b, c); break;
                default:
                    throw DecodeError(DecodeErrorKind::MalformedHeader,
                                      "PNG: unknown scanline filter in " + path);
            }
            dst[x] = static_cast<std::uint8_t>(v & 0xff);
        }
    }
    return img;
}

void save_png(const std::string& path, const PngImage& img) {
    const std::size_t stride = static_cast<std::size_t>(img.width) * img.channels;
    std::vector<std::uint8_t> raw((stride + 1) * img.height);
    for (int y = 0; y < img.height; ++y) {
        raw[(stride + 1) * y] = 0; // filter: none
        std::memcpy(raw.data() + (stride + 1) * y + 1, img.pixels.data() + stride * y, stride);
    }
    const std::string idat = zlib_deflate(raw.data(), raw.size());

    std::string out(reinterpret_cast<const char*>(kPngSig), 8);
    auto chunk = [&out](const char* type, const std::string& payload) {
        put_be32(out, static_cast<std::uint32_t>(payload.size()));
        std::string body(type);
        body += payload;
        out += body;
        const std::uint32_t crc = static_cast<std::uint32_t>(
            crc32(crc32(0L, Z_NULL, 0), reinterpret_cast<const Bytef*>(body.data()),
                  static_cast<uInt>(body.size())));
        put_be32(out, crc);
    };

    std::string ihdr;
    put_be32(ihdr, static_cast<std::uint32_t>(img.width));
    put_be32(ihdr, static_cast<std::uint32_t>(img.height));
    ihdr.push_back(8);                                      // bit depth
    ihdr.push_back(img.channels == 1 ? 0 : 2);              // color type
    ihdr.push_back(0);                                      // compression
    ihdr.push_back(0);                                      // filter
    ihdr.push_back(0);                                      // interlace
    chunk("IHDR", ihdr);
    chunk("IDAT", idat);
    chunk("IEND", "");
    atomic_write_file(path, out);
}

} // namespace

std::uint8_t quantize8(float v) {
    if (!(v >= 0.0f)) v = 0.0f;
    if (v > 1.0f) v = 1.0f;
    return static_cast<std::uint8_t>(std::lround(v * 255.0f));
}

void set_io_audit(std::function<void(const std::string&)> cb) { audit_hook() = std::move(cb); }

void atomic_write_file(const std::string& path, const std::string& bytes) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw DataError("cannot open for write: " + tmp);
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!out) throw DataError("write failed: " + tmp);
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw DataError("rename failed for " + path + ": " + ec.message());
}

ScalarField load_gray(const std::string& path) { return load_gray(path, false); }

ScalarField load_gray(const std::string& path, bool invert) {
    audit(path);
    ScalarField f;
    if (has_suffix(path, ".pgm")) {
        f = load_pgm(path);
    } else if (has_suffix(path, ".png")) {
        const PngImage img = load_png(path);
        if (img.channels != 1)
            throw DecodeError(DecodeErrorKind::UnsupportedColorType,
                              "expected grayscale PNG: " + path);
        f = ScalarField(img.width, img.height);
        for (std::size_t i = 0; i < f.size(); ++i)
            f.data[i] = static_cast<float>(img.pixels[i]) / 255.0f;
    } else {
        throw DecodeError(DecodeErrorKind::MalformedHeader,
                          "unsupported image extension (want .pgm or .png): " + path);
    }
    if (invert)
        for (float& v : f.data) v = 1.0f - v;
    return f;
}

RgbImage load_rgb(const std::string& path) {
    audit(path);
    if (!has_suffix(path, ".png"))
        throw DecodeError(DecodeErrorKind::MalformedHeader,
                          "RGB images must be PNG: " + path);
    const PngImage img = load_png(path);
    if (img.channels != 3)
        throw DecodeError(DecodeErrorKind::UnsupportedColorType, "expected RGB PNG: " + path);
    RgbImage out(img.width, img.height);
    for (std::size_t i = 0; i < out.pixels(); ++i)
        for (int c = 0; c < 3; ++c)
            out.plane[c][i] = static_cast<float>(img.pixels[i * 3 + c]) / 255.0f;
    return out;
}

void save_gray(const std::string& path, const ScalarField& f) {
    if (has_suffix(path, ".pgm")) {
        save_pgm(path, f);
        return;
    }
    if (has_suffix(path, ".png")) {
        PngImage img;
        img.width = f.width;
        img.height = f.height;
        img.channels = 1;
        img.pixels.resize(f.size());
        for (std::size_t i = 0; i < f.size(); ++i) img.pixels[i] = quantize8(f.data[i]);
        save_png(path, img);
        return;
    }
    throw DataError("unsupported image extension (want .pgm or .png): " + path);
}

void save_rgb(const std::string& path, const RgbImage& rgb) {
    if (!has_suffix(path, ".png")) throw DataError("RGB images must be PNG: " + path);
    PngImage img;
    img.width = rgb.width;
    img.height = rgb.height;
    img.channels = 3;
    img.pixels.resize(rgb.pixels() * 3);
    for (std::size_t i = 0; i < rgb.pixels(); ++i)
        for (int c = 0; c < 3; ++c) img.pixels[i * 3 + c] = quantize8(rgb.plane[c][i]);
    save_png(path, img);
}

} // namespace dsu

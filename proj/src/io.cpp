#include "angiokit/io.hpp"

#include <png.h>

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

#include <json.hpp>

namespace angiokit::io {

namespace {

[[noreturn]] void io_fail(const std::string& path, const std::string& what) {
    fail(ErrorCode::Io, path + ": " + what);
}

std::string lower_extension(const std::string& path) {
    const auto dot = path.find_last_of('.');
    const auto slash = path.find_last_of("/\\");
    if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) return {};
    std::string ext = path.substr(dot + 1);
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    return ext;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) io_fail(path, "cannot open for reading");
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void dump(const std::string& bytes, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) io_fail(path, "cannot open for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) io_fail(path, "write failed");
}

// Plain 8-bit samples, row-major.
struct Samples {
    int width = 0;
    int height = 0;
    int channels = 1;
    std::vector<double> values;  // normalised to [0, 1] for integer formats
};

// Header tokens of PNM-style files, skipping comments.
class HeaderReader {
public:
    HeaderReader(const std::string& bytes, const std::string& path) : bytes_(bytes), path_(path) {}

    std::string token() {
        while (pos_ < bytes_.size()) {
            const char c = bytes_[pos_];
            if (c == '#') {
                while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                ++pos_;
            } else {
                break;
            }
        }
        const std::size_t start = pos_;
        while (pos_ < bytes_.size() && !std::isspace(static_cast<unsigned char>(bytes_[pos_]))) ++pos_;
        if (start == pos_) io_fail(path_, "truncated header");
        return bytes_.substr(start, pos_ - start);
    }

    long integer() {
        const std::string t = token();
        char* end = nullptr;
        const long v = std::strtol(t.c_str(), &end, 10);
        if (*end != '\0' || v <= 0) io_fail(path_, "bad header value '" + t + "'");
        return v;
    }

    // Exactly one whitespace byte separates the header from the payload.
    std::size_t payload_offset() {
        if (pos_ >= bytes_.size()) io_fail(path_, "missing payload");
        return pos_ + 1;
    }

private:
    const std::string& bytes_;
    const std::string& path_;
    std::size_t pos_ = 0;
};

Samples read_pgm(const std::string& path) {
    const std::string bytes = slurp(path);
    HeaderReader h(bytes, path);
    if (h.token() != "P5") io_fail(path, "not a binary PGM (P5)");
    Samples s;
    s.width = static_cast<int>(h.integer());
    s.height = static_cast<int>(h.integer());
    const long maxval = h.integer();
    if (maxval > 65535) io_fail(path, "PGM maxval above 65535");
    const std::size_t offset = h.payload_offset();
    const std::size_t n = static_cast<std::size_t>(s.width) * static_cast<std::size_t>(s.height);
    const std::size_t bps = maxval > 255 ? 2 : 1;
    if (bytes.size() < offset + n * bps) io_fail(path, "truncated PGM payload");
    s.values.resize(n);
    const auto* p = reinterpret_cast<const unsigned char*>(bytes.data() + offset);
    for (std::size_t i = 0; i < n; ++i) {
        const unsigned v = bps == 1 ? p[i] : (static_cast<unsigned>(p[2 * i]) << 8) | p[2 * i + 1];
        s.values[i] = static_cast<double>(v) / static_cast<double>(maxval);
    }
    return s;
}

void write_pgm(int w, int h, const std::vector<std::uint8_t>& bytes, const std::string& path) {
    std::string out = "P5\n" + std::to_string(w) + " " + std::to_string(h) + "\n255\n";
    out.append(reinterpret_cast<const char*>(bytes.data()), bytes.size());
    dump(out, path);
}

Samples read_png(const std::string& path) {
    png_image image;
    std::memset(&image, 0, sizeof image);
    image.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_file(&image, path.c_str())) io_fail(path, image.message);
    image.format = PNG_FORMAT_GRAY;
    std::vector<std::uint8_t> buf(PNG_IMAGE_SIZE(image));
    if (!png_image_finish_read(&image, nullptr, buf.data(), 0, nullptr)) {
        const std::string msg = image.message;
        png_image_free(&image);
        io_fail(path, msg);
    }
    Samples s;
    s.width = static_cast<int>(image.width);
    s.height = static_cast<int>(image.height);
    s.values.resize(buf.size());
    for (std::size_t i = 0; i < buf.size(); ++i) s.values[i] = buf[i] / 255.0;
    return s;
}

void write_png(int w, int h, png_uint_32 format, const void* data, const std::string& path) {
    png_image image;
    std::memset(&image, 0, sizeof image);
    image.version = PNG_IMAGE_VERSION;
    image.width = static_cast<png_uint_32>(w);
    image.height = static_cast<png_uint_32>(h);
    image.format = format;
    if (!png_image_write_to_file(&image, path.c_str(), 0, data, 0, nullptr)) io_fail(path, image.message);
}

Samples read_pfm(const std::string& path) {
    const std::string bytes = slurp(path);
    HeaderReader h(bytes, path);
    const std::string magic = h.token();
    Samples s;
    if (magic == "Pf") s.channels = 1;
    else if (magic == "PF") s.channels = 3;
    else io_fail(path, "not a PFM file");
    s.width = static_cast<int>(h.integer());
    s.height = static_cast<int>(h.integer());
    const std::string scale_tok = h.token();
    char* end = nullptr;
    const double scale = std::strtod(scale_tok.c_str(), &end);
    if (*end != '\0' || scale == 0.0 || !std::isfinite(scale)) io_fail(path, "bad PFM scale");
    const bool little = scale < 0.0;
    const std::size_t offset = h.payload_offset();
    const std::size_t row = static_cast<std::size_t>(s.width) * static_cast<std::size_t>(s.channels);
    const std::size_t n = row * static_cast<std::size_t>(s.height);
    if (bytes.size() < offset + n * 4) io_fail(path, "truncated PFM payload");
    s.values.resize(n);
    for (int y = 0; y < s.height; ++y) {
        // Rows are stored bottom to top.
        const std::size_t src_row = static_cast<std::size_t>(s.height - 1 - y);
        for (std::size_t i = 0; i < row; ++i) {
            unsigned char b[4];
            std::memcpy(b, bytes.data() + offset + (src_row * row + i) * 4, 4);
            const std::uint32_t bits = little ? (std::uint32_t{b[0]} | std::uint32_t{b[1]} << 8 |
                                                 std::uint32_t{b[2]} << 16 | std::uint32_t{b[3]} << 24)
                                              : (std::uint32_t{b[3]} | std::uint32_t{b[2]} << 8 |
                                                 std::uint32_t{b[1]} << 16 | std::uint32_t{b[0]} << 24);
            s.values[static_cast<std::size_t>(y) * row + i] = std::bit_cast<float>(bits);
        }
    }
    return s;
}

void write_pfm(int w, int h, int channels, const std::vector<double>& values, const std::string& path) {
    std::string out = std::string(channels == 1 ? "Pf" : "PF") + "\n" + std::to_string(w) + " " +
                      std::to_string(h) + "\n-1.0\n";
    const std::size_t row = static_cast<std::size_t>(w) * static_cast<std::size_t>(channels);
    out.reserve(out.size() + values.size() * 4);
    for (int y = h - 1; y >= 0; --y) {
        for (std::size_t i = 0; i < row; ++i) {
            const auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(values[static_cast<std::size_t>(y) * row + i]));
            const char b[4] = {static_cast<char>(bits & 0xff), static_cast<char>((bits >> 8) & 0xff),
                               static_cast<char>((bits >> 16) & 0xff), static_cast<char>((bits >> 24) & 0xff)};
            out.append(b, 4);
        }
    }
    dump(out, path);
}

Samples read_any(const std::string& path) {
    switch (format_for(path)) {
        case Format::png: return read_png(path);
        case Format::pgm: return read_pgm(path);
        case Format::pfm: return read_pfm(path);
    }
    io_fail(path, "unsupported format");
}

Samples read_single(const std::string& path) {
    Samples s = read_any(path);
    if (s.channels != 1) io_fail(path, "expected a single-channel raster");
    return s;
}

std::uint8_t to_byte(double v) {
    if (!std::isfinite(v)) v = 0.0;
    return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

void write_unit(int w, int h, const std::vector<double>& values, const std::string& path) {
    const Format f = format_for(path);
    if (f == Format::pfm) {
        write_pfm(w, h, 1, values, path);
        return;
    }
    std::vector<std::uint8_t> bytes(values.size());
    std::transform(values.begin(), values.end(), bytes.begin(), to_byte);
    if (f == Format::png) write_png(w, h, PNG_FORMAT_GRAY, bytes.data(), path);
    else write_pgm(w, h, bytes, path);
}

}  // namespace

Format format_for(const std::string& path) {
    const std::string ext = lower_extension(path);
    if (ext == "png") return Format::png;
    if (ext == "pgm") return Format::pgm;
    if (ext == "pfm") return Format::pfm;
    io_fail(path, "unsupported raster extension (expected .png, .pgm or .pfm)");
}

GrayImage read_gray(const std::string& path) {
    Samples s = read_single(path);
    GrayImage img(s.width, s.height, std::move(s.values));
    validate(img);
    return img;
}

ProbabilityMap read_probability(const std::string& path) {
    Samples s = read_single(path);
    ProbabilityMap prob(s.width, s.height, std::move(s.values));
    validate(prob);
    return prob;
}

BinaryMask read_mask(const std::string& path) {
    const Samples s = read_single(path);
    BinaryMask mask(s.width, s.height);
    for (std::size_t i = 0; i < s.values.size(); ++i) mask[i] = s.values[i] != 0.0 ? 1 : 0;
    return mask;
}

void write_gray(const GrayImage& img, const std::string& path) {
    write_unit(img.width(), img.height(), img.data(), path);
}

void write_probability(const ProbabilityMap& prob, const std::string& path) {
    write_unit(prob.width(), prob.height(), prob.data(), path);
}

void write_mask(const BinaryMask& mask, const std::string& path) {
    std::vector<double> v(mask.size());
    for (std::size_t i = 0; i < mask.size(); ++i) v[i] = mask[i] ? 1.0 : 0.0;
    write_unit(mask.width(), mask.height(), v, path);
}

void write_stack(const preprocess::ChannelStack& stack, const std::string& path) {
    if (format_for(path) != Format::pfm) io_fail(path, "channel stacks are written as .pfm");
    const std::size_t n = static_cast<std::size_t>(stack.width()) * static_cast<std::size_t>(stack.height());
    std::vector<double> interleaved(n * 3);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t c = 0; c < 3; ++c) interleaved[i * 3 + c] = stack.channel(c)[i];
    write_pfm(stack.width(), stack.height(), 3, interleaved, path);
}

std::array<GrayImage, 3> read_stack(const std::string& path) {
    const Samples s = read_pfm(path);
    if (s.channels != 3) io_fail(path, "expected a three-channel PFM");
    std::array<GrayImage, 3> out;
    for (std::size_t c = 0; c < 3; ++c) {
        out[c] = GrayImage(s.width, s.height);
        for (std::size_t i = 0; i < out[c].size(); ++i) out[c][i] = s.values[i * 3 + c];
    }
    return out;
}

void write_rgb(const RgbImage& img, const std::string& path) {
    require(img.pixels.size() == static_cast<std::size_t>(img.width) * static_cast<std::size_t>(img.height),
            ErrorCode::InvalidInput, "RGB pixel count must equal width * height");
    std::vector<std::uint8_t> bytes;
    bytes.reserve(img.pixels.size() * 3);
    for (const Rgb& p : img.pixels) bytes.insert(bytes.end(), {p.r, p.g, p.b});
    const std::string ext = lower_extension(path);
    if (ext == "ppm") {
        std::string out = "P6\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n255\n";
        out.append(reinterpret_cast<const char*>(bytes.data()), bytes.size());
        dump(out, path);
    } else if (ext == "png") {
        write_png(img.width, img.height, PNG_FORMAT_RGB, bytes.data(), path);
    } else {
        io_fail(path, "overlays are written as .png or .ppm");
    }
}

double read_pixel_size(const std::string& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(slurp(path));
    } catch (const nlohmann::json::exception& e) {
        io_fail(path, std::string("invalid JSON: ") + e.what());
    }
    if (!j.is_object() || !j.contains("pixel_size_mm") || !j["pixel_size_mm"].is_number())
        fail(ErrorCode::InvalidInput, path + ": missing numeric \"pixel_size_mm\"");
    const double mm = j["pixel_size_mm"].get<double>();
    validate_pixel_size(mm);
    return mm;
}

void write_pixel_size(double mm, const std::string& path) {
    validate_pixel_size(mm);
    nlohmann::ordered_json j;
    j["pixel_size_mm"] = mm;
    dump(j.dump(2) + "\n", path);
}

std::string read_text(const std::string& path) { return slurp(path); }

void write_text(const std::string& text, const std::string& path) { dump(text, path); }

}  // namespace angiokit::io

#include "sfnet/image_io.hpp"

#include <cctype>
#include <fstream>
#include <stdexcept>

namespace sfnet {

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
    throw std::runtime_error(path + ": " + what);
}

// Reads one whitespace-separated token, skipping '#' comment lines.
std::string next_token(std::istream& in) {
    std::string tok;
    int c;
    while ((c = in.get()) != EOF) {
        if (c == '#') {
            while ((c = in.get()) != EOF && c != '\n') {
            }
            continue;
        }
        if (!std::isspace(c)) {
            tok.push_back(static_cast<char>(c));
            break;
        }
    }
    while ((c = in.get()) != EOF && !std::isspace(c)) tok.push_back(static_cast<char>(c));
    return tok;
}

int parse_int(std::istream& in, const std::string& path, const char* field) {
    const std::string tok = next_token(in);
    try {
        return std::stoi(tok);
    } catch (const std::exception&) {
        fail(path, std::string("bad ") + field + " field");
    }
}

}  // namespace

void write_ppm(const std::string& path, const ImageRgb8& img) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(path, "cannot open for writing");
    out << "P6\n" << img.width << " " << img.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(img.pixels.data()),
              static_cast<std::streamsize>(img.pixels.size()));
    if (!out) fail(path, "write failed");
}

ImageRgb8 read_ppm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(path, "cannot open");
    if (next_token(in) != "P6") fail(path, "not a binary PPM (P6)");
    ImageRgb8 img;
    img.width = parse_int(in, path, "width");
    img.height = parse_int(in, path, "height");
    const int maxval = parse_int(in, path, "maxval");
    if (img.width < 1 || img.height < 1) fail(path, "bad dimensions");
    if (maxval != 255) fail(path, "unsupported maxval (expected 255)");
    img.pixels.resize(size_t(3) * img.width * img.height);
    in.read(reinterpret_cast<char*>(img.pixels.data()),
            static_cast<std::streamsize>(img.pixels.size()));
    if (in.gcount() != static_cast<std::streamsize>(img.pixels.size()))
        fail(path, "truncated pixel data");
    return img;
}

void write_pgm16(const std::string& path, const ImageGray16& img) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(path, "cannot open for writing");
    out << "P5\n" << img.width << " " << img.height << "\n65535\n";
    std::vector<uint8_t> buf(img.pixels.size() * 2);
    for (size_t i = 0; i < img.pixels.size(); ++i) {
        buf[2 * i] = static_cast<uint8_t>(img.pixels[i] >> 8);  // big-endian
        buf[2 * i + 1] = static_cast<uint8_t>(img.pixels[i] & 0xff);
    }
    out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    if (!out) fail(path, "write failed");
}

ImageGray16 read_pgm16(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(path, "cannot open");
    if (next_token(in) != "P5") fail(path, "not a binary PGM (P5)");
    ImageGray16 img;
    img.width = parse_int(in, path, "width");
    img.height = parse_int(in, path, "height");
    const int maxval = parse_int(in, path, "maxval");
    if (img.width < 1 || img.height < 1) fail(path, "bad dimensions");
    if (maxval != 65535) fail(path, "unsupported maxval (expected 65535)");
    std::vector<uint8_t> buf(size_t(2) * img.width * img.height);
    in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    if (in.gcount() != static_cast<std::streamsize>(buf.size())) fail(path, "truncated pixel data");
    img.pixels.resize(size_t(img.width) * img.height);
    for (size_t i = 0; i < img.pixels.size(); ++i)
        img.pixels[i] = static_cast<uint16_t>((buf[2 * i] << 8) | buf[2 * i + 1]);
    return img;
}

}  // namespace sfnet

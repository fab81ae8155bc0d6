#include "ultrav/io.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <system_error>

#include <unistd.h>

namespace ultrav::io {

namespace {

constexpr std::string_view kCubeMagic = "HSICUBE";
constexpr std::string_view kEmMagic = "EMTENS";

void append_le(std::string& out, double v) {
    auto bits = std::bit_cast<std::uint64_t>(v);
    for (int i = 0; i < 8; ++i) {
        out.push_back(static_cast<char>(bits & 0xFFu));
        bits >>= 8;
    }
}

double read_le(const char* p) {
    std::uint64_t bits = 0;
    for (int i = 7; i >= 0; --i) {
        bits = (bits << 8) | static_cast<unsigned char>(p[i]);
    }
    return std::bit_cast<double>(bits);
}

template <std::size_t Order>
std::string encode(std::string_view magic, const Tensor<Order>& t) {
    std::string out(magic);
    out += " 1";
    for (Index d : t.dims()) out += " " + std::to_string(d);
    out += '\n';
    out.reserve(out.size() + 8 * static_cast<std::size_t>(t.size()));
    for (double v : t.data()) append_le(out, v);
    return out;
}

template <std::size_t Order>
Tensor<Order> decode(std::string_view magic, std::string_view bytes) {
    const auto nl = bytes.find('\n');
    if (nl == std::string_view::npos || nl > 256) throw IoError("missing header line");
    std::istringstream header{std::string(bytes.substr(0, nl))};
    std::string got;
    int version = 0;
    header >> got >> version;
    if (got != magic) throw IoError("expected " + std::string(magic) + " header, found '" + got + "'");
    if (version != 1) throw IoError("unsupported " + std::string(magic) + " version " + std::to_string(version));
    typename Tensor<Order>::Dims dims{};
    for (auto& d : dims) {
        long long v = 0;
        if (!(header >> v) || v <= 0) throw IoError("bad dimension in " + std::string(magic) + " header");
        d = static_cast<Index>(v);
    }
    std::string extra;
    if (header >> extra) throw IoError("trailing tokens in " + std::string(magic) + " header");
    const Index count = Tensor<Order>::count(dims);
    const std::string_view body = bytes.substr(nl + 1);
    if (body.size() != 8 * static_cast<std::size_t>(count)) {
        throw IoError("body is " + std::to_string(body.size()) + " bytes, header implies " +
                      std::to_string(8 * count));
    }
    std::vector<double> data(static_cast<std::size_t>(count));
    for (std::size_t i = 0; i < data.size(); ++i) data[i] = read_le(body.data() + 8 * i);
    try {
        return Tensor<Order>(dims, std::move(data));
    } catch (const Error& e) {
        throw IoError(std::string("invalid tensor payload: ") + e.what());
    }
}

template <typename Fn>
auto with_path(const fs::path& path, Fn&& fn) {
    try {
        return fn();
    } catch (const IoError& e) {
        throw IoError(path.string() + ": " + e.what());
    }
}

} // namespace

std::string encode_cube(const Tensor3& t) { return encode(kCubeMagic, t); }
Tensor3 decode_cube(std::string_view bytes) { return decode<3>(kCubeMagic, bytes); }
std::string encode_em_tensor(const Tensor4& t) { return encode(kEmMagic, t); }
Tensor4 decode_em_tensor(std::string_view bytes) { return decode<4>(kEmMagic, bytes); }

void write_cube(const fs::path& path, const Tensor3& t) { write_file_atomic(path, encode_cube(t)); }
Tensor3 read_cube(const fs::path& path) {
    const auto bytes = read_file(path);
    return with_path(path, [&] { return decode_cube(bytes); });
}
void write_em_tensor(const fs::path& path, const Tensor4& t) {
    write_file_atomic(path, encode_em_tensor(t));
}
Tensor4 read_em_tensor(const fs::path& path) {
    const auto bytes = read_file(path);
    return with_path(path, [&] { return decode_em_tensor(bytes); });
}

std::string file_magic(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(path.string() + ": cannot open for reading");
    std::string magic;
    in >> magic;
    return magic;
}

Eigen::MatrixXd parse_em_csv(std::string_view text) {
    std::vector<std::vector<double>> rows;
    std::size_t pos = 0;
    int line_no = 0;
    while (pos < text.size()) {
        auto end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.find_first_not_of(" \t") == std::string_view::npos) continue;
        std::vector<double> row;
        std::size_t cpos = 0;
        while (true) {
            auto comma = line.find(',', cpos);
            std::string_view cell = line.substr(cpos, comma == std::string_view::npos ? std::string_view::npos : comma - cpos);
            const auto b = cell.find_first_not_of(" \t");
            const auto e = cell.find_last_not_of(" \t");
            if (b == std::string_view::npos) throw IoError("empty cell on line " + std::to_string(line_no));
            cell = cell.substr(b, e - b + 1);
            double v = 0.0;
            const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
            if (ec != std::errc{} || ptr != cell.data() + cell.size()) {
                throw IoError("not a number '" + std::string(cell) + "' on line " + std::to_string(line_no));
            }
            if (!std::isfinite(v) || v < 0.0) {
                throw IoError("endmember values must be finite and >= 0 (line " + std::to_string(line_no) + ")");
            }
            row.push_back(v);
            if (comma == std::string_view::npos) break;
            cpos = comma + 1;
        }
        if (!rows.empty() && row.size() != rows.front().size()) {
            throw IoError("ragged CSV: line " + std::to_string(line_no) + " has " +
                          std::to_string(row.size()) + " columns");
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw IoError("empty endmember CSV");
    Eigen::MatrixXd m(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
    for (Index i = 0; i < m.rows(); ++i) {
        for (Index j = 0; j < m.cols(); ++j) m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    }
    return m;
}

Eigen::MatrixXd read_em_csv(const fs::path& path) {
    const auto text = read_file(path);
    return with_path(path, [&] { return parse_em_csv(text); });
}

void write_em_csv(const fs::path& path, const Eigen::MatrixXd& m) {
    std::string out;
    for (Index i = 0; i < m.rows(); ++i) {
        for (Index j = 0; j < m.cols(); ++j) {
            if (j > 0) out += ',';
            out += format_exact(m(i, j));
        }
        out += '\n';
    }
    write_file_atomic(path, out);
}

void write_pgm(const fs::path& path, const Eigen::MatrixXd& map) {
    std::string out = "P5\n" + std::to_string(map.cols()) + " " + std::to_string(map.rows()) + "\n255\n";
    for (Index i = 0; i < map.rows(); ++i) {
        for (Index j = 0; j < map.cols(); ++j) {
            const double x = std::isnan(map(i, j)) ? 0.0 : map(i, j);
            const double v = std::clamp(std::round(255.0 * x), 0.0, 255.0);
            out.push_back(static_cast<char>(static_cast<unsigned char>(v)));
        }
    }
    write_file_atomic(path, out);
}

Eigen::Matrix<unsigned char, Eigen::Dynamic, Eigen::Dynamic> read_pgm(const fs::path& path) {
    const auto bytes = read_file(path);
    std::istringstream in(bytes);
    std::string magic;
    int w = 0, h = 0, maxval = 0;
    in >> magic >> w >> h >> maxval;
    if (magic != "P5" || w <= 0 || h <= 0 || maxval != 255) throw IoError(path.string() + ": not an 8-bit P5 graymap");
    in.get();
    const auto offset = static_cast<std::size_t>(in.tellg());
    if (bytes.size() != offset + static_cast<std::size_t>(w) * static_cast<std::size_t>(h)) {
        throw IoError(path.string() + ": truncated graymap");
    }
    Eigen::Matrix<unsigned char, Eigen::Dynamic, Eigen::Dynamic> img(h, w);
    for (int i = 0; i < h; ++i) {
        for (int j = 0; j < w; ++j) {
            img(i, j) = static_cast<unsigned char>(bytes[offset + static_cast<std::size_t>(i * w + j)]);
        }
    }
    return img;
}

void write_manifest(const fs::path& path, const Manifest& entries) {
    std::string out;
    for (const auto& [k, v] : entries) out += k + "=" + v + "\n";
    write_file_atomic(path, out);
}

std::map<std::string, std::string> read_manifest(const fs::path& path) {
    std::istringstream in(read_file(path));
    std::map<std::string, std::string> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line.front() == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        out[line.substr(0, eq)] = line.substr(eq + 1);
    }
    return out;
}

void write_file_atomic(const fs::path& path, std::string_view bytes) {
    fs::path tmp = path;
    tmp += ".tmp." + std::to_string(::getpid());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError(path.string() + ": cannot open for writing");
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        out.flush();
        if (!out) {
            std::error_code ec;
            fs::remove(tmp, ec);
            throw IoError(path.string() + ": write failed");
        }
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw IoError(path.string() + ": rename failed: " + ec.message());
    }
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(path.string() + ": cannot open for reading");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string format_sig(double v, int digits) {
    if (!std::isfinite(v)) return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
    std::ostringstream os;
    os.precision(digits);
    os << v;
    return os.str();
}

std::string format_exact(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    if (ec != std::errc{}) return format_sig(v, 17);
    return std::string(buf, ptr);
}

} // namespace ultrav::io

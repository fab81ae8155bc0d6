#pragma once

// File formats.
//
//   cube (.hsi)      "HSICUBE 1 <n1> <n2> <n3>\n" + n1*n2*n3 little-endian float64,
//                    row-major, third index fastest.
//   endmembers (.emt) "EMTENS 1 <n1> <n2> <L> <R>\n" + float64 body, fourth index fastest.
//   library (.csv)   L rows, R columns, no header, nonnegative decimals.
//   maps (.pgm)      binary 8-bit graymap (P5), value = round(255 * a) clamped.
//   manifest (.txt)  key=value lines.
//
// Every writer goes through a temporary file and a rename.

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "ultrav/tensor.hpp"

namespace ultrav::io {

namespace fs = std::filesystem;

[[nodiscard]] std::string encode_cube(const Tensor3& t);
[[nodiscard]] Tensor3 decode_cube(std::string_view bytes);
[[nodiscard]] std::string encode_em_tensor(const Tensor4& t);
[[nodiscard]] Tensor4 decode_em_tensor(std::string_view bytes);

void write_cube(const fs::path& path, const Tensor3& t);
[[nodiscard]] Tensor3 read_cube(const fs::path& path);
void write_em_tensor(const fs::path& path, const Tensor4& t);
[[nodiscard]] Tensor4 read_em_tensor(const fs::path& path);

/// First whitespace-delimited token of the file ("HSICUBE", "EMTENS", ...).
[[nodiscard]] std::string file_magic(const fs::path& path);

[[nodiscard]] Eigen::MatrixXd parse_em_csv(std::string_view text);
[[nodiscard]] Eigen::MatrixXd read_em_csv(const fs::path& path);
/// Shortest round-trip decimal representation.
void write_em_csv(const fs::path& path, const Eigen::MatrixXd& m);

/// 8-bit P5 graymap of a [0,1] map (rows x cols = height x width).
void write_pgm(const fs::path& path, const Eigen::MatrixXd& map);
[[nodiscard]] Eigen::Matrix<unsigned char, Eigen::Dynamic, Eigen::Dynamic> read_pgm(const fs::path& path);

using Manifest = std::vector<std::pair<std::string, std::string>>;
void write_manifest(const fs::path& path, const Manifest& entries);
[[nodiscard]] std::map<std::string, std::string> read_manifest(const fs::path& path);

/// Atomically replaces `path` with `bytes`.
void write_file_atomic(const fs::path& path, std::string_view bytes);
[[nodiscard]] std::string read_file(const fs::path& path);

/// Formats `v` with `digits` significant digits.
[[nodiscard]] std::string format_sig(double v, int digits = 4);
/// Shortest decimal that parses back to exactly `v`.
[[nodiscard]] std::string format_exact(double v);

} // namespace ultrav::io

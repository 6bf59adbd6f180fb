#pragma once

#include "revmarkov/markov_core.hpp"

#include <filesystem>
#include <iosfwd>
#include <string_view>

namespace revmarkov {

enum class MatrixFormat { MatrixMarket, Csv };

std::string_view to_string(MatrixFormat f);
/// Accepts mm and csv. Throws InvalidArgument.
MatrixFormat parse_matrix_format(std::string_view s);

/// Matrix Market when the first byte is '%', CSV otherwise.
MatrixFormat detect_format(std::istream& in);

/// Dense real matrix in Matrix Market array format (column major) or
/// headerless CSV. Throws Io on malformed input.
Matrix read_matrix(std::istream& in, MatrixFormat* detected = nullptr);
Matrix read_matrix(const std::filesystem::path& path, MatrixFormat* detected = nullptr);

/// Values are written with 17 significant digits.
void write_matrix(std::ostream& out, const Matrix& m, MatrixFormat format);
void write_matrix(const std::filesystem::path& path, const Matrix& m, MatrixFormat format);

/// A vector stored as an n x 1 or 1 x n matrix in either format.
Vector read_vector(const std::filesystem::path& path);

}  // namespace revmarkov

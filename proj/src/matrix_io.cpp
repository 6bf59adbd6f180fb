#include "revmarkov/matrix_io.hpp"

#include "revmarkov/error.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace revmarkov {

namespace {

double parse_double(std::string_view tok, std::size_t line) {
  while (!tok.empty() && (tok.front() == ' ' || tok.front() == '\t')) tok.remove_prefix(1);
  while (!tok.empty() && (tok.back() == ' ' || tok.back() == '\t' || tok.back() == '\r')) tok.remove_suffix(1);
  if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size())
    throw Error(ErrorCode::Io, "line " + std::to_string(line) + ": cannot parse '" + std::string(tok) + "'");
  return v;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

Matrix read_matrix_market(std::istream& in) {
  std::string line;
  std::size_t lineno = 1;
  if (!std::getline(in, line)) throw Error(ErrorCode::Io, "empty Matrix Market file");
  std::istringstream header(line);
  std::string banner, object, layout, field, symmetry;
  header >> banner >> object >> layout >> field >> symmetry;
  if (banner != "%%MatrixMarket" || object != "matrix")
    throw Error(ErrorCode::Io, "missing %%MatrixMarket matrix header");
  if (layout != "array" || (field != "real" && field != "double" && field != "integer") || symmetry != "general")
    throw Error(ErrorCode::Io, "only 'array real general' Matrix Market files are supported");

  Index rows = -1, cols = -1;
  std::vector<double> values;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '%') continue;
    std::istringstream ls(line);
    if (rows < 0) {
      if (!(ls >> rows >> cols) || rows <= 0 || cols <= 0)
        throw Error(ErrorCode::Io, "line " + std::to_string(lineno) + ": bad size line");
      values.reserve(static_cast<std::size_t>(rows * cols));
      continue;
    }
    std::string tok;
    while (ls >> tok) values.push_back(parse_double(tok, lineno));
  }
  if (rows < 0) throw Error(ErrorCode::Io, "Matrix Market file has no size line");
  if (static_cast<Index>(values.size()) != rows * cols)
    throw Error(ErrorCode::Io, "expected " + std::to_string(rows * cols) + " values, found " +
                                   std::to_string(values.size()));
  return Eigen::Map<Matrix>(values.data(), rows, cols);
}

Matrix read_csv(std::istream& in) {
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::vector<double> row;
    std::string_view rest(line);
    for (;;) {
      const auto comma = rest.find(',');
      row.push_back(parse_double(rest.substr(0, comma), lineno));
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw Error(ErrorCode::Io, "line " + std::to_string(lineno) + ": ragged CSV row");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw Error(ErrorCode::Io, "empty CSV file");
  Matrix m(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j) m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  return m;
}

}  // namespace

std::string_view to_string(MatrixFormat f) { return f == MatrixFormat::MatrixMarket ? "mm" : "csv"; }

MatrixFormat parse_matrix_format(std::string_view s) {
  if (s == "mm") return MatrixFormat::MatrixMarket;
  if (s == "csv") return MatrixFormat::Csv;
  throw Error(ErrorCode::InvalidArgument, "unknown matrix format '" + std::string(s) + "'");
}

MatrixFormat detect_format(std::istream& in) {
  return in.peek() == '%' ? MatrixFormat::MatrixMarket : MatrixFormat::Csv;
}

Matrix read_matrix(std::istream& in, MatrixFormat* detected) {
  const MatrixFormat f = detect_format(in);
  if (detected != nullptr) *detected = f;
  return f == MatrixFormat::MatrixMarket ? read_matrix_market(in) : read_csv(in);
}

Matrix read_matrix(const std::filesystem::path& path, MatrixFormat* detected) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  return read_matrix(in, detected);
}

void write_matrix(std::ostream& out, const Matrix& m, MatrixFormat format) {
  if (format == MatrixFormat::MatrixMarket) {
    out << "%%MatrixMarket matrix array real general\n" << m.rows() << ' ' << m.cols() << '\n';
    for (Index j = 0; j < m.cols(); ++j)
      for (Index i = 0; i < m.rows(); ++i) out << format_double(m(i, j)) << '\n';
  } else {
    for (Index i = 0; i < m.rows(); ++i) {
      for (Index j = 0; j < m.cols(); ++j) out << (j ? "," : "") << format_double(m(i, j));
      out << '\n';
    }
  }
  if (!out) throw Error(ErrorCode::Io, "write failed");
}

void write_matrix(const std::filesystem::path& path, const Matrix& m, MatrixFormat format) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot open " + path.string() + " for writing");
  write_matrix(out, m, format);
}

Vector read_vector(const std::filesystem::path& path) {
  const Matrix m = read_matrix(path);
  if (m.cols() == 1) return m.col(0);
  if (m.rows() == 1) return m.row(0).transpose();
  throw Error(ErrorCode::Io, path.string() + " does not hold a vector");
}

}  // namespace revmarkov

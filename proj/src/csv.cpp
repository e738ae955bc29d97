#include <adalasso/csv.hpp>

#include <charconv>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <vector>

namespace adalasso::csv {

namespace {

std::string_view trim(std::string_view s)
{
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

double parse_double(std::string_view field, std::size_t line, std::size_t col)
{
    field = trim(field);
    if (!field.empty() && field.front() == '+') field.remove_prefix(1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (ec != std::errc() || ptr != field.data() + field.size() || field.empty()) {
        std::ostringstream os;
        os << "line " << line << ", field " << col << ": cannot parse '" << field << "' as a number";
        throw ParseError(os.str());
    }
    return v;
}

} // namespace

Matrix read_matrix(std::istream& in, const ReadOptions& options)
{
    std::vector<double> values;
    std::size_t cols = 0;
    std::size_t rows = 0;
    std::string line;
    std::size_t lineno = 0;
    if (options.header && std::getline(in, line)) ++lineno;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string_view body = trim(line);
        if (body.empty()) continue;
        std::size_t count = 0;
        std::size_t start = 0;
        while (true) {
            const std::size_t comma = body.find(',', start);
            const std::string_view field =
                body.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
            values.push_back(parse_double(field, lineno, count + 1));
            ++count;
            if (comma == std::string_view::npos) break;
            start = comma + 1;
        }
        if (rows == 0) cols = count;
        else if (count != cols) {
            std::ostringstream os;
            os << "line " << lineno << ": expected " << cols << " fields, found " << count;
            throw ParseError(os.str());
        }
        ++rows;
    }
    Matrix m(static_cast<Index>(rows), static_cast<Index>(cols));
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j)
            m(static_cast<Index>(i), static_cast<Index>(j)) = values[i * cols + j];
    return m;
}

Matrix read_matrix_file(const std::string& path, const ReadOptions& options)
{
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path + "' for reading");
    return read_matrix(in, options);
}

Vector read_vector_file(const std::string& path, const ReadOptions& options)
{
    const Matrix m = read_matrix_file(path, options);
    if (m.cols() == 1) return m.col(0);
    if (m.rows() == 1) return m.row(0).transpose();
    if (m.size() == 0) return Vector();
    throw ParseError("'" + path + "' is not a single row or column");
}

void write_matrix(std::ostream& out, const Matrix& m)
{
    out << std::setprecision(17);
    for (Index i = 0; i < m.rows(); ++i) {
        for (Index j = 0; j < m.cols(); ++j) {
            if (j) out << ',';
            out << m(i, j);
        }
        out << '\n';
    }
}

void write_matrix_file(const std::string& path, const Matrix& m)
{
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    write_matrix(out, m);
    if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

void write_vector_file(const std::string& path, const Vector& v)
{
    write_matrix_file(path, Matrix(v));
}

} // namespace adalasso::csv

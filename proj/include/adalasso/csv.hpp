#pragma once
// Plain numeric CSV: one row per observation, comma separated, no quoting.

#include <adalasso/core.hpp>

#include <iosfwd>
#include <string>

namespace adalasso::csv {

class ParseError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

struct ReadOptions
{
    /// Skip exactly one leading line.
    bool header = false;
};

Matrix read_matrix(std::istream& in, const ReadOptions& options = {});
Matrix read_matrix_file(const std::string& path, const ReadOptions& options = {});

/// Accepts either a single column or a single row.
Vector read_vector_file(const std::string& path, const ReadOptions& options = {});

/// Values are written with 17 significant digits so they parse back bit-exact.
void write_matrix(std::ostream& out, const Matrix& m);
void write_matrix_file(const std::string& path, const Matrix& m);
void write_vector_file(const std::string& path, const Vector& v);

} // namespace adalasso::csv

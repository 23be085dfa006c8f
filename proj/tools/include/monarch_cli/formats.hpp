#pragma once

// Text formats: "dmat <rows> <cols> <real|complex>" and
// "monarch <n> <b> <real|complex>", values as 17-significant-digit decimals.

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <variant>

#include "monarch/monarch.hpp"

namespace monarch::cli {

/// Malformed or unreadable input; maps to exit code 3.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using AnyDense = std::variant<DenseMatrix<double>, DenseMatrix<cplx>>;
using AnyMonarch = std::variant<MonarchMatrix<double>, MonarchMatrix<cplx>>;
using AnyFile = std::variant<AnyDense, AnyMonarch>;

/// %.17g; reads back to the same bits.
std::string format_number(double v);

template <Scalar T>
void write_dmat(std::ostream& os, const DenseMatrix<T>& a);
template <Scalar T>
void write_mon(std::ostream& os, const MonarchMatrix<T>& m);

AnyDense read_dmat(std::istream& is);
AnyMonarch read_mon(std::istream& is);
/// Dispatches on the header keyword.
AnyFile read_any(std::istream& is);

AnyFile load_file(const std::filesystem::path& path);
AnyDense load_dense(const std::filesystem::path& path);

template <Scalar T>
void save_dmat(const std::filesystem::path& path, const DenseMatrix<T>& a);
template <Scalar T>
void save_mon(const std::filesystem::path& path, const MonarchMatrix<T>& m);

/// Dense form of either file kind.
AnyDense to_dense(const AnyFile& f);

}  // namespace monarch::cli

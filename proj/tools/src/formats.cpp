#include "monarch_cli/formats.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace monarch::cli {

namespace {

template <Scalar T>
constexpr const char* field_name() {
  return is_complex_v<T> ? "complex" : "real";
}

void write_value(std::ostream& os, double v) { os << format_number(v); }
void write_value(std::ostream& os, cplx v) { os << format_number(v.real()) << ' ' << format_number(v.imag()); }

template <Scalar T>
void write_block(std::ostream& os, const DenseMatrix<T>& a) {
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) {
      if (j > 0) os << ' ';
      write_value(os, a(i, j));
    }
    os << '\n';
  }
}

class Tokens {
 public:
  explicit Tokens(std::istream& is) : is_(is) {}

  std::string word(const char* what) {
    std::string s;
    if (!(is_ >> s)) throw FormatError(std::string("unexpected end of input reading ") + what);
    return s;
  }

  std::size_t size(const char* what) {
    const std::string s = word(what);
    std::size_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) throw FormatError(std::string("bad ") + what + ": " + s);
    return v;
  }

  double number() {
    const std::string s = word("value");
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) throw FormatError("bad numeric value: " + s);
    return v;
  }

  template <Scalar T>
  T value() {
    if constexpr (is_complex_v<T>) {
      const double re = number();
      const double im = number();
      return {re, im};
    } else {
      return number();
    }
  }

  void expect_end() {
    std::string extra;
    if (is_ >> extra) throw FormatError("trailing data after last value: " + extra);
  }

 private:
  std::istream& is_;
};

bool parse_field(const std::string& s) {
  if (s == "real") return false;
  if (s == "complex") return true;
  throw FormatError("field must be real or complex, got " + s);
}

template <Scalar T>
DenseMatrix<T> read_values(Tokens& tk, std::size_t rows, std::size_t cols) {
  DenseMatrix<T> a(rows, cols);
  for (T& v : a.data()) v = tk.value<T>();
  return a;
}

AnyDense read_dmat_body(Tokens& tk) {
  const std::size_t rows = tk.size("row count");
  const std::size_t cols = tk.size("column count");
  const bool complex = parse_field(tk.word("field"));
  AnyDense out = complex ? AnyDense(read_values<cplx>(tk, rows, cols)) : AnyDense(read_values<double>(tk, rows, cols));
  tk.expect_end();
  return out;
}

template <Scalar T>
MonarchMatrix<T> read_mon_values(Tokens& tk, std::size_t n, std::size_t b) {
  const std::size_t q = n / b;
  std::vector<DenseMatrix<T>> l, r;
  for (std::size_t j = 0; j < b; ++j) l.push_back(read_values<T>(tk, q, q));
  for (std::size_t k = 0; k < q; ++k) r.push_back(read_values<T>(tk, b, b));
  return MonarchMatrix<T>(BlockDiagMatrix<T>(std::move(l)), BlockDiagMatrix<T>(std::move(r)));
}

AnyMonarch read_mon_body(Tokens& tk) {
  const std::size_t n = tk.size("n");
  const std::size_t b = tk.size("b");
  if (b <= 1 || b >= n || n % b != 0) {
    throw FormatError("monarch header needs 1 < b < n with b | n, got n=" + std::to_string(n) +
                      " b=" + std::to_string(b));
  }
  const bool complex = parse_field(tk.word("field"));
  AnyMonarch out = complex ? AnyMonarch(read_mon_values<cplx>(tk, n, b)) : AnyMonarch(read_mon_values<double>(tk, n, b));
  tk.expect_end();
  return out;
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  return in;
}

template <typename Fn>
void write_file(const std::filesystem::path& path, Fn&& fn) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write " + path.string());
  fn(out);
  out.flush();
  if (!out) throw FormatError("write failed for " + path.string());
}

}  // namespace

std::string format_number(double v) {
  std::array<char, 32> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v, std::chars_format::general, 17);
  (void)ec;
  return std::string(buf.data(), ptr);
}

template <Scalar T>
void write_dmat(std::ostream& os, const DenseMatrix<T>& a) {
  os << "dmat " << a.rows() << ' ' << a.cols() << ' ' << field_name<T>() << '\n';
  write_block(os, a);
}

template <Scalar T>
void write_mon(std::ostream& os, const MonarchMatrix<T>& m) {
  os << "monarch " << m.n() << ' ' << m.b() << ' ' << field_name<T>() << '\n';
  for (const auto& blk : m.ltilde().blocks()) write_block(os, blk);
  for (const auto& blk : m.r().blocks()) write_block(os, blk);
}

AnyDense read_dmat(std::istream& is) {
  Tokens tk(is);
  const std::string magic = tk.word("header");
  if (magic != "dmat") throw FormatError("expected dmat header, got " + magic);
  return read_dmat_body(tk);
}

AnyMonarch read_mon(std::istream& is) {
  Tokens tk(is);
  const std::string magic = tk.word("header");
  if (magic != "monarch") throw FormatError("expected monarch header, got " + magic);
  return read_mon_body(tk);
}

AnyFile read_any(std::istream& is) {
  Tokens tk(is);
  const std::string magic = tk.word("header");
  if (magic == "dmat") return read_dmat_body(tk);
  if (magic == "monarch") return read_mon_body(tk);
  throw FormatError("unknown file kind: " + magic);
}

AnyFile load_file(const std::filesystem::path& path) {
  std::ifstream in = open_input(path);
  return read_any(in);
}

AnyDense load_dense(const std::filesystem::path& path) { return to_dense(load_file(path)); }

template <Scalar T>
void save_dmat(const std::filesystem::path& path, const DenseMatrix<T>& a) {
  write_file(path, [&](std::ostream& os) { write_dmat(os, a); });
}

template <Scalar T>
void save_mon(const std::filesystem::path& path, const MonarchMatrix<T>& m) {
  write_file(path, [&](std::ostream& os) { write_mon(os, m); });
}

AnyDense to_dense(const AnyFile& f) {
  if (const auto* d = std::get_if<AnyDense>(&f)) return *d;
  return std::visit([](const auto& m) -> AnyDense { return monarch_to_dense(m); }, std::get<AnyMonarch>(f));
}

template void write_dmat(std::ostream&, const DenseMatrix<double>&);
template void write_dmat(std::ostream&, const DenseMatrix<cplx>&);
template void write_mon(std::ostream&, const MonarchMatrix<double>&);
template void write_mon(std::ostream&, const MonarchMatrix<cplx>&);
template void save_dmat(const std::filesystem::path&, const DenseMatrix<double>&);
template void save_dmat(const std::filesystem::path&, const DenseMatrix<cplx>&);
template void save_mon(const std::filesystem::path&, const MonarchMatrix<double>&);
template void save_mon(const std::filesystem::path&, const MonarchMatrix<cplx>&);

}  // namespace monarch::cli

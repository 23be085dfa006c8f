#include "monarch_cli/commands.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include "monarch/butterfly.hpp"
#include "monarch/factorization.hpp"
#include "monarch/parallel.hpp"
#include "monarch/projection.hpp"
#include "monarch/random.hpp"
#include "monarch_cli/formats.hpp"

namespace monarch::cli {

namespace {

/// Bad flag combination detected after parsing.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

constexpr double kSliceRankTol = 1e-9;

constexpr const char* kGaugeNote =
    "note: factors are unique only up to per-block rescaling and permutation; compare dense products, "
    "not factor files";

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::SingularBlock:
    case ErrorCode::SimdiagFailed:
    case ErrorCode::Defective:
    case ErrorCode::NoConvergence:
    case ErrorCode::Singular:
      return kExitAssumption;
    case ErrorCode::NonFinite:
      return kExitIo;
    default:
      return kExitUsage;
  }
}

struct Globals {
  int threads = 0;
  std::uint64_t seed = 1;
};

std::string num(double v) { return format_number(v); }

template <Scalar T>
MonarchMatrix<cplx> promote(const MonarchMatrix<T>& m) {
  if constexpr (is_complex_v<T>) {
    return m;
  } else {
    std::vector<DenseMatrix<cplx>> l, r;
    for (const auto& blk : m.ltilde().blocks()) l.push_back(to_complex(blk));
    for (const auto& blk : m.r().blocks()) r.push_back(to_complex(blk));
    return MonarchMatrix<cplx>(BlockDiagMatrix<cplx>(std::move(l)), BlockDiagMatrix<cplx>(std::move(r)));
  }
}

template <Scalar T>
DenseMatrix<cplx> promote(const DenseMatrix<T>& a) {
  if constexpr (is_complex_v<T>) {
    return a;
  } else {
    return to_complex(a);
  }
}

std::size_t resolve_b(std::optional<std::size_t> b, std::size_t n) {
  if (b) {
    require_monarch_blocking(n, *b);
    return *b;
  }
  return default_block_size(n);
}

void require_square(std::size_t rows, std::size_t cols) {
  if (rows != cols) {
    throw Error(ErrorCode::DimensionMismatch,
                "input must be square, got " + std::to_string(rows) + "x" + std::to_string(cols));
  }
}

// gen ---------------------------------------------------------------------

struct GenArgs {
  std::string kind;
  std::size_t n = 0;
  std::optional<std::size_t> b;
  std::string out;
  bool complex = false;
  bool constrained = false;
};

template <Scalar T>
void gen_typed(const GenArgs& a, std::uint64_t seed) {
  if (a.kind == "monarch") {
    const std::size_t b = resolve_b(a.b, a.n);
    const auto c = a.constrained ? MonarchConstraint::Assumption1 : MonarchConstraint::None;
    save_mon(a.out, random_monarch<T>(a.n, b, seed, c));
  } else if (a.kind == "mmstar") {
    save_dmat(a.out, product_to_dense(random_mm_star<T>(a.n, resolve_b(a.b, a.n), seed)));
  } else if (a.kind == "butterfly") {
    save_dmat(a.out, butterfly_to_dense(random_butterfly<T>(a.n, seed)));
  } else {
    Rng rng(seed);
    save_dmat(a.out, rng.matrix<T>(a.n, a.n));
  }
}

int cmd_gen(const GenArgs& a, const Globals& g, std::ostream& out) {
  const bool pow2_kind = a.kind == "butterfly" || a.kind == "dft" || a.kind == "hadamard";
  if (a.n < 2) throw UsageError("--n must be at least 2");
  if (pow2_kind && !is_power_of_two(a.n)) {
    throw UsageError("--kind " + a.kind + " needs --n to be a power of 2, got " + std::to_string(a.n));
  }
  if (a.kind == "dft") {
    const DftButterfly d = dft_butterfly(a.n);
    save_dmat(a.out, matmul(butterfly_to_dense(d.butterfly), d.bit_reversal.to_dense<cplx>()));
  } else if (a.kind == "hadamard") {
    save_dmat(a.out, butterfly_to_dense(hadamard_butterfly(a.n)));
  } else if (a.complex) {
    gen_typed<cplx>(a, g.seed);
  } else {
    gen_typed<double>(a, g.seed);
  }
  out << "wrote " << a.out << '\n';
  return kExitOk;
}

// project -----------------------------------------------------------------

struct ProjectArgs {
  std::string in;
  std::optional<std::size_t> b;
  std::string out;
  std::string report;
};

void write_projection_report(std::ostream& os, const ProjectionReport& r) {
  os << "block_size " << r.block_size << '\n'
     << "input_norm " << num(r.input_norm) << '\n'
     << "residual " << num(r.residual) << '\n'
     << "relative_residual " << num(r.relative_residual()) << '\n'
     << "max_slice_residual " << num(r.max_slice_residual()) << '\n'
     << kGaugeNote << '\n';
}

int cmd_project(const ProjectArgs& a, const Globals& g, std::ostream& out) {
  const AnyDense input = load_dense(a.in);
  return std::visit(
      [&](const auto& m) {
        require_square(m.rows(), m.cols());
        const std::size_t b = resolve_b(a.b, m.rows());
        const auto res = project(m, b, nullptr, resolve_threads(g.threads));
        save_mon(a.out, res.monarch);
        if (a.report.empty()) {
          write_projection_report(out, res.report);
        } else {
          std::ofstream rep(a.report);
          if (!rep) throw FormatError("cannot write " + a.report);
          write_projection_report(rep, res.report);
          out << "wrote " << a.out << " and " << a.report << '\n';
        }
        return static_cast<int>(kExitOk);
      },
      input);
}

// factorize ---------------------------------------------------------------

struct FactorizeArgs {
  std::string in;
  std::optional<std::size_t> b;
  std::string prefix;
};

int cmd_factorize(const FactorizeArgs& a, const Globals& g, std::ostream& out) {
  const AnyDense input = load_dense(a.in);
  return std::visit(
      [&](const auto& m) {
        require_square(m.rows(), m.cols());
        const std::size_t n = m.rows();
        const std::size_t b = resolve_b(a.b, n);
        const MMStarFactorization f = factorize_mm_star(m, b, resolve_threads(g.threads), nullptr, g.seed);
        const BlockPermutation pinv = BlockPermutation(b, n).inverse();
        save_dmat(a.prefix + ".l1.dmat", conjugate_by(pinv, f.l1.to_dense()));
        save_dmat(a.prefix + ".r.dmat", conjugate_by(pinv, f.r.to_dense()));
        save_dmat(a.prefix + ".l2.dmat", conjugate_by(pinv, f.l2.to_dense()));
        const DenseMatrix<cplx> rec = reconstruct(f);
        const DenseMatrix<cplx> mc = promote(m);
        const double nrm = frobenius_norm(mc);
        const double err = frobenius_norm(subtract(rec, mc)) / (nrm > 0.0 ? nrm : 1.0);

        std::ostringstream rep;
        rep << "n " << n << '\n'
            << "b " << b << '\n'
            << "relative_reconstruction_error " << num(err) << '\n'
            << "max_offdiag_ratio " << num(f.max_offdiag_ratio) << '\n'
            << "simdiag_residual " << num(f.simdiag_residual) << '\n'
            << "simdiag_path " << (f.fast_path ? "random-combination" : "staged") << '\n'
            << "factors " << a.prefix << ".l1.dmat " << a.prefix << ".r.dmat " << a.prefix
            << ".l2.dmat (input ~= L1 * R * L2)\n"
            << kGaugeNote << '\n';
        std::ofstream file(a.prefix + ".report.txt");
        if (!file) throw FormatError("cannot write " + a.prefix + ".report.txt");
        file << rep.str();
        out << rep.str();
        return static_cast<int>(kExitOk);
      },
      input);
}

// matvec ------------------------------------------------------------------

struct MatvecArgs {
  std::string matrix;
  std::string x;
  std::string out;
};

std::vector<cplx> column_of(const AnyDense& d) {
  return std::visit(
      [](const auto& a) {
        if (a.cols() != 1 && a.rows() != 1) throw Error(ErrorCode::DimensionMismatch, "--x must be a vector dmat");
        const DenseMatrix<cplx> c = promote(a);
        return std::vector<cplx>(c.data().begin(), c.data().end());
      },
      d);
}

bool is_complex_file(const AnyFile& f) {
  if (const auto* d = std::get_if<AnyDense>(&f)) return d->index() == 1;
  return std::get<AnyMonarch>(f).index() == 1;
}

template <Scalar T>
std::vector<T> apply_any(const AnyFile& f, std::span<const T> x, int threads) {
  if (const auto* d = std::get_if<AnyDense>(&f)) {
    const DenseMatrix<T> a = std::get<DenseMatrix<T>>(*d);
    if (a.cols() != x.size()) throw Error(ErrorCode::DimensionMismatch, "vector length != matrix columns");
    return matvec(a, x);
  }
  const MonarchMatrix<T>& m = std::get<MonarchMatrix<T>>(std::get<AnyMonarch>(f));
  return monarch_matvec(m, x, nullptr, threads);
}

AnyFile promote_file(const AnyFile& f) {
  if (const auto* d = std::get_if<AnyDense>(&f)) return AnyDense(std::visit([](const auto& a) { return promote(a); }, *d));
  return AnyMonarch(std::visit([](const auto& m) { return promote(m); }, std::get<AnyMonarch>(f)));
}

std::size_t input_size(const AnyFile& f) {
  if (const auto* d = std::get_if<AnyDense>(&f)) return std::visit([](const auto& a) { return a.cols(); }, *d);
  return std::visit([](const auto& m) { return m.n(); }, std::get<AnyMonarch>(f));
}

int cmd_matvec(const MatvecArgs& a, const Globals& g, std::ostream& out) {
  const AnyFile mat = load_file(a.matrix);
  const int threads = resolve_threads(g.threads);
  std::optional<AnyDense> xfile;
  if (!a.x.empty()) xfile = load_dense(a.x);
  const bool complex = is_complex_file(mat) || (xfile && xfile->index() == 1);

  auto emit = [&](const auto& result) {
    using T = typename std::decay_t<decltype(result)>::value_type;
    DenseMatrix<T> col(result.size(), 1);
    for (std::size_t i = 0; i < result.size(); ++i) col(i, 0) = result[i];
    if (a.out.empty()) {
      write_dmat(out, col);
    } else {
      save_dmat(a.out, col);
    }
  };

  if (complex) {
    const AnyFile cm = promote_file(mat);
    std::vector<cplx> x;
    if (xfile) {
      x = column_of(*xfile);
    } else {
      Rng rng(g.seed);
      x = rng.vector<cplx>(input_size(mat));
    }
    emit(apply_any<cplx>(cm, std::span<const cplx>(x), threads));
  } else {
    std::vector<double> x;
    if (xfile) {
      const auto& d = std::get<DenseMatrix<double>>(*xfile);
      if (d.cols() != 1 && d.rows() != 1) throw Error(ErrorCode::DimensionMismatch, "--x must be a vector dmat");
      x.assign(d.data().begin(), d.data().end());
    } else {
      Rng rng(g.seed);
      x = rng.vector<double>(input_size(mat));
    }
    emit(apply_any<double>(mat, std::span<const double>(x), threads));
  }
  return kExitOk;
}

// bench -------------------------------------------------------------------

struct BenchArgs {
  std::vector<std::size_t> sizes;
  std::string policy = "sqrt";
  int reps = 5;
};

std::size_t policy_block(const std::string& policy, std::size_t n) {
  if (policy == "sqrt") {
    try {
      return default_block_size(n);
    } catch (const Error&) {
      throw UsageError("sqrt policy needs perfect-square sizes, got " + std::to_string(n));
    }
  }
  const std::string prefix = "fixed:";
  if (policy.rfind(prefix, 0) == 0) {
    std::size_t b = 0;
    const std::string tail = policy.substr(prefix.size());
    auto [ptr, ec] = std::from_chars(tail.data(), tail.data() + tail.size(), b);
    if (ec != std::errc() || ptr != tail.data() + tail.size()) throw UsageError("bad --b-policy " + policy);
    if (b <= 1 || b >= n || n % b != 0) {
      throw UsageError("fixed block " + std::to_string(b) + " does not give a valid blocking of n=" + std::to_string(n));
    }
    return b;
  }
  throw UsageError("--b-policy must be sqrt or fixed:<b>, got " + policy);
}

template <typename Fn>
double median_ms(int reps, Fn&& fn) {
  std::vector<double> t;
  for (int r = 0; r < reps; ++r) {
    const auto start = std::chrono::steady_clock::now();
    fn();
    const auto stop = std::chrono::steady_clock::now();
    t.push_back(std::chrono::duration<double, std::milli>(stop - start).count());
  }
  std::sort(t.begin(), t.end());
  const std::size_t h = t.size() / 2;
  return t.size() % 2 == 1 ? t[h] : 0.5 * (t[h - 1] + t[h]);
}

int cmd_bench(const BenchArgs& a, const Globals& g, std::ostream& out) {
  if (a.sizes.empty()) throw UsageError("--sizes needs at least one value");
  if (a.reps < 1) throw UsageError("--reps must be >= 1");
  std::vector<std::size_t> blocks;
  for (std::size_t n : a.sizes) {
    if (n < 4) throw UsageError("sizes must be >= 4, got " + std::to_string(n));
    blocks.push_back(policy_block(a.policy, n));
  }
  out << "n b dense_flops monarch_flops flop_ratio dense_ms monarch_ms speedup\n";
  for (std::size_t s = 0; s < a.sizes.size(); ++s) {
    const std::size_t n = a.sizes[s];
    const std::size_t b = blocks[s];
    const MonarchMatrix<double> m = random_monarch<double>(n, b, g.seed);
    const DenseMatrix<double> dense = monarch_to_dense(m);
    Rng rng(g.seed + 1);
    const std::vector<double> x = rng.vector<double>(n);

    OpCounter counter;
    monarch_matvec(m, std::span<const double>(x), &counter);
    const std::uint64_t monarch_flops = counter.value();
    const std::uint64_t dense_flops = static_cast<std::uint64_t>(n) * n;

    double sink = 0.0;
    const double dense_ms = median_ms(a.reps, [&] { sink += matvec(dense, std::span<const double>(x))[0]; });
    const double monarch_ms = median_ms(a.reps, [&] { sink += monarch_matvec(m, std::span<const double>(x))[0]; });
    (void)sink;
    out << n << ' ' << b << ' ' << dense_flops << ' ' << monarch_flops << ' '
        << num(static_cast<double>(dense_flops) / static_cast<double>(monarch_flops)) << ' ' << num(dense_ms) << ' '
        << num(monarch_ms) << ' ' << num(monarch_ms > 0.0 ? dense_ms / monarch_ms : 0.0) << '\n';
  }
  return kExitOk;
}

// verify ------------------------------------------------------------------

struct VerifyArgs {
  std::string in;
  std::string cls;
  std::size_t b = 0;
  std::optional<std::size_t> b_col;
};

template <Scalar T>
int report_first_violation(const DenseMatrix<T>& a, std::ostream& out, auto&& in_support) {
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j)
      if (a(i, j) != T{} && !in_support(i, j)) {
        out << "violation at (" << i << ", " << j << ")\n";
        return kExitPredicateFalse;
      }
  out << "ok\n";
  return kExitOk;
}

template <Scalar T>
int verify_typed(const DenseMatrix<T>& a, const VerifyArgs& v, std::ostream& out) {
  const std::size_t br = v.b;
  const std::size_t bc = v.b_col.value_or(v.b);
  if (v.cls == "bd") {
    bd_membership(a, br, bc);  // validates the blocking
    return report_first_violation(a, out, [&](std::size_t i, std::size_t j) { return i / br == j / bc; });
  }
  if (v.cls == "db") {
    db_membership(a, br, bc);
    return report_first_violation(a, out, [&](std::size_t i, std::size_t j) {
      const std::size_t r = i % br;
      const std::size_t c = j % bc;
      return bc <= br ? c == r % bc : r == c % br;
    });
  }
  require_square(a.rows(), a.cols());
  require_monarch_blocking(a.rows(), v.b);
  const std::size_t q = a.rows() / v.b;
  for (std::size_t j = 0; j < v.b; ++j)
    for (std::size_t k = 0; k < q; ++k) {
      const auto s = svd(slice_view(a, v.b, j, k)).s;
      const double ratio = s.empty() || s[0] == 0.0 ? 0.0 : (s.size() > 1 ? s[1] / s[0] : 0.0);
      if (ratio > kSliceRankTol) {
        out << "violation at slice (" << j << ", " << k << "): sigma2/sigma1 = " << num(ratio) << '\n';
        return kExitPredicateFalse;
      }
    }
  out << "ok\n";
  return kExitOk;
}

int cmd_verify(const VerifyArgs& v, std::ostream& out) {
  if (v.b == 0 || (v.b_col && *v.b_col == 0)) throw UsageError("block sizes must be positive");
  const AnyDense a = load_dense(v.in);
  return std::visit([&](const auto& m) { return verify_typed(m, v, out); }, a);
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Monarch matrix toolkit", "monarch"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  auto* threads_opt = app.add_option("--threads", g.threads, "Worker threads, 0 = auto (env MONARCH_THREADS)")
                          ->check(CLI::NonNegativeNumber);
  app.add_option("--seed", g.seed, "Random seed");

  GenArgs gen;
  auto* gen_cmd = app.add_subcommand("gen", "Generate a matrix file");
  gen_cmd->add_option("--kind", gen.kind, "Matrix kind")
      ->required()
      ->check(CLI::IsMember({"monarch", "mmstar", "butterfly", "dft", "hadamard", "dense-random"}));
  gen_cmd->add_option("--n", gen.n, "Size")->required();
  gen_cmd->add_option("--b", gen.b, "Block size (default sqrt(n))");
  gen_cmd->add_option("--out", gen.out, "Output path")->required();
  gen_cmd->add_flag("--complex", gen.complex, "Complex entries");
  gen_cmd->add_flag("--assumption1", gen.constrained, "Constrain Monarch factors (kind monarch)");

  ProjectArgs proj;
  auto* proj_cmd = app.add_subcommand("project", "Project a dense matrix onto Monarch matrices");
  proj_cmd->add_option("--in", proj.in, "Input dmat or monarch file")->required();
  proj_cmd->add_option("--b", proj.b, "Block size (default sqrt(n))");
  proj_cmd->add_option("--out", proj.out, "Output monarch file")->required();
  proj_cmd->add_option("--report", proj.report, "Report path (default: standard output)");

  FactorizeArgs fac;
  auto* fac_cmd = app.add_subcommand("factorize", "Factor a matrix of the form M1 M2^*");
  fac_cmd->add_option("--in", fac.in, "Input dmat file")->required();
  fac_cmd->add_option("--b", fac.b, "Block size (default sqrt(n))");
  fac_cmd->add_option("--out-prefix", fac.prefix, "Prefix for factor and report files")->required();

  MatvecArgs mv;
  auto* mv_cmd = app.add_subcommand("matvec", "Multiply a matrix file by a vector");
  mv_cmd->add_option("--matrix", mv.matrix, "dmat or monarch file")->required();
  mv_cmd->add_option("--x", mv.x, "Vector as an n x 1 dmat (default: random from --seed)");
  mv_cmd->add_option("--out", mv.out, "Output dmat (default: standard output)");

  BenchArgs bench;
  auto* bench_cmd = app.add_subcommand("bench", "Compare dense and Monarch matvec");
  bench_cmd->add_option("--sizes", bench.sizes, "Comma-separated sizes")->required()->delimiter(',');
  bench_cmd->add_option("--b-policy", bench.policy, "sqrt or fixed:<b>");
  bench_cmd->add_option("--reps", bench.reps, "Repetitions per timing");

  VerifyArgs ver;
  auto* ver_cmd = app.add_subcommand("verify", "Check structural membership");
  ver_cmd->add_option("--in", ver.in, "Input dmat or monarch file")->required();
  ver_cmd->add_option("--class", ver.cls, "Predicate")->required()->check(CLI::IsMember({"bd", "db", "monarch-slices"}));
  ver_cmd->add_option("--b", ver.b, "Block size (rows for bd/db)")->required();
  ver_cmd->add_option("--b-col", ver.b_col, "Column block size for bd/db (default --b)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  if (threads_opt->count() == 0) {
    if (const char* env = std::getenv("MONARCH_THREADS"); env != nullptr && *env != '\0') {
      const std::string_view sv(env);
      auto [ptr, ec] = std::from_chars(sv.data(), sv.data() + sv.size(), g.threads);
      if (ec != std::errc() || ptr != sv.data() + sv.size() || g.threads < 0) {
        err << "error: MONARCH_THREADS must be a non-negative integer, got '" << sv << "'\n";
        return kExitUsage;
      }
    }
  }

  try {
    if (*gen_cmd) return cmd_gen(gen, g, out);
    if (*proj_cmd) return cmd_project(proj, g, out);
    if (*fac_cmd) return cmd_factorize(fac, g, out);
    if (*mv_cmd) return cmd_matvec(mv, g, out);
    if (*bench_cmd) return cmd_bench(bench, g, out);
    if (*ver_cmd) return cmd_verify(ver, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const FormatError& e) {
    err << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const Error& e) {
    const int code = exit_code_for(e.code());
    err << "error: " << e.what() << '\n';
    if (code == kExitAssumption) {
      err << "the input must factor as M1 M2^* with every block of the permuted matrix invertible "
             "(Assumption 1)\n";
    }
    return code;
  }
  return kExitUsage;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv{"monarch"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace monarch::cli

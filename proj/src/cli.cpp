#include <kacz/cli.hpp>

#include <kacz/errors.hpp>
#include <kacz/linsys.hpp>
#include <kacz/solver.hpp>
#include <kacz/spectral.hpp>

#include <CLI11.hpp>

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>

namespace kacz::cli {

namespace {

class UsageError : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

// Empty field for NaN so CSV readers see a missing value.
std::string num(double x) { return std::isnan(x) ? std::string() : format_number(x); }

std::uint64_t default_seed() {
  const char* env = std::getenv("KACZ_SEED");
  if (!env || !*env) return 1;
  std::uint64_t seed = 0;
  const std::string_view s(env);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), seed);
  if (ec != std::errc{} || ptr != s.data() + s.size())
    throw UsageError("KACZ_SEED is not an unsigned 64-bit integer: '" + std::string(s) + "'");
  return seed;
}

std::vector<Index> all_grades(Index N) {
  std::vector<Index> v;
  for (Index n = 1; n <= N; ++n) v.push_back(n);
  return v;
}

void check_grades(const std::vector<Index>& grades, Index N) {
  for (Index n : grades)
    if (n < 1 || n > N)
      throw UsageError("n = " + std::to_string(n) + " outside [1, " + std::to_string(N) + "]");
}

struct SystemSource {
  std::string matrix, rhs, solution;
  std::vector<Index> synthetic;  // {N} for transform, {M, N} for ensemble
  std::string decay = "gaussian";
  std::optional<std::uint64_t> system_seed;

  bool has_paths() const { return !matrix.empty(); }

  LinearSystem load(std::uint64_t fallback_seed, bool square_synthetic) const {
    if (has_paths() == !synthetic.empty())
      throw UsageError("give exactly one of --matrix or --synthetic");
    if (has_paths()) {
      std::optional<std::filesystem::path> b, x;
      if (!rhs.empty()) b = rhs;
      if (!solution.empty()) x = solution;
      if (!b && !x) {
        // A matrix alone: the spectral commands only need A, so pose A x = 0.
        Matrix A = read_matrix(matrix);
        const Index N = A.cols();
        return LinearSystem(std::move(A), std::nullopt, Vector(Vector::Zero(N)));
      }
      return load_system(matrix, b, x);
    }
    const Index M = synthetic.front();
    const Index N = square_synthetic ? M : synthetic.back();
    return synth_system(M, N, system_seed.value_or(fallback_seed), parse_decay(decay));
  }
};

void add_source(CLI::App* cmd, SystemSource& src, bool two_dims) {
  cmd->add_option("--matrix", src.matrix, "matrix file (CSV rows)");
  cmd->add_option("--rhs", src.rhs, "right-hand side file");
  cmd->add_option("--solution", src.solution, "known solution file");
  auto* syn = cmd->add_option("--synthetic", src.synthetic,
                              two_dims ? "generate an M x N system" : "generate an N x N system");
  syn->expected(two_dims ? 2 : 1);
  cmd->add_option("--decay", src.decay, "synthetic spectrum: gaussian, linear_sv, exponential_sv")
      ->capture_default_str();
  cmd->add_option("--system-seed", src.system_seed, "seed of the synthetic system (default: --seed)");
}

// Validated matrix for the commands that only look at A.
Matrix load_matrix(const std::string& path) {
  Matrix A = read_matrix(path);
  const Index N = A.cols();
  return LinearSystem(std::move(A), std::nullopt, Vector(Vector::Zero(N))).A();
}

void emit_spectrum(std::ostream& os, const Matrix& A, Index n_max) {
  if (n_max < 1 || n_max > A.cols())
    throw UsageError("--n-max must be in [1, " + std::to_string(A.cols()) + "]");
  const SpectralProfile p = build_profile(A, n_max);
  os << "n,vol_n,sigma_hat_sq_min,kappa_sq,lower_rate\n";
  for (Index n = 1; n <= n_max; ++n) {
    const auto k = static_cast<std::size_t>(n);
    os << n << ',' << num(p.vols[k]) << ',' << num(p.sigma_hat_sq_min[k]) << ',' << num(p.kappa_sq[k])
       << ',' << num(rate_bounds(p.kappa_sq[k], 1).lower_factor) << '\n';
  }
}

void emit_transform(std::ostream& os, const Matrix& A, const std::vector<Index>& grades) {
  check_grades(grades, A.cols());
  Index n_max = 0;
  for (Index n : grades) n_max = std::max(n_max, n);
  const SpectralDecomposition spec = singular_spectrum(A);
  const SymmetricTransform st = symmetric_transform(spec.sigma_sq, n_max);
  os << "n,j,sigma_sq,sigma_hat_sq,normalized\n";
  for (Index n : grades) {
    const Vector& hat = st.sigma_hat_sq[static_cast<std::size_t>(n)];
    const double vol_n = st.vols[static_cast<std::size_t>(n)];
    for (Index j = 0; j < hat.size(); ++j)
      os << n << ',' << j + 1 << ',' << num(spec.sigma_sq(j)) << ',' << num(hat(j)) << ','
         << num(hat(j) / vol_n) << '\n';
  }
}

void emit_volumes(std::ostream& os, const Matrix& A, Index n, bool brute) {
  if (n < 1 || n > A.cols()) throw UsageError("--n must be in [1, " + std::to_string(A.cols()) + "]");
  const double trace_vol = vol_sequence(gram(A), n).back();
  if (!brute) {
    os << "n,vol_n\n" << n << ',' << num(trace_vol) << '\n';
    return;
  }
  const double enumerated = brute_force_vol(A, n);
  const double denom = std::max(std::abs(trace_vol), std::abs(enumerated));
  const double rel = denom > 0.0 ? std::abs(trace_vol - enumerated) / denom : 0.0;
  os << "n,vol_n,vol_n_brute_force,rel_diff\n"
     << n << ',' << num(trace_vol) << ',' << num(enumerated) << ',' << num(rel) << '\n';
}

struct PursuitFlags {
  std::string sampler = "volume", mode = "undershoot", vmax = "exact", track;
  long max_iters = 1000;
  double tol = 1e-12;

  void add(CLI::App* cmd) {
    cmd->add_option("--sampler", sampler, "volume or uniform")->capture_default_str();
    cmd->add_option("--mode", mode, "uniform relaxation: undershoot or overshoot")->capture_default_str();
    cmd->add_option("--vmax", vmax, "uniform v_sq_max: exact or running")->capture_default_str();
  }

  void apply(PursuitConfig& cfg) const {
    cfg.sampler = parse_sampler(sampler);
    cfg.relaxation = parse_relaxation(mode);
    cfg.vmax_mode = parse_vmax_mode(vmax);
  }
};

void emit_solve(std::ostream& os, const LinearSystem& sys, PursuitConfig cfg) {
  const bool uniform = cfg.sampler == Sampler::uniform;
  const PursuitTrace t = run_pursuit(sys, cfg);
  os << "iter,error_sq,gain_ratio,mu\n";
  os << 0 << ',' << num(t.errors_sq[0]) << ",,\n";
  for (long k = 1; k <= t.iters_run; ++k) {
    const auto i = static_cast<std::size_t>(k);
    os << k << ',' << num(t.errors_sq[i]) << ',' << num(t.gain_ratios[i - 1]) << ','
       << (uniform ? num(t.mus[i - 1]) : std::string()) << '\n';
  }
  os << "# iters_run=" << t.iters_run << ",converged=" << (t.converged ? "true" : "false") << '\n';
}

void emit_ensemble(std::ostream& os, const LinearSystem& sys, const PursuitConfig& base,
                   const std::vector<Index>& grades, int members, bool align_vmin) {
  check_grades(grades, sys.cols());
  if (members < 1) throw UsageError("--members must be positive");
  if (!sys.x_star()) throw UsageError("ensembles need a known solution");
  os << "n,iter,mean_gain_ratio,mean_log_error,bound_lower_factor,bound_upper_factor\n";
  for (Index n : grades) {
    PursuitConfig cfg = base;
    cfg.n = n;
    if (align_vmin) {
      const SpectralProfile p = build_profile(sys.A(), n);
      cfg.x0 = *sys.x_star() + p.v_min[static_cast<std::size_t>(n)];
    }
    const EnsembleReport r = run_ensemble(sys, cfg, members);
    for (long k = 1; k <= r.iters; ++k) {
      const auto i = static_cast<std::size_t>(k);
      os << n << ',' << k << ',' << num(r.mean_gain_ratio[i]) << ',' << num(r.mean_log_error[i]) << ','
         << num(r.bound_lower_factor) << ',' << num(r.bound_upper_factor) << '\n';
    }
  }
}

void write_output(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty()) {
    out << text;
    return;
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) throw InputError("cannot write '" + path + "'");
  file << text;
  if (!file) throw InputError("write to '" + path + "' failed");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multi-row randomized Kaczmarz: spectra, volumes, pursuits and ensembles", "kacz"};
  app.require_subcommand(1);

  std::string out_path;
  std::optional<std::uint64_t> seed;
  app.add_option("--out", out_path, "write CSV here instead of stdout");
  app.add_option("--seed", seed, "master seed (default: $KACZ_SEED, else 1)");
  app.fallthrough();

  SystemSource src;
  Index n_max = 0, n = 1;
  std::vector<Index> grades;
  bool brute = false, align_vmin = false;
  int members = 15;
  PursuitFlags pf;

  auto* spectrum = app.add_subcommand("spectrum", "grade-n condition numbers for n = 1..n-max");
  spectrum->add_option("--matrix", src.matrix, "matrix file")->required();
  spectrum->add_option("--n-max", n_max, "largest grade (default N)");

  auto* transform = app.add_subcommand("transform", "transformed singular values per n");
  add_source(transform, src, false);
  transform->add_option("--n-list", grades, "grades to tabulate (default 1..N)")->delimiter(',');

  auto* volumes = app.add_subcommand("volumes", "vol_n by the trace formula");
  volumes->add_option("--matrix", src.matrix, "matrix file")->required();
  volumes->add_option("--n", n, "subset size")->required();
  volumes->add_flag("--brute-force", brute, "also enumerate all subsets");

  auto* solve = app.add_subcommand("solve", "run one pursuit and print its error trace");
  solve->add_option("--matrix", src.matrix, "matrix file")->required();
  solve->add_option("--rhs", src.rhs, "right-hand side file");
  solve->add_option("--solution", src.solution, "known solution file");
  solve->add_option("--n", n, "rows per step")->capture_default_str();
  pf.add(solve);
  solve->add_option("--max-iters", pf.max_iters, "iteration limit")->capture_default_str();
  solve->add_option("--tol", pf.tol, "stop when the error norm falls below this")->capture_default_str();
  solve->add_option("--track", pf.track, "error or residual (default: error when a solution is given)");

  auto* ensemble = app.add_subcommand("ensemble", "ensemble mean gain ratios with rate bounds");
  add_source(ensemble, src, true);
  ensemble->add_option("--n-list", grades, "grades (default 1)")->delimiter(',');
  ensemble->add_option("--members", members, "pursuits per grade")->capture_default_str();
  ensemble->add_option("--iters", pf.max_iters, "iterations per pursuit")->capture_default_str();
  pf.add(ensemble);
  ensemble->add_flag("--align-vmin", align_vmin, "start every member at x* + v_min");

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    std::ostringstream msg_out, msg_err;
    const int code = app.exit(e, msg_out, msg_err);
    out << msg_out.str();
    err << msg_err.str();
    return code == 0 ? kOk : kUsage;
  }

  try {
    const std::uint64_t master = seed ? *seed : default_seed();
    std::ostringstream csv;
    if (spectrum->parsed()) {
      const Matrix A = load_matrix(src.matrix);
      emit_spectrum(csv, A, n_max ? n_max : A.cols());
    } else if (transform->parsed()) {
      const LinearSystem sys = src.load(master, true);
      emit_transform(csv, sys.A(), grades.empty() ? all_grades(sys.cols()) : grades);
    } else if (volumes->parsed()) {
      emit_volumes(csv, load_matrix(src.matrix), n, brute);
    } else if (solve->parsed()) {
      if (src.rhs.empty() && src.solution.empty()) throw UsageError("solve needs --rhs or --solution");
      const LinearSystem sys = src.load(master, false);
      PursuitConfig cfg;
      cfg.n = n;
      pf.apply(cfg);
      cfg.master_seed = master;
      cfg.max_iters = pf.max_iters;
      cfg.stop_tol = pf.tol;
      if (pf.track.empty())
        cfg.track = sys.x_star() ? Track::error_to_solution : Track::residual;
      else if (pf.track == "error")
        cfg.track = Track::error_to_solution;
      else if (pf.track == "residual")
        cfg.track = Track::residual;
      else
        throw UsageError("--track must be error or residual");
      if (cfg.n < 1 || cfg.n > sys.cols())
        throw UsageError("--n must be in [1, " + std::to_string(sys.cols()) + "]");
      emit_solve(csv, sys, cfg);
    } else if (ensemble->parsed()) {
      if (src.has_paths() && src.solution.empty()) throw UsageError("ensemble needs --solution");
      const LinearSystem sys = src.load(master, false);
      PursuitConfig cfg;
      pf.apply(cfg);
      cfg.master_seed = master;
      cfg.max_iters = pf.max_iters;
      // Members run until the machine-precision cutoff or --iters.
      cfg.stop_tol = std::numeric_limits<double>::min();
      emit_ensemble(csv, sys, cfg, grades.empty() ? std::vector<Index>{1} : grades, members, align_vmin);
    }
    write_output(out_path, csv.str(), out);
    return kOk;
  } catch (const InvalidArgument& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const InputError& e) {
    err << "input error: " << e.what() << '\n';
    return kIo;
  } catch (const std::exception& e) {
    err << "numeric error: " << e.what() << '\n';
    return kNumeric;
  }
}

}  // namespace kacz::cli

#include "bpeps/cli.hpp"

#include <fcntl.h>
#include <signal.h>
#include <unistd.h>

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cerrno>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <json.hpp>
#include <ostream>
#include <sstream>

#include "bpeps/errors.hpp"
#include "bpeps/evolve.hpp"
#include "bpeps/exact.hpp"
#include "bpeps/snapshot.hpp"

extern "C" void openblas_set_num_threads(int);

namespace bpeps::cli {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

void apply(const Overrides& o, ExperimentConfig& c) {
  if (o.out_dir) c.out_dir = *o.out_dir;
  if (o.seed) c.run.seed = *o.seed;
  if (o.deterministic) c.deterministic = *o.deterministic;
  if (o.oracle_cap) c.oracle_cap = *o.oracle_cap;
}

double cost_model(int lx, double chi, double eta, double d, double p) {
  const double l2 = static_cast<double>(lx) * lx;
  return l2 * (std::pow(chi, 4) * std::pow(eta, 3) * d * p + std::pow(chi, 3) * std::pow(eta, 4) * d * d * p +
               std::pow(chi, 2) * std::pow(eta, 5) * p * p);
}

std::string checkpoint_name(int iteration) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "checkpoint_%06d.bpck", iteration);
  return buf;
}

namespace {

constexpr const char* kTraceHeader = "iter,alpha,energy,norm,cum_discard,wall_ms";

std::string exact_text(double v) {
  std::ostringstream o;
  o << std::setprecision(17) << v;
  return o.str();
}

bool wants(const ExperimentConfig& c, const std::string& format) {
  return std::find(c.formats.begin(), c.formats.end(), format) != c.formats.end();
}

double relative_error(double e, double ref) { return std::abs((e - ref) / ref); }

// Single run per output directory; a lock left by a dead process is taken over.
class DirectoryLock {
 public:
  explicit DirectoryLock(const fs::path& dir) : path_(dir / "bpeps.lock") {
    for (int attempt = 0; attempt < 2; ++attempt) {
      const int fd = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
      if (fd >= 0) {
        const std::string pid = std::to_string(::getpid()) + "\n";
        [[maybe_unused]] const auto n = ::write(fd, pid.data(), pid.size());
        ::close(fd);
        held_ = true;
        return;
      }
      if (errno != EEXIST || !stale()) break;
      std::error_code ec;
      fs::remove(path_, ec);
    }
  }
  ~DirectoryLock() {
    if (held_) {
      std::error_code ec;
      fs::remove(path_, ec);
    }
  }
  DirectoryLock(const DirectoryLock&) = delete;
  DirectoryLock& operator=(const DirectoryLock&) = delete;
  bool held() const { return held_; }
  const fs::path& path() const { return path_; }

 private:
  bool stale() const {
    std::ifstream in(path_);
    long pid = 0;
    if (!(in >> pid) || pid <= 0) return false;
    return ::kill(static_cast<pid_t>(pid), 0) != 0 && errno == ESRCH;
  }
  fs::path path_;
  bool held_ = false;
};

struct References {
  bool available = false;
  std::vector<double> values;
  std::string note;
};

References compute_references(const ExperimentConfig& c) {
  References r;
  if (!c.oracle) {
    r.note = "oracle disabled";
    return r;
  }
  const ModelSpec model = build_model(c.run);
  try {
    const SparseOperator h = assemble(model, c.oracle_cap);
    const Eigenpairs ep = lowest_eigenpairs(h, static_cast<int>(std::min<Index>(c.run.p, h.dim)));
    r.values = ep.values;
    r.available = true;
  } catch (const CapacityError& e) {
    r.note = e.what();
  }
  return r;
}

ordered_json versions() {
  ordered_json v;
  v["bpeps"] = BPEPS_VERSION;
  v["eigen"] = std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
               std::to_string(EIGEN_MINOR_VERSION);
  v["compiler"] = __VERSION__;
  v["snapshot_format"] = kSnapshotVersion;
  return v;
}

// Rows of trace.csv up to and including `last_iter`, header excluded.
std::vector<std::string> trace_rows_through(const fs::path& path, int last_iter) {
  std::vector<std::string> rows;
  std::ifstream in(path);
  std::string line;
  if (!std::getline(in, line)) return rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (std::stoi(line.substr(0, line.find(','))) <= last_iter) rows.push_back(line);
  }
  return rows;
}

struct RunState {
  ExperimentConfig config;
  fs::path dir;
  std::vector<double> initial_energies;
  double prior_wall_ms = 0.0;
};

std::string checkpoint_metadata(const RunState& rs, int iteration, double wall_ms) {
  ordered_json m;
  m["iteration"] = iteration;
  m["config"] = serialize_config(rs.config);
  m["initial_energies"] = rs.initial_energies;
  m["wall_ms"] = wall_ms;
  return m.dump();
}

void write_summary(const RunState& rs, const std::vector<double>& final_energies, int iterations,
                   const BlockIsoPeps& s, const References& ref, double wall_ms) {
  ordered_json j;
  j["model"] = {{"kind", rs.config.run.kind}, {"lx", rs.config.run.lx}, {"ly", rs.config.run.ly}, {"g", rs.config.run.g}};
  j["seed"] = rs.config.run.seed;
  j["iterations"] = iterations;
  j["final_energies"] = final_energies;
  std::vector<double> sorted = final_energies;
  std::sort(sorted.begin(), sorted.end());
  j["sorted_energies"] = sorted;
  j["initial_energies"] = rs.initial_energies;
  std::vector<double> change;
  for (std::size_t a = 0; a < final_energies.size() && a < rs.initial_energies.size(); ++a)
    change.push_back(rs.initial_energies[a] != 0.0 ? relative_error(final_energies[a], rs.initial_energies[a]) : 0.0);
  j["relative_change_from_initial"] = change;
  if (ref.available) {
    j["reference_energies"] = ref.values;
    std::vector<double> errs;
    for (std::size_t a = 0; a < sorted.size() && a < ref.values.size(); ++a)
      errs.push_back(relative_error(sorted[a], ref.values[a]));
    j["relative_errors"] = errs;
  } else {
    j["reference_energies"] = nullptr;
    j["relative_errors"] = nullptr;
    j["oracle_note"] = ref.note;
  }
  j["cum_discard"] = s.cum_discard;
  j["wall_seconds"] = wall_ms / 1000.0;
  j["config"] = serialize_config(rs.config);
  j["versions"] = versions();
  write_file_atomic(rs.dir / "summary.json", j.dump(2) + "\n");
}

// Shared loop of run and resume: iterations done+1..config.run.iterations.
int drive(RunState& rs, BlockIsoPeps state, int done, std::ostream& out, std::ostream& err) {
  const ExperimentConfig& c = rs.config;
  if (c.deterministic) openblas_set_num_threads(1);
  const References ref = compute_references(c);
  if (!ref.available) out << "reference energies unavailable: " << ref.note << "\n";

  std::ofstream trace;
  if (wants(c, "csv")) {
    const fs::path tp = rs.dir / "trace.csv";
    const auto kept = done > 0 ? trace_rows_through(tp, done) : std::vector<std::string>{};
    trace.open(tp, std::ios::trunc);
    if (!trace) throw std::runtime_error("cannot write " + tp.string());
    trace << kTraceHeader << "\n";
    for (const auto& row : kept) trace << row << "\n";
    trace.flush();
  }

  double wall_ms = rs.prior_wall_ms;
  std::vector<double> last_energies;
  RunHooks hooks;
  hooks.on_iteration = [&](const TraceRow& row, const BlockIsoPeps& s) {
    wall_ms += row.wall_ms;
    if (!row.energies.empty()) {
      last_energies = row.energies;
      if (trace.is_open()) {
        for (std::size_t a = 0; a < row.energies.size(); ++a)
          trace << row.iter << ',' << a << ',' << exact_text(row.energies[a]) << ',' << exact_text(row.norms[a]) << ','
                << exact_text(row.cum_discard) << ',' << exact_text(row.wall_ms) << '\n';
        trace.flush();
      }
      out << "iter " << row.iter << "/" << c.run.iterations << "  E =";
      for (double e : row.energies) out << ' ' << std::setprecision(10) << e;
      out << "  discard " << std::setprecision(3) << row.discard_increment << "  " << std::setprecision(4)
          << row.wall_ms / 1000.0 << " s\n";
    }
    const bool periodic = c.run.checkpoint_period > 0 && row.iter % c.run.checkpoint_period == 0;
    if (periodic || row.iter == c.run.iterations) {
      Checkpoint cp{checkpoint_metadata(rs, row.iter, wall_ms), s};
      write_file_atomic(rs.dir / checkpoint_name(row.iter), encode_checkpoint(cp));
    }
  };

  RunResult result;
  try {
    result = subspace_iteration(c.run, std::move(state), done, hooks);
  } catch (const AuditFailure& e) {
    const fs::path snap = rs.dir / ("diagnostic_" + std::to_string(e.iter) + ".bpsnap");
    write_file_atomic(snap, encode_state(e.state));
    err << "invariant failure: " << e.what() << "\n" << "diagnostic snapshot: " << snap.string() << "\n";
    return kInvariantFailure;
  }
  if (last_energies.empty()) last_energies = rs.initial_energies;
  if (wants(c, "json")) write_summary(rs, last_energies, c.run.iterations, result.state, ref, wall_ms);
  out << "done: " << c.run.iterations << " iterations, outputs in " << rs.dir.string() << "\n";
  return kOk;
}

template <class F>
int guarded(std::ostream& err, F&& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const SnapshotError& e) {
    err << "snapshot error: " << e.what() << "\n";
    return kSnapshotError;
  } catch (const CapacityError& e) {
    err << "capacity exceeded: " << e.what() << "\n";
    return kCapExceeded;
  } catch (const InvariantError& e) {
    err << "invariant failure: " << e.what() << "\n";
    return kInvariantFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kFailure;
  }
}

ExperimentConfig load_with(const std::string& path, const Overrides& o) {
  ExperimentConfig c = load_config(path);
  apply(o, c);
  if (c.oracle_cap < 1) throw ConfigError(0, "oracle cap must be positive");
  return c;
}

// Dense action of a two-site matrix on factors (pa, pb) of an n-qubit vector, factor 0 most significant.
void apply_pair(std::vector<cplx>& v, int n, int pa, int pb, const Matrix& g) {
  const Index dim = static_cast<Index>(v.size());
  const int ba = n - 1 - pa, bb = n - 1 - pb;
  for (Index x = 0; x < dim; ++x) {
    if (((x >> ba) & 1) || ((x >> bb) & 1)) continue;
    const Index idx[4] = {x, x | (Index(1) << bb), x | (Index(1) << ba), x | (Index(1) << ba) | (Index(1) << bb)};
    cplx in[4];
    for (int k = 0; k < 4; ++k) in[k] = v[static_cast<std::size_t>(idx[k])];
    for (int r = 0; r < 4; ++r) {
      cplx acc = 0.0;
      for (int k = 0; k < 4; ++k) acc += g(r, k) * in[k];
      v[static_cast<std::size_t>(idx[r])] = acc;
    }
  }
}

double vec_norm(const std::vector<cplx>& v) {
  double s = 0.0;
  for (const cplx& x : v) s += std::norm(x);
  return std::sqrt(s);
}

double vec_diff(const std::vector<cplx>& a, const std::vector<cplx>& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += std::norm(a[k] - b[k]);
  return std::sqrt(s);
}

double max_member_deviation(const BlockIsoPeps& x, const BlockIsoPeps& y, Index cap) {
  double m = 0.0;
  for (Index a = 0; a < x.p; ++a) {
    const auto vx = contract_to_vector(x, a, cap), vy = contract_to_vector(y, a, cap);
    m = std::max(m, vec_diff(vx, vy) / std::max(vec_norm(vx), 1e-300));
  }
  return m;
}

struct Check {
  std::string name;
  double value = 0.0;
  double tol = 0.0;
  bool applicable = true;
  bool pass() const { return !applicable || value <= tol; }
};

}  // namespace

int run(const std::string& config_path, const Overrides& o, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    RunState rs;
    rs.config = load_with(config_path, o);
    rs.dir = rs.config.out_dir;
    fs::create_directories(rs.dir);
    DirectoryLock lock(rs.dir);
    if (!lock.held()) {
      err << "output directory is locked by another run: " << lock.path().string() << "\n";
      return static_cast<int>(kFailure);
    }
    if (rs.config.deterministic) openblas_set_num_threads(1);
    BlockIsoPeps s = initial_state(rs.config.run);
    rs.initial_energies = rayleigh_quotients(s, build_model(rs.config.run), sweep_options(rs.config.run));
    if (rs.config.run.iterations == 0) {
      if (wants(rs.config, "csv")) write_file_atomic(rs.dir / "trace.csv", std::string(kTraceHeader) + "\n");
      if (wants(rs.config, "json"))
        write_summary(rs, rs.initial_energies, 0, s, compute_references(rs.config), 0.0);
      return static_cast<int>(kOk);
    }
    return drive(rs, std::move(s), 0, out, err);
  });
}

int resume(const std::string& checkpoint_path, int extra, const Overrides& o, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (extra < 0) throw ArgumentError("extra iterations must be nonnegative");
    Checkpoint cp = decode_checkpoint(read_file(checkpoint_path));
    RunState rs;
    int done = 0;
    try {
      const auto m = nlohmann::json::parse(cp.metadata);
      done = m.at("iteration").get<int>();
      rs.config = parse_config(m.at("config").get<std::string>());
      rs.initial_energies = m.at("initial_energies").get<std::vector<double>>();
      rs.prior_wall_ms = m.at("wall_ms").get<double>();
    } catch (const nlohmann::json::exception& e) {
      throw SnapshotError(std::string("bad checkpoint metadata: ") + e.what());
    } catch (const ConfigError& e) {
      throw SnapshotError(std::string("bad configuration in checkpoint: ") + e.what());
    }
    if (extra == 0) {
      out << "nothing to do: 0 extra iterations\n";
      return static_cast<int>(kOk);
    }
    Overrides keep = o;
    if (!keep.out_dir) keep.out_dir = fs::path(checkpoint_path).parent_path().string();
    if (keep.out_dir->empty()) keep.out_dir = ".";
    apply(keep, rs.config);
    rs.config.run.iterations = done + extra;
    rs.dir = rs.config.out_dir;
    fs::create_directories(rs.dir);
    DirectoryLock lock(rs.dir);
    if (!lock.held()) {
      err << "output directory is locked by another run: " << lock.path().string() << "\n";
      return static_cast<int>(kFailure);
    }
    out << "resuming at iteration " << done << " for " << extra << " more\n";
    return drive(rs, std::move(cp.state), done, out, err);
  });
}

int verify(const std::string& config_path, const Overrides& o, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const ExperimentConfig c = load_with(config_path, o);
    const RunConfig& rc = c.run;
    const int n = rc.lx * rc.ly;
    checked_dimension(2, n, c.oracle_cap);
    if (c.deterministic) openblas_set_num_threads(1);
    const Index cap = c.oracle_cap;
    const ModelSpec model = build_model(rc);
    const SweepOptions opt = sweep_options(rc);
    std::vector<Check> checks;

    const BlockIsoPeps s0 = random_state(rc.lx, rc.ly, 2, rc.p, rc.chi, rc.eta, rc.seed);

    // Lossless center moves and rotations.
    {
      BlockIsoPeps s = move_center_within_column(s0, rc.lx - 1);
      s = move_center_within_column(std::move(s), 0);
      for (int k = 0; k < 4; ++k) s = rotate_ccw(std::move(s));
      checks.push_back({"center moves and rotations preserve members", max_member_deviation(s0, s, cap), 1e-10});
      checks.push_back({"isometry audit", audit(s).max_isometry_deviation, 1e-8});
    }
    // Gram matrix against dense overlaps.
    {
      const Matrix gram = block_overlap(s0);
      double dev = 0.0;
      std::vector<std::vector<cplx>> v;
      for (Index a = 0; a < rc.p; ++a) v.push_back(contract_to_vector(s0, a, cap));
      for (Index a = 0; a < rc.p; ++a)
        for (Index b = 0; b < rc.p; ++b) {
          cplx ip = 0.0;
          for (std::size_t k = 0; k < v[0].size(); ++k) ip += std::conj(v[a][k]) * v[b][k];
          dev = std::max(dev, std::abs(ip - gram(a, b)));
        }
      checks.push_back({"block Gram matrix matches dense overlaps", dev, 1e-8});
      const OrthonormalizeResult orth = orthonormalize_block(s0, rc.seed);
      const Matrix after = block_overlap(orth.state);
      checks.push_back({"orthonormalized block Gram is identity",
                        (after - Matrix::Identity(rc.p, rc.p)).cwiseAbs().maxCoeff(), 1e-10});
    }
    // One gate against its dense action.
    {
      Check ck{"bond gate matches dense gate action", 0.0, 1e-9};
      if (rc.lx >= 2) {
        BlockIsoPeps s = s0;
        s.eta_max = kUnbounded;
        const GateTable gates(model, rc.tau);
        const Matrix g = gates.oriented(s.label[0], s.label[static_cast<std::size_t>(rc.ly)]);
        const BlockIsoPeps t = apply_bond_gate(s, 0, g, opt.reduced, 0.0);
        for (Index a = 0; a < rc.p; ++a) {
          auto v = contract_to_vector(s0, a, cap);
          apply_pair(v, n, s.label[0], s.label[static_cast<std::size_t>(rc.ly)], g);
          const auto w = contract_to_vector(t, a, cap);
          ck.value = std::max(ck.value, vec_diff(v, w) / std::max(vec_norm(v), 1e-300));
        }
      } else {
        ck.applicable = false;
      }
      checks.push_back(ck);
    }
    // One Trotter step against the ordered dense gate product.
    {
      BlockIsoPeps s = s0;
      const bool exact = n <= 9;
      if (exact) s.chi_max = s.eta_max = kUnbounded;
      const GateTable gates(model, rc.tau);
      SweepOptions so = opt;
      if (exact) so.moses.zipup_tol = 0.0;
      const BlockIsoPeps t = apply_trotter_step(s, gates, so);
      double dev = 0.0;
      for (Index a = 0; a < rc.p; ++a) {
        auto v = contract_to_vector(s0, a, cap);
        for (std::size_t b : trotter_gate_order(model, s.rotation)) {
          const Bond& bd = model.bonds[b];
          apply_pair(v, n, model.position(bd.a), model.position(bd.b), hermitian_exp(bd.term, rc.tau));
        }
        const auto w = contract_to_vector(t, a, cap);
        dev = std::max(dev, vec_diff(v, w) / std::max(vec_norm(v), 1e-300));
      }
      if (exact) {
        checks.push_back({"Trotter step matches ordered gate product (unbounded caps)", dev, 1e-8});
      } else {
        // Truncated: deviation is bounded by the discarded weight the step reports.
        const double reported = std::sqrt(std::max(0.0, t.cum_discard * t.cum_discard - s.cum_discard * s.cum_discard));
        checks.push_back({"Trotter step deviation within 3x reported discard", dev, 3.0 * reported + 1e-8});
      }
    }
    // Rayleigh quotients against dense expectation values.
    const SparseOperator h = assemble(model, cap);
    {
      const std::vector<double> rq = rayleigh_quotients(s0, model, opt);
      double dev = 0.0;
      for (Index a = 0; a < rc.p; ++a) {
        const auto v = contract_to_vector(s0, a, cap);
        std::vector<cplx> hv(v.size());
        h.apply(v.data(), hv.data());
        cplx num = 0.0;
        double den = 0.0;
        for (std::size_t k = 0; k < v.size(); ++k) {
          num += std::conj(v[k]) * hv[k];
          den += std::norm(v[k]);
        }
        const double e = num.real() / den;
        dev = std::max(dev, std::abs(rq[static_cast<std::size_t>(a)] - e) / std::max(std::abs(e), 1.0));
      }
      checks.push_back({"Rayleigh quotients match dense expectation", dev, 1e-7});
    }
    // Lowest eigenvalues: residuals, and dense diagonalization when small.
    {
      const int k = static_cast<int>(std::min<Index>(rc.p, h.dim));
      const Eigenpairs ep = lowest_eigenpairs(h, k);
      double res = 0.0;
      for (int a = 0; a < k; ++a)
        res = std::max(res, ep.residuals[static_cast<std::size_t>(a)] / std::max(std::abs(ep.values[static_cast<std::size_t>(a)]), 1.0));
      checks.push_back({"lowest eigenpair residuals", res, 1e-8});
      Check dense{"lowest eigenvalues match dense diagonalization", 0.0, 1e-10};
      if (h.dim <= 4096) {
        Eigen::SelfAdjointEigenSolver<Matrix> es(h.to_dense(), Eigen::EigenvaluesOnly);
        for (int a = 0; a < k; ++a)
          dense.value = std::max(dense.value, std::abs(es.eigenvalues()(a) - ep.values[static_cast<std::size_t>(a)]) /
                                                  std::max(std::abs(es.eigenvalues()(a)), 1.0));
      } else {
        dense.applicable = false;
      }
      checks.push_back(dense);
      out << "lowest eigenvalues:";
      for (double e : ep.values) out << ' ' << std::setprecision(12) << e;
      out << "\n";
    }

    bool all = true;
    out << std::left << std::setw(60) << "check" << std::setw(12) << "value" << std::setw(12) << "tolerance"
        << "result\n";
    for (const Check& ck : checks) {
      all = all && ck.pass();
      std::ostringstream v, t;
      v << std::scientific << std::setprecision(2) << ck.value;
      t << std::scientific << std::setprecision(2) << ck.tol;
      out << std::left << std::setw(60) << ck.name << std::setw(12) << (ck.applicable ? v.str() : "-")
          << std::setw(12) << t.str() << (ck.applicable ? (ck.pass() ? "PASS" : "FAIL") : "n/a") << "\n";
    }
    out << (all ? "all checks passed" : "some checks failed") << "\n";
    return static_cast<int>(all ? kOk : kFailure);
  });
}

int bench(const std::string& config_path, const Overrides& o, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const ExperimentConfig c = load_with(config_path, o);
    if (c.deterministic) openblas_set_num_threads(1);
    const double chi = c.run.chi == kUnbounded ? 0.0 : static_cast<double>(c.run.chi);
    const double eta = c.run.eta == kUnbounded ? 0.0 : static_cast<double>(c.run.eta);
    out << "one iteration of " << c.run.kind << " at chi=" << c.run.chi << " eta=" << c.run.eta << " p=" << c.run.p
        << "\n";
    out << std::left << std::setw(10) << "lattice" << std::setw(14) << "seconds" << std::setw(14) << "model cost"
        << "seconds/cost\n";
    std::vector<double> lx_log, t_log;
    for (int l = 2; l <= c.run.lx; ++l) {
      RunConfig rc = c.run;
      rc.lx = l;
      rc.ly = std::max(2, c.run.ly * l / c.run.lx);
      rc.iterations = 1;
      rc.energy_period = 1;
      const auto t0 = std::chrono::steady_clock::now();
      subspace_iteration(rc);
      const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      const double cost = chi > 0 && eta > 0 ? cost_model(l, chi, eta, 2.0, static_cast<double>(rc.p)) : 0.0;
      std::ostringstream lat;
      lat << rc.lx << "x" << rc.ly;
      out << std::left << std::setw(10) << lat.str() << std::setw(14) << std::setprecision(4) << sec << std::setw(14)
          << std::setprecision(4) << cost;
      if (cost > 0) out << std::scientific << std::setprecision(3) << sec / cost << std::defaultfloat;
      out << "\n";
      lx_log.push_back(std::log(static_cast<double>(l)));
      t_log.push_back(std::log(sec));
    }
    if (lx_log.size() >= 2) {
      const double n = static_cast<double>(lx_log.size());
      double sx = 0, sy = 0, sxx = 0, sxy = 0;
      for (std::size_t k = 0; k < lx_log.size(); ++k) {
        sx += lx_log[k];
        sy += t_log[k];
        sxx += lx_log[k] * lx_log[k];
        sxy += lx_log[k] * t_log[k];
      }
      const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
      out << "fitted time ~ L_x^" << std::setprecision(3) << slope << " (cost model predicts L_x^2 at fixed caps)\n";
    }
    return static_cast<int>(kOk);
  });
}

}  // namespace bpeps::cli

// qwalk: command-line front end for the decision-tree walk library.

#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "qwalk/error.hpp"
#include "qwalk/evolution.hpp"
#include "qwalk/exact_cover.hpp"
#include "qwalk/hamiltonian.hpp"
#include "qwalk/output.hpp"
#include "qwalk/scattering.hpp"
#include "qwalk/spin.hpp"
#include "qwalk/tree.hpp"

namespace {

using namespace qwalk;

struct TreeArgs {
  std::string family = "grover";
  int n = 0;
  std::string w;
  std::string instance;
  std::string tree_file;
  int start_runway = 0;
  int end_runway = 0;
};

void add_tree_options(CLI::App* cmd, TreeArgs& a, bool with_runways = true) {
  cmd->add_option("--family", a.family, "underlying | grover | even-bush | line | exact-cover")
      ->check(CLI::IsMember({"underlying", "grover", "even-bush", "line", "exact-cover"}));
  cmd->add_option("--n", a.n, "tree depth");
  cmd->add_option("--w", a.w, "marked path (defaults to all ones)");
  cmd->add_option("--instance", a.instance, "exact-cover instance JSON");
  cmd->add_option("--tree", a.tree_file, "read the tree from JSON instead of building it");
  if (with_runways) {
    cmd->add_option("--start-runway", a.start_runway, "nodes appended below the root")
        ->check(CLI::NonNegativeNumber);
    cmd->add_option("--end-runway", a.end_runway, "nodes appended past the target")
        ->check(CLI::NonNegativeNumber);
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Writes to `path`, or stdout when the path is empty or "-".
void write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw InvalidArgument("cannot write " + path);
  out << text;
}

Bitstring path_bits(const TreeArgs& a) {
  if (a.w.empty()) return Bitstring(static_cast<std::size_t>(a.n), 1);
  return parse_bits(a.w);
}

void need_depth(const TreeArgs& a) {
  if (a.n < 1) throw InvalidArgument("--n must be a positive depth");
}

DecisionTree make_tree(const TreeArgs& a) {
  DecisionTree t = [&] {
    if (!a.tree_file.empty()) return tree_from_json(read_file(a.tree_file));
    if (a.family == "exact-cover") {
      if (a.instance.empty()) throw InvalidArgument("--family exact-cover needs --instance");
      return exact_cover_tree(instance_from_json(read_file(a.instance)));
    }
    need_depth(a);
    if (a.family == "underlying") return build_underlying_tree(a.n);
    if (a.family == "grover") return build_grover_tree(a.n, path_bits(a));
    if (a.family == "even-bush") return build_even_bush_tree(a.n, path_bits(a));
    return from_base_bush_form(line_form(a.n));
  }();
  return attach_runways(t, a.start_runway, a.end_runway);
}

BaseBushForm make_form(const TreeArgs& a) {
  if (!a.tree_file.empty()) return to_base_bush_form(tree_from_json(read_file(a.tree_file)));
  if (a.family == "exact-cover") {
    return to_base_bush_form(make_tree(a));
  }
  need_depth(a);
  if (a.family == "grover") return grover_form(a.n, a.start_runway, a.end_runway);
  if (a.family == "even-bush") return even_bush_form(a.n, a.start_runway, a.end_runway);
  if (a.family == "line") return line_form(a.n, a.start_runway, a.end_runway);
  throw InvalidArgument("transmission needs a tree with a unique target; '" + a.family +
                        "' has many");
}

std::string bush_summary(const DecisionTree& t) {
  if (t.targets().size() != 1) return "targets=" + std::to_string(t.targets().size());
  const BaseBushForm f = to_base_bush_form(t);
  std::string s = "bush_heights=";
  for (std::size_t m = 0; m < f.bushes.size(); ++m) {
    if (m) s += ',';
    s += std::to_string(bush_height(f.bushes[m]));
  }
  if (f.bushes.empty()) s += "-";
  return s;
}

int run_tree(const TreeArgs& a, const std::string& out) {
  const DecisionTree t = make_tree(a);
  write_output(out, tree_to_json(t) + "\n");
  std::cerr << "nodes=" << t.size() << " edges=" << t.edges().size() << " n=" << t.n_levels()
            << " leaves_at_n=" << t.targets().size() << ' ' << bush_summary(t) << '\n';
  return 0;
}

struct SweepArgs {
  std::string grid = "log:1e-14:3.999999996:2000";
  std::string out;
  std::string svg;
  std::string emit = "abs";
};

int run_transmission(const TreeArgs& a, const SweepArgs& s) {
  const BaseBushForm form = make_form(a);
  const std::vector<double> grid = parse_grid(s.grid);
  const auto rows = transmission_sweep(form, grid);
  std::ostringstream csv;
  write_transmission_csv(csv, rows);
  write_output(s.out, csv.str());

  int poles = 0;
  double worst = 0.0;
  double crossover = std::nan("");
  for (const auto& r : rows) {
    if (r.at_pole) {
      ++poles;
      continue;
    }
    worst = std::max(worst, r.unitarity_residual);
    if (std::isnan(crossover) && std::abs(r.T) < 0.5) crossover = r.E;
  }
  std::cerr << "points=" << rows.size() << " poles=" << poles
            << " max_unitarity_residual=" << worst << " first_E_with_absT_below_0.5=" << crossover
            << '\n';

  if (!s.svg.empty()) {
    const bool log_x = s.grid.rfind("log:", 0) == 0;
    PlotSeries abs_series{{}, {}, "|T|"};
    PlotSeries re_series{{}, {}, "Re T"};
    for (const auto& r : rows) {
      abs_series.x.push_back(r.E);
      abs_series.y.push_back(r.at_pole ? std::nan("") : std::abs(r.T));
      re_series.x.push_back(r.E);
      re_series.y.push_back(r.at_pole ? std::nan("") : r.T.real());
    }
    std::vector<PlotSeries> series;
    PlotOptions opt;
    opt.x_label = "E";
    opt.log_x = log_x;
    if (s.emit == "abs" || s.emit == "both") series.push_back(abs_series);
    if (s.emit == "re" || s.emit == "both") series.push_back(re_series);
    opt.title = "transmission, " + a.family + " n=" + std::to_string(form.base_length);
    opt.y_label = s.emit == "abs" ? "|T(E)|" : s.emit == "re" ? "Re T(E)" : "T(E)";
    opt.y_min = s.emit == "abs" ? 0.0 : -1.0;
    opt.y_max = 1.0;
    write_output(s.svg, svg_plot(series, opt));
  }
  return 0;
}

struct EvolveArgs {
  std::string mode = "quantum";
  double t = 1.0;
  int start = -1;
  std::string out;
  bool alternative_runway = false;
};

int run_evolve(const TreeArgs& a, const EvolveArgs& e) {
  const DecisionTree tree = make_tree(a);
  const GraphHamiltonian h = hamiltonian_from_tree(
      tree, 1.0, e.alternative_runway ? RunwayWeights::alternative() : RunwayWeights::standard());
  const int start = e.start < 0 ? tree.root() : e.start;
  const Propagator prop(h);
  std::ostringstream csv;
  csv << csv_version_line() << '\n' << "node,level,prob\n" << std::setprecision(17);
  double total = 0.0;
  double bound = 0.0;
  if (e.mode == "classical") {
    const auto p = prop.classical(start, e.t);
    for (int id = 0; id < tree.size(); ++id) {
      csv << id << ',' << tree.level(id) << ',' << p.values[id] << '\n';
    }
    total = p.total();
    bound = p.error_bound;
  } else {
    const auto psi = prop.quantum(StateVector::basis(h.dim(), start), e.t);
    for (int id = 0; id < tree.size(); ++id) {
      csv << id << ',' << tree.level(id) << ',' << std::norm(psi.amplitudes[id]) << '\n';
    }
    total = psi.amplitudes.squaredNorm();
    bound = psi.error_bound;
  }
  write_output(e.out, csv.str());
  std::cerr << "mode=" << e.mode << " t=" << e.t << " total_probability=" << std::setprecision(15)
            << total << " error_bound=" << bound << '\n';
  return 0;
}

struct ProbeArgs {
  std::string mode = "classical";
  double tmax = 50.0;
  double dt = 0.1;
  std::string out;
};

int run_penetrate(const TreeArgs& a, const ProbeArgs& p) {
  const DecisionTree tree = make_tree(a);
  const GraphHamiltonian h = hamiltonian_from_tree(tree);
  const auto rep = penetrability_probe(
      tree, h, p.mode == "classical" ? WalkMode::Classical : WalkMode::Quantum, p.tmax, p.dt);
  if (!p.out.empty()) {
    std::ostringstream csv;
    write_probe_csv(csv, rep);
    write_output(p.out, csv.str());
  }
  std::cout << std::setprecision(10) << "max_prob=" << rep.max_prob << " argmax_t=" << rep.argmax_t
            << '\n';
  return 0;
}

struct TrotterArgs {
  int n = 3;
  double t = 2.0;
  int m = 64;
  std::string instance;
  std::string dump;
};

int run_trotter(const TrotterArgs& a) {
  std::vector<LocalTerm> terms;
  DecisionTree tree = build_underlying_tree(a.n);
  if (a.instance.empty()) {
    terms = assemble_tree_terms(a.n);
  } else {
    const auto inst = instance_from_json(read_file(a.instance));
    terms = assemble_trimmed_terms(inst, a.n);
    tree = trim_tree(a.n, exact_cover_family(inst));
  }
  const SpinLayout layout{a.n};
  const int bits = layout.bits();
  if (bits > kMaxTrotterBits) throw CapacityError("too many bits for a dense state vector");
  Eigen::VectorXcd psi0 = Eigen::VectorXcd::Zero(Eigen::Index{1} << bits);
  psi0[static_cast<Eigen::Index>(layout.node_index({}))] = 1.0;

  const auto plan = make_trotter_plan(terms, a.t, a.m);
  const Eigen::VectorXcd approx = trotter_evolve(terms, bits, psi0, plan);
  const Eigen::VectorXcd exact = Propagator(terms_hamiltonian(terms, bits)).quantum(
                                     StateVector{psi0, 0.0, 0.0}, a.t).amplitudes;
  const double overlap = std::abs(exact.dot(approx));
  const double error = (exact - approx).norm();

  Eigen::VectorXcd outside = exact;
  for (auto idx : tree_basis_indices(layout, tree)) outside[static_cast<Eigen::Index>(idx)] = 0.0;
  int max_support = 0;
  for (const auto& term : terms) max_support = std::max<int>(max_support, term.support.size());

  if (!a.dump.empty()) write_output(a.dump, dump_terms(terms));
  std::cout << std::setprecision(12) << "terms=" << terms.size() << " max_support=" << max_support
            << " overlap_with_exact=" << overlap << " error_norm=" << error
            << " leakage=" << outside.norm() << '\n';
  return 0;
}

int run_exactcover_generate(int n, std::uint64_t seed, const std::string& out) {
  write_output(out, instance_to_json(generate_restricted_instance(n, seed)) + "\n");
  return 0;
}

int run_exactcover_solve(const std::string& path) {
  const auto inst = instance_from_json(read_file(path));
  const auto sols = brute_force_solve(inst);
  for (const auto& s : sols) std::cout << format_bits(s) << '\n';
  const DecisionTree tree = exact_cover_tree(inst);
  std::cerr << "solutions=" << sols.size() << " tree_leaves=" << tree.targets().size() << '\n';
  return 0;
}

int run_exactcover_compare(const std::string& path) {
  const auto inst = instance_from_json(read_file(path));
  const auto sols = brute_force_solve(inst);
  const DecisionTree tree = exact_cover_tree(inst);
  std::vector<Bitstring> leaves;
  for (int id : tree.targets()) leaves.push_back(*tree.label(id));
  const bool same = leaves == sols;
  std::cout << "solutions=" << sols.size() << " tree_leaves=" << leaves.size()
            << " identical=" << (same ? "yes" : "no") << '\n';
  return same ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Random walks, quantum walks and scattering on decision trees"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));

  TreeArgs tree_args;
  std::string tree_out;
  auto* tree_cmd = app.add_subcommand("tree", "build a tree and write it as JSON");
  add_tree_options(tree_cmd, tree_args);
  tree_cmd->add_option("--out", tree_out, "output path (stdout by default)");

  TreeArgs tx_args;
  SweepArgs sweep;
  auto* tx_cmd = app.add_subcommand("transmission", "sweep T(E) over an energy grid");
  add_tree_options(tx_cmd, tx_args);
  tx_cmd->add_option("--grid", sweep.grid, "log:a:b:N or lin:a:b:N");
  tx_cmd->add_option("--out", sweep.out, "CSV path (stdout by default)");
  tx_cmd->add_option("--svg", sweep.svg, "also write an SVG plot");
  tx_cmd->add_option("--emit", sweep.emit, "plotted quantity")
      ->check(CLI::IsMember({"abs", "re", "both"}));

  TreeArgs ev_args;
  EvolveArgs ev;
  auto* ev_cmd = app.add_subcommand("evolve", "propagate from one node and write probabilities");
  add_tree_options(ev_cmd, ev_args);
  ev_cmd->add_option("--mode", ev.mode)->check(CLI::IsMember({"classical", "quantum"}));
  ev_cmd->add_option("--t", ev.t, "time")->check(CLI::NonNegativeNumber);
  ev_cmd->add_option("--start", ev.start, "start node id (root by default)");
  ev_cmd->add_option("--out", ev.out, "CSV path (stdout by default)");
  ev_cmd->add_flag("--alternative-runway", ev.alternative_runway,
                   "runway diagonal 3 and hopping -3/2");

  TreeArgs pen_args;
  ProbeArgs probe;
  auto* pen_cmd = app.add_subcommand("penetrate", "probability of reaching level n over time");
  add_tree_options(pen_cmd, pen_args);
  pen_cmd->add_option("--mode", probe.mode)->check(CLI::IsMember({"classical", "quantum"}));
  pen_cmd->add_option("--tmax", probe.tmax)->check(CLI::NonNegativeNumber);
  pen_cmd->add_option("--dt", probe.dt)->check(CLI::PositiveNumber);
  pen_cmd->add_option("--out", probe.out, "CSV of the sampled curve");

  TrotterArgs trot;
  auto* trot_cmd = app.add_subcommand("trotter", "Trotterized evolution of the spin encoding");
  trot_cmd->add_option("--n", trot.n)->check(CLI::Range(1, kMaxSpinLevels));
  trot_cmd->add_option("--t", trot.t);
  trot_cmd->add_option("--m", trot.m)->check(CLI::PositiveNumber);
  trot_cmd->add_option("--instance", trot.instance, "trim with this exact-cover instance");
  trot_cmd->add_option("--dump-terms", trot.dump, "write the term list");

  auto* ec_cmd = app.add_subcommand("exactcover", "exact-cover instances");
  ec_cmd->require_subcommand(1);
  int gen_n = 12;
  std::uint64_t gen_seed = 0;
  std::string gen_out;
  auto* gen_cmd = ec_cmd->add_subcommand("generate", "random restricted instance");
  gen_cmd->add_option("--n", gen_n)->check(CLI::Range(6, 63));
  gen_cmd->add_option("--seed", gen_seed);
  gen_cmd->add_option("--out", gen_out);
  std::string solve_path;
  auto* solve_cmd = ec_cmd->add_subcommand("solve", "list every solution by brute force");
  solve_cmd->add_option("--instance", solve_path)->required();
  std::string cmp_path;
  auto* cmp_cmd = ec_cmd->add_subcommand("compare", "brute force against the trimmed tree");
  cmp_cmd->add_option("--instance", cmp_path)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*tree_cmd) return run_tree(tree_args, tree_out);
    if (*tx_cmd) return run_transmission(tx_args, sweep);
    if (*ev_cmd) return run_evolve(ev_args, ev);
    if (*pen_cmd) return run_penetrate(pen_args, probe);
    if (*trot_cmd) return run_trotter(trot);
    if (*gen_cmd) return run_exactcover_generate(gen_n, gen_seed, gen_out);
    if (*solve_cmd) return run_exactcover_solve(solve_path);
    if (*cmp_cmd) return run_exactcover_compare(cmp_path);
  } catch (const InvalidArgument& e) {
    std::cerr << "error: " << e.what() << "\n" << app.help();
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

// dformkit command-line front end.
// Exit codes: 0 success, 1 validation error, 2 numerical failure.

#include <unistd.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dformkit/acceptance.hpp"
#include "dformkit/dformkit.hpp"
#include "dformkit/io.hpp"
#include "dformkit/svg.hpp"

namespace fs = std::filesystem;
using namespace dformkit;
using io::json;

namespace {

struct Output {
  std::string path;  // empty means stdout

  void write(const std::string& text) const {
    if (path.empty()) {
      std::fwrite(text.data(), 1, text.size(), stdout);
      std::fflush(stdout);
    } else {
      io::write_text(path, text);
    }
  }
};

void check_output_path(const std::string& path) {
  if (path.empty()) return;
  const fs::path p(path);
  const fs::path parent = p.parent_path();
  if (!parent.empty() && !fs::is_directory(parent)) {
    throw ValidationError("output directory does not exist: " + parent.string(), "bad_path");
  }
  if (fs::is_directory(p)) throw ValidationError("output path is a directory: " + path, "bad_path");
}

bool use_color() {
  const char* nc = std::getenv("NO_COLOR");
  if (nc != nullptr && nc[0] != '\0') return false;
  return isatty(fileno(stdout)) != 0;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

json vector_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

json estimate_json(const Estimate& e) { return {{"estimate", e.value}, {"se", e.se}}; }

FormMatrix load_form(const std::string& net_path, const std::string& matrix_path) {
  if (!net_path.empty()) return assemble(io::load_network(net_path));
  return io::form_from_csv(io::read_text(matrix_path), matrix_path);
}

Function load_function_for(const std::string& path, std::size_t n) {
  Function f = io::load_function(path);
  if (static_cast<std::size_t>(f.size()) != n) {
    throw ValidationError(path + ": expected " + std::to_string(n) + " values, got " + std::to_string(f.size()),
                          "dimension_mismatch");
  }
  return f;
}

std::vector<double> parse_point_set(const std::string& text) {
  const Eigen::VectorXd v = io::parse_values(text, "--set");
  return std::vector<double>(v.data(), v.data() + v.size());
}

std::string counterexample_csv(const std::vector<CounterexampleRow>& rows) {
  std::string out = "level,energy,gamma_set,ratio\n";
  for (const auto& r : rows) {
    out += std::to_string(r.level) + "," + format_double(r.energy) + "," + format_double(r.gamma_set) + "," +
           (std::isnan(r.ratio) ? std::string() : format_double(r.ratio)) + "\n";
  }
  return out;
}

std::string counterexample_svg(const std::vector<CounterexampleRow>& rows) {
  svg::Series energy{"log2 E_n", "#1f77b4", {}, {}};
  svg::Series gamma{"log2 Gamma_n(S)", "#d62728", {}, {}};
  for (const auto& r : rows) {
    const double lv = static_cast<double>(r.level);
    energy.x.push_back(lv);
    energy.y.push_back(std::log2(r.energy));
    gamma.x.push_back(lv);
    gamma.y.push_back(std::log2(r.gamma_set));
  }
  return svg::line_plot("Energy of f(x)=x and its mass on S", "level n", "log2", {energy, gamma});
}

void print_error(const std::string& code, const std::string& message) {
  std::cerr << json{{"error", code}, {"message", message}}.dump() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dirichlet and resistance forms on finite networks"};
  app.require_subcommand(1);
  app.fallthrough(false);

  std::function<void()> action;
  std::vector<std::string> outputs;  // validated before the action runs

  std::string net_path, matrix_path, out_path, f_path, mu_path, seq_path, algebra_path, format = "csv";
  auto add_out = [&](CLI::App* c) { c->add_option("--out", out_path, "output file (default stdout)"); };
  auto add_format = [&](CLI::App* c, std::vector<std::string> allowed) {
    c->add_option("--format", format, "output format")->check(CLI::IsMember(std::move(allowed)));
  };

  // net validate|assemble
  auto* net = app.add_subcommand("net", "network checks and assembly");
  net->require_subcommand(1);
  auto* net_validate = net->add_subcommand("validate", "validate a network file");
  net_validate->add_option("--net", net_path, "network JSON")->required()->check(CLI::ExistingFile);
  net_validate->callback([&] {
    action = [&] {
      const Network n = io::load_network(net_path);
      const FormMatrix a = assemble(n);
      const auto report = is_markov(a);
      json j = {{"valid", true},
                {"vertices", n.size()},
                {"edges", n.edges().size()},
                {"markov", report.markov},
                {"conservative", is_conservative(a)},
                {"components", component_count(connected_components(a))}};
      Output{out_path}.write(dump(j));
    };
  });
  add_out(net_validate);
  auto* net_assemble = net->add_subcommand("assemble", "assemble the form matrix as CSV");
  net_assemble->add_option("--net", net_path, "network JSON")->required()->check(CLI::ExistingFile);
  add_out(net_assemble);
  net_assemble->callback([&] {
    action = [&] { Output{out_path}.write(io::matrix_csv(assemble(io::load_network(net_path)).matrix())); };
  });

  // trace
  std::vector<std::size_t> subset;
  auto* trace_cmd = app.add_subcommand("trace", "trace of the form onto a vertex subset");
  trace_cmd->add_option("--net", net_path, "network JSON")->required()->check(CLI::ExistingFile);
  trace_cmd->add_option("--subset", subset, "vertex indices, comma separated")->required()->delimiter(',');
  add_out(trace_cmd);
  add_format(trace_cmd, {"csv", "json"});
  trace_cmd->callback([&] {
    action = [&] {
      const TraceResult tr = trace(assemble(io::load_network(net_path)), subset);
      if (format == "csv") {
        Output{out_path}.write(io::matrix_csv(tr.traced.matrix()));
      } else {
        json rows = json::array();
        for (Eigen::Index i = 0; i < tr.traced.matrix().rows(); ++i) rows.push_back(vector_json(tr.traced.matrix().row(i).transpose()));
        Output{out_path}.write(dump({{"subset", tr.subset}, {"interior", tr.interior}, {"matrix", rows}}));
      }
    };
  });

  // resistance
  std::string pairs = "all";
  auto* res_cmd = app.add_subcommand("resistance", "effective resistance");
  res_cmd->add_option("--net", net_path, "network JSON")->required()->check(CLI::ExistingFile);
  res_cmd->add_option("--pairs", pairs, "'all' or x,y");
  add_out(res_cmd);
  add_format(res_cmd, {"csv", "json"});
  res_cmd->callback([&] {
    action = [&] {
      const FormMatrix a = assemble(io::load_network(net_path));
      if (pairs == "all") {
        const Eigen::MatrixXd r = resistance_matrix(a);
        if (format == "csv") {
          Output{out_path}.write(io::matrix_csv(r));
        } else {
          json rows = json::array();
          for (Eigen::Index i = 0; i < r.rows(); ++i) rows.push_back(vector_json(r.row(i).transpose()));
          Output{out_path}.write(dump({{"resistance", rows}}));
        }
        return;
      }
      const Eigen::VectorXd xy = io::parse_values(pairs, "--pairs");
      if (xy.size() != 2 || xy[0] < 0 || xy[1] < 0 || xy[0] != std::floor(xy[0]) || xy[1] != std::floor(xy[1])) {
        throw ValidationError("--pairs expects 'all' or two vertex indices x,y", "usage");
      }
      const auto x = static_cast<std::size_t>(xy[0]), y = static_cast<std::size_t>(xy[1]);
      const double r = effective_resistance(a, x, y);
      if (format == "csv") {
        Output{out_path}.write("x,y,resistance\n" + std::to_string(x) + "," + std::to_string(y) + "," + format_double(r) + "\n");
      } else {
        Output{out_path}.write(dump({{"x", x}, {"y", y}, {"resistance", r}}));
      }
    };
  });

  // decompose
  auto* dec_cmd = app.add_subcommand("decompose", "jump and killing parts of a Markov form");
  auto* dec_net = dec_cmd->add_option("--net", net_path, "network JSON")->check(CLI::ExistingFile);
  auto* dec_mat = dec_cmd->add_option("--matrix", matrix_path, "form matrix CSV")->check(CLI::ExistingFile);
  dec_net->excludes(dec_mat);
  dec_cmd->require_option(1);
  add_out(dec_cmd);
  dec_cmd->callback([&] {
    action = [&] {
      const auto d = decompose(load_form(net_path, matrix_path));
      json jumps = json::array();
      for (Eigen::Index x = 0; x < d.jump.rows(); ++x) {
        for (Eigen::Index y = 0; y < d.jump.cols(); ++y) {
          if (x != y && d.jump(x, y) != 0.0) jumps.push_back({{"x", x}, {"y", y}, {"value", d.jump(x, y)}});
        }
      }
      Output{out_path}.write(dump({{"J", jumps}, {"kappa", vector_json(d.kappa)}}));
    };
  });

  // seq build|check|profile
  auto* seq = app.add_subcommand("seq", "compatible sequences");
  seq->require_subcommand(1);
  std::string family;
  std::size_t levels = 0;
  double factor = kGasketFactor;
  bool calibrate = false;
  double tol = kCompatibilityTolerance;
  auto* seq_build = seq->add_subcommand("build", "build a dyadic interval or gasket sequence");
  seq_build->add_option("family", family, "dyadic or gasket")->required()->check(CLI::IsMember({"dyadic", "gasket"}));
  seq_build->add_option("--levels", levels, "top level index")->required();
  auto* factor_opt = seq_build->add_option("--factor", factor, "gasket conductance factor");
  seq_build->add_flag("--calibrate", calibrate, "solve for the gasket factor numerically")->excludes(factor_opt);
  add_out(seq_build);
  seq_build->callback([&] {
    action = [&] {
      CompatibleSequence s = family == "dyadic"
                                 ? build_dyadic_interval(levels)
                                 : build_sierpinski_gasket(levels, calibrate ? calibrate_gasket_factor() : factor);
      Output{out_path}.write(io::to_json(s).dump() + "\n");
    };
  });
  auto* seq_check = seq->add_subcommand("check", "check trace compatibility of consecutive levels");
  seq_check->add_option("--seq", seq_path, "sequence JSON")->required()->check(CLI::ExistingFile);
  seq_check->add_option("--tol", tol, "relative tolerance");
  add_out(seq_check);
  seq_check->callback([&] {
    action = [&] {
      const auto report = check_compatibility(io::load_sequence(seq_path), tol);
      json rows = json::array();
      for (std::size_t n = 0; n < report.deviation.size(); ++n) {
        rows.push_back({{"level", n}, {"deviation", report.deviation[n]}, {"relative", report.relative[n]}});
      }
      Output{out_path}.write(dump({{"compatible", report.compatible}, {"tolerance", report.tolerance}, {"levels", rows}}));
      if (!report.compatible) throw NumericalError("incompatible", "sequence fails the compatibility check");
    };
  });
  auto* seq_profile = seq->add_subcommand("profile", "energy of f restricted to every level");
  seq_profile->add_option("--seq", seq_path, "sequence JSON")->required()->check(CLI::ExistingFile);
  seq_profile->add_option("--f", f_path, "values of f on the top level")->required()->check(CLI::ExistingFile);
  add_out(seq_profile);
  seq_profile->callback([&] {
    action = [&] {
      const CompatibleSequence s = io::load_sequence(seq_path);
      const Function f = load_function_for(f_path, s.network(s.top_level()).size());
      const EnergyProfile p = energy_profile(s, f);
      if (p.warning) print_error("warning", *p.warning);
      std::string csv = "level,energy\n";
      for (std::size_t n = 0; n < p.energies.size(); ++n) csv += std::to_string(n) + "," + format_double(p.energies[n]) + "\n";
      Output{out_path}.write(csv);
    };
  });

  // gelfand embed|pushforward|isometry|closure
  auto* gel = app.add_subcommand("gelfand", "embeddings of finitely generated function algebras");
  gel->require_subcommand(1);
  double class_tol = 0.0, epsilon = 0.0;
  std::size_t threshold = kClosureThreshold;
  auto add_algebra = [&](CLI::App* c) {
    c->add_option("--algebra", algebra_path, "algebra JSON")->required()->check(CLI::ExistingFile);
    c->add_option("--tolerance", class_tol, "max-norm tolerance for merging points");
    add_out(c);
  };
  auto* gel_embed = gel->add_subcommand("embed", "images and point classes");
  add_algebra(gel_embed);
  gel_embed->callback([&] {
    action = [&] {
      const AlgebraSpec spec = io::load_algebra(algebra_path);
      const auto emb = embed(spec, class_tol);
      const auto nv = vanishes_nowhere(spec);
      json images = json::array();
      for (Eigen::Index i = 0; i < emb.images.rows(); ++i) images.push_back(vector_json(emb.images.row(i).transpose()));
      Output{out_path}.write(dump({{"separated", emb.separated},
                                   {"classes", emb.classes},
                                   {"class_of", emb.class_of},
                                   {"images", images},
                                   {"vanishes_nowhere", nv.vanishes_nowhere},
                                   {"zero_points", nv.witnesses}}));
    };
  });
  auto* gel_push = gel->add_subcommand("pushforward", "image of an atomic measure on the classes");
  add_algebra(gel_push);
  gel_push->add_option("--mu", mu_path, "measure JSON")->required()->check(CLI::ExistingFile);
  gel_push->callback([&] {
    action = [&] {
      const auto emb = embed(io::load_algebra(algebra_path), class_tol);
      const auto pm = pushforward(io::load_measure(mu_path), emb);
      Output{out_path}.write(dump({{"atoms", vector_json(pm.atoms)}, {"total", pm.total}}));
    };
  });
  auto* gel_iso = gel->add_subcommand("isometry", "L2 norms of f and its class function");
  add_algebra(gel_iso);
  gel_iso->add_option("--mu", mu_path, "measure JSON")->required()->check(CLI::ExistingFile);
  gel_iso->add_option("--f", f_path, "class-constant function values")->required()->check(CLI::ExistingFile);
  gel_iso->callback([&] {
    action = [&] {
      const AlgebraSpec spec = io::load_algebra(algebra_path);
      const auto emb = embed(spec, class_tol);
      const auto chk = l2_isometry_check(load_function_for(f_path, spec.size()), io::load_measure(mu_path), emb);
      Output{out_path}.write(dump({{"lhs", chk.lhs}, {"rhs", chk.rhs}, {"difference", chk.difference}}));
    };
  });
  auto* gel_closure = gel->add_subcommand("closure", "flag accumulation points of the image");
  gel_closure->add_option("--algebra", algebra_path, "algebra JSON")->required()->check(CLI::ExistingFile);
  gel_closure->add_option("--epsilon", epsilon, "ball radius")->required();
  gel_closure->add_option("--threshold", threshold, "distinct images per ball to flag");
  add_out(gel_closure);
  gel_closure->callback([&] {
    action = [&] {
      json pts = json::array();
      for (const auto& p : spectrum_closure_estimate(io::load_algebra(algebra_path), epsilon, threshold)) {
        json j = {{"center", vector_json(p.center)}, {"distinct_within_eps", p.distinct_within_eps}, {"flagged", p.flagged}};
        if (p.flagged) j["accumulation"] = vector_json(p.accumulation);
        pts.push_back(j);
      }
      Output{out_path}.write(dump({{"points", pts}}));
    };
  });

  // gamma
  auto* gamma_cmd = app.add_subcommand("gamma", "energy measure of f");
  gamma_cmd->add_option("--form", net_path, "network JSON")->required()->check(CLI::ExistingFile);
  gamma_cmd->add_option("--f", f_path, "function values")->required()->check(CLI::ExistingFile);
  add_out(gamma_cmd);
  add_format(gamma_cmd, {"csv", "json"});
  gamma_cmd->callback([&] {
    action = [&] {
      const FormMatrix a = assemble(io::load_network(net_path));
      const auto g = energy_measure(a, load_function_for(f_path, a.size()));
      if (format == "csv") {
        std::string csv = "vertex,mass\n";
        for (Eigen::Index x = 0; x < g.masses.size(); ++x) csv += std::to_string(x) + "," + format_double(g.masses[x]) + "\n";
        Output{out_path}.write(csv);
      } else {
        Output{out_path}.write(dump({{"masses", vector_json(g.masses)}, {"total", g.total}, {"identity_gap", g.identity_gap}}));
      }
    };
  });

  // demo counterexample
  auto* demo = app.add_subcommand("demo", "worked demonstrations");
  demo->require_subcommand(1);
  std::size_t min_level = 4;
  std::string set_text = "0,0.5,1", svg_path;
  levels = 12;
  auto* demo_ce = demo->add_subcommand("counterexample", "energy of f(x)=x versus its mass on a fixed finite set");
  demo_ce->add_option("--levels", levels, "top level (at most 12)");
  demo_ce->add_option("--min-level", min_level, "first level");
  demo_ce->add_option("--set", set_text, "dyadic points of the first level, comma separated");
  demo_ce->add_option("--svg", svg_path, "also write the decay plot here");
  add_out(demo_ce);
  demo_ce->callback([&] {
    outputs.push_back(svg_path);
    action = [&] {
      const auto rows = counterexample_demo(min_level, levels, parse_point_set(set_text));
      Output{out_path}.write(counterexample_csv(rows));
      if (!svg_path.empty()) io::write_text(svg_path, counterexample_svg(rows));
    };
  });

  // sim hit|commute|occupy
  auto* sim = app.add_subcommand("sim", "Monte Carlo for the associated Markov process");
  sim->require_subcommand(1);
  SimOptions opt;
  std::size_t a_vertex = 0, b_vertex = 0, x0 = 0;
  double horizon = 10.0;
  auto add_sim = [&](CLI::App* c) {
    c->add_option("--net", net_path, "network JSON")->required()->check(CLI::ExistingFile);
    c->add_option("--mu", mu_path, "speed measure JSON")->required()->check(CLI::ExistingFile);
    c->add_option("--seed", opt.seed, "seed");
    c->add_option("--n", opt.n_trajectories, "trajectories");
    c->add_option("--threads", opt.threads, "worker threads (0 = all cores)");
    add_out(c);
  };
  auto generator = [&] { return build_generator(assemble(io::load_network(net_path)), io::load_measure(mu_path)); };
  auto sim_json = [&](const char* query, json fields) {
    fields["query"] = query;
    fields["seed"] = opt.seed;
    fields["n"] = opt.n_trajectories;
    return fields;
  };
  auto* sim_hit = sim->add_subcommand("hit", "probability of reaching a before b from x0");
  add_sim(sim_hit);
  sim_hit->add_option("--a", a_vertex, "target vertex")->required();
  sim_hit->add_option("--b", b_vertex, "competing vertex")->required();
  sim_hit->add_option("--x0", x0, "start vertex")->required();
  sim_hit->callback([&] {
    action = [&] {
      const Estimate e = hitting_probability(generator(), a_vertex, b_vertex, x0, opt);
      Output{out_path}.write(dump(sim_json("hit", {{"a", a_vertex}, {"b", b_vertex}, {"x0", x0}, {"result", estimate_json(e)}})));
    };
  });
  auto* sim_commute = sim->add_subcommand("commute", "expected commute time between x and y");
  add_sim(sim_commute);
  sim_commute->add_option("--x", a_vertex, "first vertex")->required();
  sim_commute->add_option("--y", b_vertex, "second vertex")->required();
  sim_commute->callback([&] {
    action = [&] {
      const Estimate e = commute_time(generator(), a_vertex, b_vertex, opt);
      Output{out_path}.write(dump(sim_json("commute", {{"x", a_vertex}, {"y", b_vertex}, {"result", estimate_json(e)}})));
    };
  });
  auto* sim_occupy = sim->add_subcommand("occupy", "occupation fractions against the stationary law");
  add_sim(sim_occupy);
  sim_occupy->add_option("--horizon", horizon, "time horizon");
  sim_occupy->callback([&] {
    action = [&] {
      const auto r = occupation_check(generator(), horizon, opt);
      json occ = json::array();
      for (const auto& e : r.occupation) occ.push_back(estimate_json(e));
      Output{out_path}.write(dump(sim_json("occupy", {{"horizon", horizon},
                                                       {"occupation", occ},
                                                       {"target", vector_json(r.target)},
                                                       {"distance", r.distance},
                                                       {"band", r.band}})));
    };
  });

  // reproduce-all
  acceptance::Config cfg;
  std::string out_dir;
  auto* repro = app.add_subcommand("reproduce-all", "run every acceptance criterion");
  repro->add_option("--out", out_dir, "directory for the pass/fail table");
  repro->add_flag("--quick", cfg.quick, "reduced sizes and trajectory counts");
  repro->add_option("--gasket-factor", cfg.gasket_factor, "gasket conductance factor");
  repro->add_option("--seed", cfg.seed, "base seed");
  repro->add_option("--threads", cfg.threads, "worker threads (0 = all cores)");
  repro->callback([&] {
    action = [&] {
      if (!out_dir.empty()) fs::create_directories(out_dir);
      const bool color = use_color();
      const auto results = acceptance::run_all(cfg, [&](const acceptance::CriterionResult& r) {
        const char* tag = r.passed ? (color ? "\033[32mPASS\033[0m" : "PASS") : (color ? "\033[31mFAIL\033[0m" : "FAIL");
        std::printf("%s  %d. %s: %s\n", tag, r.id, r.name.c_str(), r.detail.c_str());
        std::fflush(stdout);
      });
      std::size_t failed = 0;
      std::string table = "| id | criterion | result | detail |\n|---|---|---|---|\n";
      for (const auto& r : results) {
        if (!r.passed) ++failed;
        table += "| " + std::to_string(r.id) + " | " + r.name + " | " + (r.passed ? "PASS" : "FAIL") + " | " + r.detail + " |\n";
      }
      if (!out_dir.empty()) io::write_text((fs::path(out_dir) / "acceptance.md").string(), table);
      if (failed) {
        throw NumericalError("acceptance_failed", std::to_string(failed) + " of " + std::to_string(results.size()) +
                                                      " criteria failed");
      }
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    print_error("usage", e.what());
    return 1;
  }

  try {
    outputs.push_back(out_path);
    for (const auto& p : outputs) check_output_path(p);
    if (action) action();
  } catch (const Error& e) {
    print_error(e.code(), e.what());
    return e.category() == Error::Category::Validation ? 1 : 2;
  } catch (const std::exception& e) {
    print_error("internal", e.what());
    return 2;
  }
  return 0;
}

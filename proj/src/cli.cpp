#include "lipstab/cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"

#include "lipstab/convex.hpp"
#include "lipstab/csv.hpp"
#include "lipstab/demo.hpp"
#include "lipstab/document.hpp"
#include "lipstab/errors.hpp"
#include "lipstab/estimator.hpp"
#include "lipstab/projection.hpp"
#include "lipstab/stability.hpp"

namespace lipstab {

namespace {

struct Options {
  std::string system;
  std::string anchor;
  std::string point;
  std::string perturbation;
  std::string out;
  std::uint64_t seed = 0;
  double tol = kFeasibilityTol;
  std::string radii = "0.1,0.01,0.001";
  std::size_t samples = 0;
  double eps = 0.0;
  int n_rows = 2;
  int n = 2;
  int m = 5;
  std::string partition = "doc";
  std::string mode = "joint";
  std::size_t random_partitions = 1;
  std::string demo;
};

std::vector<double> parse_list(const std::string& text, const std::string& what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto first = item.find_first_not_of(" \t");
    const auto last = item.find_last_not_of(" \t");
    if (first == std::string::npos) throw ValidationError(what + ": empty entry in '" + text + "'");
    item = item.substr(first, last - first + 1);
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != item.size()) throw ValidationError(what + ": '" + item + "' is not a number");
    out.push_back(v);
  }
  return out;
}

Vec parse_vec(const std::string& text, int dimension, const std::string& what) {
  if (text.empty()) throw ValidationError("missing --" + what);
  const auto values = parse_list(text, what);
  if (static_cast<int>(values.size()) != dimension) {
    throw ValidationError(what + " has " + std::to_string(values.size()) + " entries, expected " +
                          std::to_string(dimension));
  }
  return Eigen::Map<const Vec>(values.data(), dimension);
}

std::string bool_text(bool b) { return b ? "true" : "false"; }

class Command {
 public:
  Command(const Options& opt, std::ostream& out, std::istream& in) : opt_(opt), out_(out), in_(in) {}

  SystemDocument document() {
    if (!opt_.system.empty()) return load_document(opt_.system);
    std::ostringstream text;
    text << in_.rdbuf();
    return parse_document(text.str());
  }

  // CSV goes to --out when given; otherwise it is skipped.
  template <class Fn>
  void csv(const std::vector<std::string>& header, Fn&& rows) {
    if (opt_.out.empty()) return;
    std::ofstream file(opt_.out, std::ios::binary);
    if (!file) throw ValidationError("cannot write '" + opt_.out + "'");
    CsvWriter writer(file, header);
    rows(writer);
  }

  LinearizeConfig linearize_config() const {
    LinearizeConfig cfg;
    if (opt_.samples > 0) cfg.budget = opt_.samples;
    cfg.seed = opt_.seed;
    return cfg;
  }

  SamplingConfig sampling_config() const {
    SamplingConfig cfg;
    cfg.radii = parse_list(opt_.radii, "radius-ladder");
    if (opt_.samples > 0) cfg.samples_per_radius = opt_.samples;
    cfg.seed = opt_.seed;
    if (opt_.mode == "parameter") {
      cfg.mode = SamplingMode::ParameterOnly;
    } else if (opt_.mode != "joint") {
      throw ValidationError("--mode must be joint or parameter");
    }
    check(cfg);
    return cfg;
  }

  BlockPartition chosen_partition(const ParsedSystem& model) const {
    if (opt_.partition == "min") return BlockPartition::minimum(*model.linear);
    if (opt_.partition == "max") return BlockPartition::maximum(*model.linear);
    if (opt_.partition == "doc") return model.partition;
    throw ValidationError("--partition must be min, max or doc");
  }

  static const LinearSystem& linear(const ParsedSystem& model, const char* command) {
    if (!model.linear) throw ValidationError(std::string(command) + " needs a linear system");
    return *model.linear;
  }

  void notes(const std::vector<std::string>& list) {
    for (const auto& n : list) out_ << "note: " << n << '\n';
  }

  int ssc() {
    const ParsedSystem model = to_model(document());
    LinearSystem system;
    if (model.convex) {
      const Vec anchor = opt_.anchor.empty() ? Vec::Zero(model.convex->dimension)
                                             : parse_vec(opt_.anchor, model.convex->dimension, "anchor");
      system = linearize(*model.convex, linearize_config(), anchor).system;
      out_ << "checked on " << system.size() << " sampled cuts\n";
    } else {
      system = *model.linear;
    }
    const SSCReport r = check_ssc(system, opt_.tol);
    out_ << "margin: " << format_double(r.margin) << '\n';
    if (r.slater_point) out_ << "slater point: " << format_vector(*r.slater_point) << '\n';
    csv({"holds", "consistent", "margin", "hull_gap", "lp_verdict", "hull_verdict", "slater_point"},
        [&](CsvWriter& w) {
          w.row({bool_text(r.holds), bool_text(r.consistent), format_double(r.margin), format_double(r.hull_gap),
                 bool_text(r.lp_verdict), bool_text(r.hull_verdict),
                 r.slater_point ? format_vector(*r.slater_point) : ""});
        });
    out_ << "ssc=" << bool_text(r.holds) << " hull_gap=" << format_double(r.hull_gap) << '\n';
    return kExitOk;
  }

  int lip() {
    const ParsedSystem model = to_model(document());
    if (model.convex) {
      const Vec anchor = parse_vec(opt_.anchor, model.convex->dimension, "anchor");
      const ConvexLipReport r = lip_bound_convex(*model.convex, anchor, linearize_config(), opt_.tol);
      notes(r.report.notes);
      csv({"step", "bound"}, [&](CsvWriter& w) {
        for (std::size_t i = 0; i < r.history.size(); ++i) w.row({std::to_string(i), format_double(r.history[i])});
      });
      out_ << "lip=" << format_double(r.report.bound) << " regime=" << to_string(r.report.regime);
      if (!r.converged) {
        out_ << " converged=false\n";
        return kExitNonConvergent;
      }
      out_ << '\n';
      return kExitOk;
    }
    const LinearSystem& system = *model.linear;
    const Vec anchor = parse_vec(opt_.anchor, system.dimension(), "anchor");
    const LipReport r = lip_bound(system, anchor, opt_.tol);
    notes(r.notes);
    std::string support;
    for (auto t : r.slice_weights.support(0.0)) support += (support.empty() ? "" : ";") + system.row(t).label;
    if (r.minimizer) out_ << "minimizer: " << format_vector(*r.minimizer) << '\n';
    csv({"bound", "regime", "minimizer", "support"}, [&](CsvWriter& w) {
      w.row({format_double(r.bound), std::string(to_string(r.regime)),
             r.minimizer ? format_vector(*r.minimizer) : "", support});
    });
    out_ << "lip=" << format_double(r.bound) << " regime=" << to_string(r.regime) << '\n';
    return kExitOk;
  }

  int dist() {
    const ParsedSystem model = to_model(document());
    if (model.convex) {
      const Vec x = parse_vec(opt_.point, model.convex->dimension, "point");
      const Vec p = opt_.perturbation.empty()
                        ? Vec::Zero(static_cast<Eigen::Index>(model.convex->functions.size()))
                        : parse_vec(opt_.perturbation, static_cast<int>(model.convex->functions.size()), "p");
      const ConvexDistance d = distance_convex(*model.convex, p, x);
      out_ << "cuts: " << d.cuts << '\n';
      csv({"method", "distance", "point"}, [&](CsvWriter& w) {
        w.row({"cutting-planes", format_double(d.distance), format_vector(d.point)});
      });
      out_ << "dist=" << format_double(d.distance) << '\n';
      return kExitOk;
    }
    const LinearSystem& system = *model.linear;
    const Vec x = parse_vec(opt_.point, system.dimension(), "point");
    const BlockPartition partition = chosen_partition(model);
    Perturbation p = Perturbation::zero(partition.size());
    if (!opt_.perturbation.empty()) p.values = parse_vec(opt_.perturbation, static_cast<int>(partition.size()), "p");
    const double formula = distance_formula(system, partition, p, x, opt_.tol);
    const Projection proj = project_polyhedron(x, perturbed_system(system, partition, p));
    out_ << "projection: " << format_double(proj.distance) << '\n';
    csv({"method", "distance"}, [&](CsvWriter& w) {
      w.row({"formula", format_double(formula)});
      w.row({"projection", format_double(proj.distance)});
    });
    out_ << "dist=" << format_double(formula) << '\n';
    return kExitOk;
  }

  int codnorm() {
    const ParsedSystem model = to_model(document());
    const LinearSystem& system = linear(model, "codnorm");
    const Vec anchor = parse_vec(opt_.anchor, system.dimension(), "anchor");
    const CoderivNormResult r = coderivative_norm_detailed(system, chosen_partition(model), anchor, opt_.tol);
    const double lip = lip_bound(system, anchor, opt_.tol).bound;
    out_ << "lip: " << format_double(lip) << '\n';
    csv({"codnorm", "lip", "cone_weights"}, [&](CsvWriter& w) {
      w.row({format_double(r.value), format_double(lip), format_vector(r.cone_weights)});
    });
    out_ << "codnorm=" << format_double(r.value) << '\n';
    return kExitOk;
  }

  int eps_active_cmd() {
    const ParsedSystem model = to_model(document());
    const LinearSystem& system = linear(model, "eps-active");
    const Vec anchor = parse_vec(opt_.anchor, system.dimension(), "anchor");
    const EpsActiveResult r = eps_active(system, anchor, opt_.eps, opt_.tol);
    notes(r.report.notes);
    std::string labels;
    for (const auto& l : r.labels) labels += (labels.empty() ? "" : ";") + l;
    out_ << "active: {" << labels << "}\n";
    out_ << "full bound: " << format_double(r.full_bound) << '\n';
    csv({"index", "label", "residual"}, [&](CsvWriter& w) {
      for (auto t : r.indices) {
        w.row({std::to_string(t), system.row(t).label, format_double(system.residual(t, anchor))});
      }
    });
    out_ << "active=" << r.indices.size() << " lip=" << format_double(r.report.bound)
         << " regime=" << to_string(r.report.regime) << " matches_full=" << bool_text(r.matches_full) << '\n';
    return kExitOk;
  }

  int linearize_cmd() {
    const ParsedSystem model = to_model(document());
    if (!model.convex) throw ValidationError("linearize needs a convex system");
    const Vec anchor = parse_vec(opt_.anchor, model.convex->dimension, "anchor");
    const LinearizedSystem lin = linearize(*model.convex, linearize_config(), anchor);
    const std::string text = serialize(to_document(lin.system, lin.partition));
    if (opt_.out.empty()) {
      out_ << text << '\n';
      return kExitOk;
    }
    std::ofstream file(opt_.out, std::ios::binary);
    if (!file) throw ValidationError("cannot write '" + opt_.out + "'");
    file << text << '\n';
    out_ << "rows=" << lin.system.size() << " blocks=" << lin.partition.size() << '\n';
    return kExitOk;
  }

  int estimate() {
    const ParsedSystem model = to_model(document());
    const LinearSystem& system = linear(model, "estimate");
    const Vec anchor = parse_vec(opt_.anchor, system.dimension(), "anchor");
    const SamplingConfig cfg = sampling_config();
    const EstimateReport r = empirical_lip(system, chosen_partition(model), anchor, cfg);
    notes(r.notes);
    std::string note_text;
    for (const auto& n : r.notes) note_text += (note_text.empty() ? "" : "; ") + n;
    for (const auto& s : r.radii) {
      out_ << "radius " << format_double(s.radius) << ": max quotient " << format_double(s.max_quotient) << '\n';
    }
    csv({"radius", "samples", "zero_over_zero", "max_quotient", "notes"}, [&](CsvWriter& w) {
      std::vector<const RadiusSummary*> order;
      for (const auto& s : r.radii) order.push_back(&s);
      std::sort(order.begin(), order.end(), [](auto* a, auto* b) { return a->radius < b->radius; });
      for (const auto* s : order) {
        w.row({format_double(s->radius), std::to_string(s->samples), std::to_string(s->zero_over_zero),
               format_double(s->max_quotient), note_text});
      }
    });
    out_ << "estimate=" << format_double(r.estimate) << '\n';
    return kExitOk;
  }

  int compare() {
    const ParsedSystem model = to_model(document());
    const LinearSystem& system = linear(model, "compare-partitions");
    const Vec anchor = parse_vec(opt_.anchor, system.dimension(), "anchor");
    const SamplingConfig cfg = sampling_config();
    std::vector<BlockPartition> partitions;
    const std::size_t blocks = std::min<std::size_t>(2, system.size());
    for (std::size_t i = 0; i < opt_.random_partitions; ++i) {
      partitions.push_back(random_partition(system, blocks, opt_.seed + i));
    }
    const PartitionComparison r = partition_compare(system, partitions, anchor, cfg);
    notes(r.notes);
    for (const auto& e : r.estimates) {
      out_ << e.label << " (" << e.partition.size() << " blocks): " << format_double(e.report.estimate) << '\n';
    }
    csv({"partition", "blocks", "radius", "samples", "zero_over_zero", "max_quotient", "lip"}, [&](CsvWriter& w) {
      for (const auto& e : r.estimates) {
        std::vector<const RadiusSummary*> order;
        for (const auto& s : e.report.radii) order.push_back(&s);
        std::sort(order.begin(), order.end(), [](auto* a, auto* b) { return a->radius < b->radius; });
        for (const auto* s : order) {
          w.row({e.label, std::to_string(e.partition.size()), format_double(s->radius), std::to_string(s->samples),
                 std::to_string(s->zero_over_zero), format_double(s->max_quotient), format_double(r.lip)});
        }
      }
    });
    out_ << "lip=" << format_double(r.lip) << " ordered=" << bool_text(r.ordered)
         << " converged=" << bool_text(r.converged) << '\n';
    return kExitOk;
  }

  int demo() {
    SystemDocument doc;
    if (opt_.demo == "paper-example") {
      doc = demo_paper_example(opt_.n_rows);
    } else if (opt_.demo == "convex-square") {
      doc = demo_convex_square();
    } else if (opt_.demo == "convex-square-shifted") {
      doc = demo_convex_square_shifted();
    } else if (opt_.demo == "random") {
      doc = demo_random(opt_.n, opt_.m, opt_.seed);
    } else {
      throw ValidationError("unknown demo '" + opt_.demo + "'");
    }
    const std::string text = serialize(doc);
    if (!opt_.out.empty()) {
      std::ofstream file(opt_.out, std::ios::binary);
      if (!file) throw ValidationError("cannot write '" + opt_.out + "'");
      file << text << '\n';
    }
    out_ << text << '\n';
    return kExitOk;
  }

 private:
  const Options& opt_;
  std::ostream& out_;
  std::istream& in_;
};

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err, std::istream& in) {
  CLI::App app{"Lipschitz stability of block-perturbed linear and convex inequality systems", "lipstab"};
  app.require_subcommand(1);
  Options opt;

  auto add_system = [&](CLI::App* sub) {
    sub->add_option("--system", opt.system, "System document (JSON); stdin when absent");
  };
  auto add_common = [&](CLI::App* sub) {
    add_system(sub);
    sub->add_option("--anchor", opt.anchor, "Anchor point x1,...,xn");
    sub->add_option("--out", opt.out, "CSV report path");
    sub->add_option("--tol", opt.tol, "Feasibility tolerance");
  };
  auto add_sampling = [&](CLI::App* sub) {
    sub->add_option("--seed", opt.seed, "RNG seed");
    sub->add_option("--samples", opt.samples, "Samples per radius (cut budget per function for convex systems)");
  };

  auto* ssc = app.add_subcommand("ssc", "Check the strong Slater condition");
  add_common(ssc);
  add_sampling(ssc);
  auto* lip = app.add_subcommand("lip", "Exact Lipschitzian bound at the anchor");
  add_common(lip);
  add_sampling(lip);
  auto* dist = app.add_subcommand("dist", "Distance to the perturbed feasible set");
  add_common(dist);
  dist->add_option("--point", opt.point, "Point x1,...,xn")->required();
  dist->add_option("--p", opt.perturbation, "Perturbation, one value per block (default 0)");
  dist->add_option("--partition", opt.partition, "min, max or doc");
  auto* codnorm = app.add_subcommand("codnorm", "Coderivative norm at the anchor");
  add_common(codnorm);
  codnorm->add_option("--partition", opt.partition, "min, max or doc");
  auto* eps = app.add_subcommand("eps-active", "Bound restricted to eps-active rows");
  add_common(eps);
  eps->add_option("--eps", opt.eps, "Activity threshold")->required();
  auto* lin = app.add_subcommand("linearize", "Cut linearization of a convex system");
  add_common(lin);
  add_sampling(lin);
  auto* est = app.add_subcommand("estimate", "Sampled Lipschitz modulus");
  add_common(est);
  add_sampling(est);
  est->add_option("--radius-ladder", opt.radii, "Decreasing radii r1,r2,...");
  est->add_option("--partition", opt.partition, "min, max or doc");
  est->add_option("--mode", opt.mode, "joint or parameter");
  auto* cmp = app.add_subcommand("compare-partitions", "Sampled moduli for min, random and max partitions");
  add_common(cmp);
  add_sampling(cmp);
  cmp->add_option("--radius-ladder", opt.radii, "Decreasing radii r1,r2,...");
  cmp->add_option("--random", opt.random_partitions, "Number of random 2-block partitions");
  cmp->add_option("--mode", opt.mode, "joint or parameter");
  auto* demo = app.add_subcommand("demo", "Emit a demo system document");
  demo->add_option("name", opt.demo, "paper-example, convex-square, convex-square-shifted or random")->required();
  demo->add_option("--N", opt.n_rows, "paper-example: number of rows t >= 1");
  demo->add_option("--n", opt.n, "random: dimension");
  demo->add_option("--m", opt.m, "random: number of rows");
  demo->add_option("--seed", opt.seed, "random: seed");
  demo->add_option("--out", opt.out, "Also write the document here");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    app.exit(e, out, err);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitInvalid;
  }

  Command cmd(opt, out, in);
  try {
    if (ssc->parsed()) return cmd.ssc();
    if (lip->parsed()) return cmd.lip();
    if (dist->parsed()) return cmd.dist();
    if (codnorm->parsed()) return cmd.codnorm();
    if (eps->parsed()) return cmd.eps_active_cmd();
    if (lin->parsed()) return cmd.linearize_cmd();
    if (est->parsed()) return cmd.estimate();
    if (cmp->parsed()) return cmd.compare();
    if (demo->parsed()) return cmd.demo();
  } catch (const SchemaError& e) {
    err << "schema error: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const ValidationError& e) {
    err << "validation error: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const InfeasibleAnchor& e) {
    err << "infeasible anchor: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const SSCViolated& e) {
    err << "strong Slater condition violated: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const NonConvergent& e) {
    err << "not converged: " << e.what() << '\n';
    return kExitNonConvergent;
  } catch (const OrderingViolation& e) {
    err << "ordering violation: " << e.what() << '\n' << e.samples() << '\n';
    return kExitFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitFailure;
}

}  // namespace lipstab

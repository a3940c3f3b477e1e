#include "cli.hpp"

#include <array>
#include <chrono>
#include <ctime>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "cbp/bootstrap.hpp"
#include "cbp/error.hpp"
#include "cbp/estimators.hpp"
#include "cbp/fit.hpp"
#include "cbp/identifiability.hpp"
#include "cbp/model_json.hpp"
#include "cbp/numeric_format.hpp"
#include "cbp/simulate.hpp"
#include "cbp/trajectory_io.hpp"
#include "cbp/tvd.hpp"

namespace cbp::cli {

namespace {

using nlohmann::json;

// Reads `--config` files: nested objects name subcommands, leaves name options.
class JsonConfig : public CLI::Config {
 public:
  std::string to_config(const CLI::App*, bool, bool, std::string) const override { return "{}"; }

  std::vector<CLI::ConfigItem> from_config(std::istream& in) const override {
    json root;
    try {
      in >> root;
    } catch (const json::exception& e) {
      throw CLI::ConversionError("config is not valid JSON: " + std::string(e.what()));
    }
    if (!root.is_object()) throw CLI::ConversionError("config root must be an object");
    std::vector<CLI::ConfigItem> items;
    walk(root, {}, items);
    return items;
  }

 private:
  static std::string scalar(const json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    if (v.is_number_float()) return format_real(v.get<double>());
    if (v.is_number()) return v.dump();
    throw CLI::ConversionError("config values must be scalars or arrays of scalars");
  }

  static void walk(const json& node, std::vector<std::string> parents, std::vector<CLI::ConfigItem>& items) {
    for (const auto& [key, value] : node.items()) {
      if (value.is_object()) {
        auto sub = parents;
        sub.push_back(key);
        walk(value, sub, items);
        continue;
      }
      CLI::ConfigItem item;
      item.parents = parents;
      item.name = key;
      if (value.is_array()) {
        for (const auto& v : value) item.inputs.push_back(scalar(v));
      } else {
        item.inputs.push_back(scalar(value));
      }
      items.push_back(std::move(item));
    }
  }
};

struct Globals {
  std::uint64_t seed = 0;
  unsigned threads = 0;
};

// Opens `path` for writing, or returns the fallback stream for "-".
class Output {
 public:
  Output(const std::string& path, std::ostream& fallback) {
    if (path.empty() || path == "-") {
      stream_ = &fallback;
      return;
    }
    file_.open(path);
    if (!file_) fail(ErrorCode::Io, "cannot open '" + path + "' for writing");
    stream_ = &file_;
  }
  std::ostream& operator*() { return *stream_; }

 private:
  std::ofstream file_;
  std::ostream* stream_ = nullptr;
};

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::vector<double> parse_reals(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_real(item));
  require(!out.empty(), ErrorCode::InvalidArgument, "expected a comma-separated list of numbers");
  return out;
}

std::vector<double> params_from(const std::string& list, const std::string& fit_path) {
  if (!list.empty()) return parse_reals(list);
  require(!fit_path.empty(), ErrorCode::InvalidArgument, "give --params or --fit");
  const json fit = read_json_file(fit_path);
  const json& params = json_schema::object(json_schema::field(fit, "", "params"), "/params");
  const json& order = json_schema::field(fit, "", "param_order");
  std::vector<double> out;
  for (std::size_t i = 0; i < order.size(); ++i) {
    const std::string name = json_schema::string(order[i], "/param_order/" + std::to_string(i));
    out.push_back(json_schema::number(json_schema::field(params, "/params", name), "/params/" + name));
  }
  return out;
}

void write_json(std::ostream& out, const json& j) { out << j.dump(2) << "\n"; }

json bound_to_json(const BoundReport& r) {
  json inputs = json::object();
  for (const auto& [k, v] : r.inputs) inputs[k] = format_real(v);
  json j = {{"bound_name", r.bound_name}, {"bound_value", format_real(r.bound_value)}, {"inputs", inputs}};
  j["exact_tvd"] = r.exact_tvd ? json(format_real(*r.exact_tvd)) : json(nullptr);
  return j;
}

json moments_to_json(const MomentSummary& m) {
  return {{"mean", format_real(m.mean)},
          {"variance", format_real(m.variance)},
          {"third_central", format_real(m.third_central)},
          {"third_abs_central", format_real(m.third_abs_central)},
          {"fourth_central", format_real(m.fourth_central)},
          {"lattice", m.lattice}};
}

// ---------------------------------------------------------------------------

void add_simulate(CLI::App& app, const Globals& g, std::ostream& out) {
  auto* cmd = app.add_subcommand("simulate", "Simulate a trajectory from a model");
  auto model = std::make_shared<std::string>();
  auto n = std::make_shared<std::int64_t>(0);
  auto path = std::make_shared<std::string>("-");
  auto progenitors = std::make_shared<bool>(false);
  auto pop_cap = std::make_shared<std::int64_t>(kDefaultPopCap);
  cmd->add_option("--model", *model, "Model JSON")->required();
  cmd->add_option("--n", *n, "Generations")->required()->check(CLI::NonNegativeNumber);
  cmd->add_option("--out", *path, "Trajectory CSV (- for stdout)");
  cmd->add_flag("--progenitors", *progenitors, "Record progenitor counts");
  cmd->add_option("--pop-cap", *pop_cap, "Stop before the population exceeds this size")->check(CLI::PositiveNumber);
  cmd->callback([=, &g, &out] {
    const CbpModel m = load_model(*model);
    const Trajectory t = simulate_trajectory(m, *n, g.seed, *progenitors, *pop_cap);
    if (*path == "-") {
      write_trajectory_csv(out, t);
    } else {
      save_trajectory(t, *path, &m, utc_timestamp());
    }
  });
}

void add_estimate(CLI::App& app, std::ostream& out) {
  auto* cmd = app.add_subcommand("estimate", "Moment-type estimators from a trajectory");
  struct Opts {
    std::string traj, model, path = "-";
    std::optional<double> m, g, alpha, sigma2, q;
  };
  auto o = std::make_shared<Opts>();
  cmd->add_option("--traj", o->traj, "Trajectory CSV")->required();
  cmd->add_option("--model", o->model, "Model JSON supplying a known control");
  cmd->add_option("--m", o->m, "Known offspring mean");
  cmd->add_option("--g", o->g, "Known mean growth g = m alpha");
  cmd->add_option("--alpha", o->alpha, "Known control mean slope");
  cmd->add_option("--sigma2", o->sigma2, "Known offspring variance (derives alpha and beta)");
  cmd->add_option("--drift-q", o->q, "Exponent q of a Poisson drift control (needs --m)");
  cmd->add_option("--out", o->path, "Estimates CSV (- for stdout)");
  cmd->callback([o, &out] {
    const Trajectory t = load_trajectory(o->traj);
    std::vector<std::pair<std::string, EstimateReport>> rows;
    auto add = [&rows](const std::string& scope, const EstimateReport& r) {
      rows.emplace_back(scope.empty() ? r.name : scope + ":" + r.name, r);
    };
    add("", bgwp_mean(t));
    const LinearGrowthEstimates lin = linear_growth_estimates(t, o->g);
    add("", lin.g_hat);
    add("", lin.h);
    if (o->m && o->sigma2) {
      const DerivedControlParams d = derived_control_params(o->g.value_or(lin.g_hat.value), lin.h.value, *o->m, *o->sigma2);
      rows.emplace_back("derived:alpha_hat", EstimateReport{"alpha_hat", d.alpha_hat, lin.h.n_terms, {}, false});
      rows.emplace_back("derived:beta_hat", EstimateReport{"beta_hat", d.beta_hat, lin.h.n_terms, {}, false});
    }
    if (!o->model.empty()) {
      const KnownControlEstimates k = known_control_estimates(t, load_model(o->model).control, o->m);
      add("known-control", k.m_hat);
      add("known-control", k.sigma2);
    }
    if (t.progenitors) {
      const ProgenitorEstimates p = progenitor_estimates(t, o->m, o->alpha);
      add("progenitor", p.m_hat);
      add("progenitor", p.alpha_hat);
      add("progenitor", p.sigma2);
      add("progenitor", p.beta);
    }
    if (o->q) {
      require(o->m.has_value(), ErrorCode::InvalidArgument, "--drift-q needs --m");
      add("drift", power_drift_estimate(t, *o->m, *o->q));
      add("drift", power_drift_estimate_avg(t, *o->m, *o->q));
    }
    Output file(o->path, out);
    *file << "estimator,value,n_terms,seed\n";
    for (const auto& [name, r] : rows) {
      *file << name << ',' << format_real(r.value) << ',' << r.n_terms << ',' << t.seed << '\n';
    }
  });
}

void add_fit(CLI::App& app, const Globals& g, std::ostream& out) {
  auto* cmd = app.add_subcommand("fit", "Maximum likelihood fit of a parametric family");
  struct Opts {
    std::string traj, family, method = "auto", path = "-";
    int starts = 8;
  };
  auto o = std::make_shared<Opts>();
  cmd->add_option("--traj", o->traj, "Trajectory CSV")->required();
  cmd->add_option("--family", o->family, "Family JSON")->required();
  cmd->add_option("--method", o->method, "Transition law: exact | pgf | normal | auto");
  cmd->add_option("--starts", o->starts, "Optimizer starts")->check(CLI::PositiveNumber);
  cmd->add_option("--out", o->path, "Fit JSON (- for stdout)");
  cmd->callback([o, &g, &out] {
    const Trajectory t = load_trajectory(o->traj);
    const ParametricFamily fam = family_from_json(read_json_file(o->family));
    FitOptions opts;
    opts.seed = g.seed;
    opts.starts = o->starts;
    opts.threads = g.threads;
    const FitResult fit = fit_mle(fam, t, TransitionMethod{transition_kind_from_string(o->method)}, opts);
    json j = fit_result_to_json(fit);
    j["family"] = family_to_json(fam);
    Output file(o->path, out);
    write_json(*file, j);
  });
}

void add_bootstrap(CLI::App& app, const Globals& g, std::ostream& out) {
  auto* cmd = app.add_subcommand("bootstrap", "Parametric bootstrap percentile intervals");
  struct Opts {
    std::string family, params, fit, path = "-", method = "auto";
    std::int64_t n = 0, B = 200;
    double level = 0.95;
  };
  auto o = std::make_shared<Opts>();
  cmd->add_option("--family", o->family, "Family JSON")->required();
  cmd->add_option("--params", o->params, "Generating parameters, comma separated");
  cmd->add_option("--fit", o->fit, "Fit JSON supplying the generating parameters");
  cmd->add_option("--n", o->n, "Trajectory length")->required()->check(CLI::PositiveNumber);
  cmd->add_option("--B", o->B, "Replicates")->check(CLI::Range(std::int64_t{2}, std::int64_t{1} << 30));
  cmd->add_option("--level", o->level, "Confidence level")->check(CLI::Range(0.0, 1.0));
  cmd->add_option("--method", o->method, "Transition law: exact | pgf | normal | auto");
  cmd->add_option("--out", o->path, "Bootstrap JSON (- for stdout)");
  cmd->callback([o, &g, &out] {
    const ParametricFamily fam = family_from_json(read_json_file(o->family));
    const std::vector<double> params = params_from(o->params, o->fit);
    BootstrapOptions opts;
    opts.threads = g.threads;
    opts.method = TransitionMethod{transition_kind_from_string(o->method)};
    const BootstrapRun run = parametric_bootstrap(fam, params, o->n, o->B, g.seed, opts);
    const std::vector<Interval> ci = ci_percentile(run, o->level);
    json intervals = json::object();
    for (std::size_t j = 0; j < run.param_names.size(); ++j) {
      intervals[run.param_names[j]] = {format_real(ci[j].lo), format_real(ci[j].hi)};
    }
    json rows = json::array();
    for (const auto& r : run.estimates) {
      json row = json::array();
      for (double v : r) row.push_back(format_real(v));
      rows.push_back(row);
    }
    Output file(o->path, out);
    write_json(*file, {{"schema", "cbp-bootstrap/v1"},
                       {"family", run.family_id},
                       {"param_names", run.param_names},
                       {"n", run.n},
                       {"B", run.B},
                       {"seed", run.seed},
                       {"level", o->level},
                       {"intervals", intervals},
                       {"extinctions", run.extinctions},
                       {"failures", run.failures},
                       {"estimates", rows}});
  });
}

void add_mse_curve(CLI::App& app, const Globals& g, std::ostream& out) {
  auto* cmd = app.add_subcommand("mse-curve", "MSE of estimates against trajectory length");
  struct Opts {
    std::string family, params, lengths = "20,40,60", estimator = "mle", path = "-";
    std::int64_t B = 200;
  };
  auto o = std::make_shared<Opts>();
  cmd->add_option("--family", o->family, "Family JSON")->required();
  cmd->add_option("--params", o->params, "True parameters, comma separated")->required();
  cmd->add_option("--lengths", o->lengths, "Trajectory lengths, comma separated");
  cmd->add_option("--B", o->B, "Replicates per length")->check(CLI::PositiveNumber);
  cmd->add_option("--estimator", o->estimator, "mle | moment-based");
  cmd->add_option("--out", o->path, "MSE CSV (- for stdout)");
  cmd->callback([o, &g, &out] {
    const ParametricFamily fam = family_from_json(read_json_file(o->family));
    std::vector<std::int64_t> lengths;
    for (double v : parse_reals(o->lengths)) lengths.push_back(static_cast<std::int64_t>(v));
    BootstrapOptions opts;
    opts.threads = g.threads;
    const MseCurve curve = mse_curve(fam, parse_reals(o->params), lengths, o->B, g.seed,
                                     mse_estimator_from_string(o->estimator), opts);
    Output file(o->path, out);
    write_mse_csv(*file, curve);
  });
}

void add_tvd_scan(CLI::App& app, const Globals& g, std::ostream& out) {
  auto* cmd = app.add_subcommand("tvd-scan", "One-step TVD between two models along a doubling grid");
  struct Opts {
    std::string a, b, path = "-";
    std::int64_t zmin = 16, zmax = 1024;
    bool bounds = false, joint = false;
  };
  auto o = std::make_shared<Opts>();
  cmd->add_option("--a", o->a, "First model JSON")->required();
  cmd->add_option("--b", o->b, "Second model JSON")->required();
  cmd->add_option("--zmin", o->zmin, "Smallest z")->check(CLI::PositiveNumber);
  cmd->add_option("--zmax", o->zmax, "Largest z")->check(CLI::PositiveNumber);
  cmd->add_flag("--bounds", o->bounds, "Also evaluate the Stein + DN bound chain");
  cmd->add_flag("--joint", o->joint, "Compare joint laws of (phi(z), Z_1)");
  cmd->add_option("--out", o->path, "Scan CSV (- for stdout)");
  cmd->callback([o, &g, &out] {
    require(o->zmin <= o->zmax, ErrorCode::InvalidArgument, "--zmin must not exceed --zmax");
    std::vector<std::int64_t> grid;
    for (std::int64_t z = o->zmin; z <= o->zmax; z *= 2) grid.push_back(z);
    DecayScanOptions opts;
    opts.with_bounds = o->bounds;
    opts.joint_progenitors = o->joint;
    opts.threads = g.threads;
    const DecayScan scan = decay_scan(load_model(o->a), load_model(o->b), grid, opts);
    Output file(o->path, out);
    *file << "z,tvd_exact,tvd_bound\n";
    for (std::size_t i = 0; i < scan.z.size(); ++i) {
      *file << scan.z[i] << ',' << format_real(scan.tvd[i]) << ','
            << (scan.bound.empty() ? std::string() : format_real(scan.bound[i])) << '\n';
    }
    *file << "# slope=" << format_real(scan.fit.slope) << " slope_se=" << format_real(scan.fit.slope_se)
          << " points=" << scan.fit.points << (scan.fit.degenerate ? " degenerate" : "") << '\n';
  });
}

void add_bounds(CLI::App& app, std::ostream& out) {
  auto* cmd = app.add_subcommand("bounds", "Evaluate a TVD bound");
  cmd->require_subcommand(1);
  auto path = std::make_shared<std::string>("-");
  cmd->add_option("--out", *path, "Bound JSON (- for stdout)");

  auto* stein = cmd->add_subcommand("stein", "Sum of i.i.d. increments vs discretised normal");
  auto inc = std::make_shared<std::string>();
  auto offset = std::make_shared<std::int64_t>(0);
  auto n = std::make_shared<std::int64_t>(1);
  auto exact = std::make_shared<bool>(false);
  stein->add_option("--increment", *inc, "Increment probabilities, comma separated")->required();
  stein->add_option("--offset", *offset, "Smallest increment value")->check(CLI::NonNegativeNumber);
  stein->add_option("--n", *n, "Number of summands")->required()->check(CLI::PositiveNumber);
  stein->add_flag("--exact", *exact, "Attach the exact distance");
  stein->callback([=, &out] {
    const BoundReport r = stein_dn_bound(Pmf(*offset, parse_reals(*inc)), *n, *exact);
    Output file(*path, out);
    write_json(*file, bound_to_json(r));
  });

  auto* dn = cmd->add_subcommand("dn", "Two discretised normals");
  auto p = std::make_shared<std::array<double, 4>>();
  dn->add_option("--m", (*p)[0], "First mean")->required();
  dn->add_option("--s2", (*p)[1], "First variance")->required();
  dn->add_option("--m-other", (*p)[2], "Second mean")->required();
  dn->add_option("--s2-other", (*p)[3], "Second variance")->required();
  dn->add_flag("--exact", *exact, "Attach the exact distance");
  dn->callback([=, &out] {
    const BoundReport r = dn_tvd_bound((*p)[0], (*p)[1], (*p)[2], (*p)[3], *exact);
    Output file(*path, out);
    write_json(*file, bound_to_json(r));
  });

  auto* multi = cmd->add_subcommand("multi-step", "Iterated multi-step TVD bound and its limit");
  struct Multi {
    double s = 0, q = 0, a = 0, b = 0, m = 0, s2 = 0, t = 0, alpha = 0, z = 0;
    std::int64_t k = 1;
  };
  auto ms = std::make_shared<Multi>();
  multi->add_option("--s", ms->s, "One-step constant")->required();
  multi->add_option("--q", ms->q, "One-step exponent")->required();
  multi->add_option("--a", ms->a, "Control mean constant")->required();
  multi->add_option("--b", ms->b, "Control variance constant")->required();
  multi->add_option("--m", ms->m, "Offspring mean")->required();
  multi->add_option("--sigma2", ms->s2, "Offspring variance")->required();
  multi->add_option("--t", ms->t, "Growth lower bound t")->required();
  multi->add_option("--alpha", ms->alpha, "Mixing fraction in (1/t, 1)")->required();
  multi->add_option("--k", ms->k, "Steps")->check(CLI::PositiveNumber);
  multi->add_option("--z", ms->z, "Initial size")->required();
  multi->callback([=, &out] {
    const MultiStepBound r = multi_step_bound(ms->s, ms->q, ms->a, ms->b, ms->m, ms->s2, ms->t, ms->alpha, ms->k, ms->z);
    Output file(*path, out);
    write_json(*file, {{"bound_name", "multi-step"}, {"value", format_real(r.value)}, {"limit", format_real(r.limit)}});
  });

  auto* third = cmd->add_subcommand("third-moment", "Bound on the third absolute central moment");
  auto mg = std::make_shared<std::array<double, 3>>();
  third->add_option("--m", (*mg)[0], "Mean")->required();
  third->add_option("--sigma2", (*mg)[1], "Variance")->required();
  third->add_option("--gamma", (*mg)[2], "Third central moment")->required();
  third->callback([=, &out] {
    Output file(*path, out);
    write_json(*file, {{"bound_name", "third-abs-moment"},
                       {"bound_value", format_real(third_abs_moment_bound((*mg)[0], (*mg)[1], (*mg)[2]))}});
  });
}

void add_ident_check(CLI::App& app, std::ostream& out) {
  auto* cmd = app.add_subcommand("ident-check", "Check non-identifiability conditions for a model pair");
  struct Opts {
    std::string a, b, scenario, path = "-";
  };
  auto o = std::make_shared<Opts>();
  cmd->add_option("--a", o->a, "First model JSON")->required();
  cmd->add_option("--b", o->b, "Second model JSON")->required();
  cmd->add_option("--scenario", o->scenario, "known-control | unknown-control | observed-progenitors")
      ->required()
      ->check(CLI::IsMember({"known-control", "unknown-control", "observed-progenitors"}));
  cmd->add_option("--out", o->path, "Verdict JSON (- for stdout)");
  cmd->callback([o, &out] {
    const auto v = identifiability_check(load_model(o->a), load_model(o->b), scenario_from_string(o->scenario));
    Output file(o->path, out);
    write_json(*file, verdict_to_json(v));
  });
}

void add_moments(CLI::App& app, std::ostream& out) {
  auto* cmd = app.add_subcommand("moments", "Offspring, control and one-step moments of a model");
  struct Opts {
    std::string model, path = "-";
    std::int64_t z = 1;
  };
  auto o = std::make_shared<Opts>();
  cmd->add_option("--model", o->model, "Model JSON")->required();
  cmd->add_option("--z", o->z, "Current population size")->check(CLI::PositiveNumber);
  cmd->add_option("--out", o->path, "Moments JSON (- for stdout)");
  cmd->callback([o, &out] {
    const CbpModel m = load_model(o->model);
    const MomentSummary xi = offspring_moments(m.offspring);
    const ControlMoments phi = control_moments(m.control, o->z);
    const ConditionalMoments cond = cond_mean_var(m, o->z);
    json j = {{"z", o->z},
              {"offspring", moments_to_json(xi)},
              {"control",
               {{"mean", format_real(phi.mean)},
                {"variance", format_real(phi.variance)},
                {"third_central", format_real(phi.third_central)},
                {"fourth_central", format_real(phi.fourth_central)}}},
              {"next_step",
               {{"mean", format_real(cond.mean)},
                {"variance", format_real(cond.variance)},
                {"fourth_central", format_real(fourth_central_next_step(m, o->z))}}},
              {"mean_growth_rate", format_real(mean_growth_rate(m, o->z))}};
    Output file(o->path, out);
    write_json(*file, j);
  });
}

bool is_validation(ErrorCode code) {
  return code == ErrorCode::InvalidArgument || code == ErrorCode::SchemaViolation ||
         code == ErrorCode::OutsideSimplex || code == ErrorCode::InvalidMixing;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Controlled branching process toolkit", "cbplab"};
  app.require_subcommand(1);
  app.fallthrough();
  app.config_formatter(std::make_shared<JsonConfig>());
  app.set_config("--config", "", "JSON config; nested objects name subcommands");
  app.allow_config_extras(CLI::config_extras_mode::error);

  Globals g;
  app.add_option("--seed", g.seed, "Random seed");
  app.add_option("--threads", g.threads, "Worker threads (0 = all cores)")->envname("CBPLAB_THREADS");

  add_simulate(app, g, out);
  add_estimate(app, out);
  add_fit(app, g, out);
  add_bootstrap(app, g, out);
  add_mse_curve(app, g, out);
  add_tvd_scan(app, g, out);
  add_bounds(app, out);
  add_ident_check(app, out);
  add_moments(app, out);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "cbplab: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    err << "cbplab: " << e.what() << "\n";
    return is_validation(e.code()) ? kExitUsage : kExitRuntime;
  } catch (const std::exception& e) {
    err << "cbplab: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitOk;
}

int run(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace cbp::cli

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "gvcplm/errors.hpp"
#include "gvcplm/glrt.hpp"
#include "gvcplm/parallel.hpp"
#include "gvcplm/runconfig.hpp"
#include "gvcplm/simlab.hpp"
#include "gvcplm/subset.hpp"
#include "json.hpp"

namespace gvcplm {

namespace {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string fmt4(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

void write_text(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
}

ordered_json config_echo(const RunConfig& c) {
  ordered_json j;
  j["command"] = c.command;
  if (c.command != "simulate") {
    j["data"] = c.data_path;
    j["roles"] = c.roles_path;
    j["family"] = c.family;
    j["kernel"] = c.kernel;
    if (c.command != "bandwidth") {
      j["bandwidth"] = c.bandwidth;
      j["undersmooth"] = c.apply_undersmooth;
    }
  }
  if (c.command == "select") {
    j["penalty"] = c.penalty;
    if (c.penalty == "scad") j["scad_a"] = c.scad_a;
    if (c.penalty == "lq") j["lq_q"] = c.lq_q;
    if (c.penalty == "l0") {
      j["criterion"] = c.criterion;
    } else {
      j["lambda_policy"] = c.lambda_policy;
      if (c.lambda_policy == "fixed") {
        j["lambda"] = c.lambda_value;
        j["lambda_raw"] = c.lambda_raw;
      }
      if (!c.no_penalize.empty()) j["no_penalize"] = c.no_penalize;
    }
  }
  if (c.command == "test") {
    j["null_x"] = c.null_x;
    j["bootstrap"] = c.bootstrap_b;
  }
  if (c.command == "bandwidth") {
    j["h_grid"] = c.h_grid;
    j["folds"] = c.folds;
  }
  if (c.command == "simulate") {
    j["scenario"] = c.scenario;
    j["study"] = c.study;
    j["full_scale"] = c.full_scale;
    if (c.study == "table1") j["methods"] = c.methods;
    if (c.study == "table2") j["d_values"] = c.d_values;
    if (c.study == "power") {
      j["delta_grid"] = c.delta_grid;
      j["levels"] = c.levels;
      j["bootstrap"] = c.bootstrap_b;
    }
    j["reps"] = c.reps;
    if (c.scenario_n != 0) j["n_override"] = c.scenario_n;
    if (c.scenario_h != 0.0) j["h_override"] = c.scenario_h;
  }
  if (c.seed_set) j["seed"] = c.seed;
  j["threads"] = c.threads;
  j["out_dir"] = c.out_dir;
  return j;
}

ordered_json scenario_echo(const ScenarioSpec& s) {
  ordered_json j;
  j["name"] = s.name;
  j["family"] = s.family;
  j["n"] = s.n;
  j["h"] = s.h;
  j["p"] = s.p;
  j["d"] = s.d;
  j["rho"] = s.rho;
  j["alpha"] = s.alpha_names;
  std::vector<double> beta(s.beta_true.data(), s.beta_true.data() + s.d);
  j["beta_true"] = beta;
  j["delta"] = s.delta;
  j["glrt_component"] = s.glrt_component + 1;  // 1-based in reports
  return j;
}

ordered_json coefficient_table(const Dataset& data, const SemiFit& fit) {
  ordered_json rows = ordered_json::array();
  for (Eigen::Index j = 0; j < data.d(); ++j) {
    ordered_json row;
    row["name"] = data.z_names[static_cast<std::size_t>(j)];
    row["estimate"] = fit.beta(j);
    row["se"] = fit.se.size() > j && std::isfinite(fit.se(j))
                    ? ordered_json(fit.se(j))
                    : ordered_json(nullptr);
    row["zeroed"] = static_cast<bool>(fit.zero_mask[static_cast<std::size_t>(j)]);
    rows.push_back(row);
  }
  return rows;
}

std::string coefficient_report(const Dataset& data, const SemiFit& fit) {
  std::ostringstream out;
  char buf[160];
  std::snprintf(buf, sizeof(buf), "  %-16s %14s %14s %8s\n", "coefficient",
                "estimate", "se", "zeroed");
  out << buf;
  for (Eigen::Index j = 0; j < data.d(); ++j) {
    const bool zeroed = fit.zero_mask[static_cast<std::size_t>(j)];
    std::snprintf(buf, sizeof(buf), "  %-16s %14.6f %14s %8s\n",
                  data.z_names[static_cast<std::size_t>(j)].c_str(),
                  fit.beta(j),
                  zeroed ? "--" : fmt4(fit.se(j)).c_str(),
                  zeroed ? "yes" : "no");
    out << buf;
  }
  return out.str();
}

void write_curves_csv(const fs::path& path, const CoefficientCurves& curves,
                      const std::vector<std::string>& x_names) {
  std::ostringstream out;
  out << "u";
  for (const auto& n : x_names) out << ",alpha_" << n;
  for (const auto& n : x_names) out << ",dalpha_" << n;
  out << "\n";
  for (Eigen::Index k = 0; k < curves.grid.size(); ++k) {
    out << fmt(curves.grid(k));
    for (Eigen::Index j = 0; j < curves.values.cols(); ++j)
      out << "," << fmt(curves.values(k, j));
    for (Eigen::Index j = 0; j < curves.derivatives.cols(); ++j)
      out << "," << fmt(curves.derivatives(k, j));
    out << "\n";
  }
  write_text(path, out.str());
}

Dataset load_and_check(const RunConfig& c, const QuasiFamily& family) {
  Dataset data = load_csv(c.data_path, ColumnRoles::read(c.roles_path));
  for (Eigen::Index i = 0; i < data.n(); ++i)
    if (!family.admissible_y(data.y(i)))
      throw std::invalid_argument(
          "response value " + fmt(data.y(i)) + " at row " +
          std::to_string(i + 1) + " is outside the " + family.name() +
          " range");
  return data;
}

double resolve_bandwidth(const RunConfig& c, const Dataset& data,
                         std::string* note) {
  double h = c.bandwidth;
  if (c.apply_undersmooth) {
    h = undersmooth(h, data.n());
    if (note != nullptr)
      *note = "bandwidth " + fmt(c.bandwidth) + " undersmoothed to " + fmt(h) +
              " (n^(-2/15) rule)";
  }
  return h;
}

EstimatorOptions estimator_options(const RunConfig& c) {
  EstimatorOptions opts;
  opts.fit.threads = c.threads;
  return opts;
}

// ---------------------------------------------------------------- commands

int run_fit(const RunConfig& c, const fs::path& dir, ordered_json& result,
            std::string& report) {
  const QuasiFamily family = QuasiFamily::by_name(c.family);
  const Dataset data = load_and_check(c, family);
  std::string h_note;
  const double h = resolve_bandwidth(c, data, &h_note);
  const KernelSpec kernel = KernelSpec::by_name(c.kernel, h);

  PenaltySpec none;
  LambdaPolicy policy;
  policy.mode = LambdaPolicy::Mode::none;
  const BackfitResult bf =
      backfit(data, family, kernel, none, policy, estimator_options(c));

  result["bandwidth_used"] = h;
  result["n"] = data.n();
  result["p"] = data.p();
  result["d"] = data.d();
  result["coefficients"] = coefficient_table(data, bf.fit);
  result["deviance"] = bf.fit.deviance;
  result["quasi_loglik"] = bf.fit.quasi_ll;
  result["effective_df"] = bf.fit.effective_df;
  result["gcv"] = bf.fit.gcv;
  result["converged"] = bf.fit.converged;
  result["curves_csv"] = "curves.csv";
  write_curves_csv(dir / "curves.csv", bf.fit.alpha_curves, data.x_names);

  std::ostringstream rep;
  rep << "fit: " << c.family << " GVCPLM, kernel " << c.kernel << ", h = "
      << fmt(h) << "\n";
  if (!h_note.empty()) rep << h_note << "\n";
  rep << "n = " << data.n() << ", p = " << data.p() << ", d = " << data.d()
      << "\n\n";
  if (data.d() > 0) rep << coefficient_report(data, bf.fit);
  rep << "\ndeviance = " << fmt4(bf.fit.deviance)
      << ", effective df = " << fmt4(bf.fit.effective_df)
      << ", gcv = " << fmt4(bf.fit.gcv) << "\n";
  rep << "coefficient curves written to curves.csv\n";
  report = rep.str();
  return kExitOk;
}

int run_select(const RunConfig& c, const fs::path& dir, ordered_json& result,
               std::string& report) {
  const QuasiFamily family = QuasiFamily::by_name(c.family);
  const Dataset data = load_and_check(c, family);
  std::string h_note;
  const double h = resolve_bandwidth(c, data, &h_note);
  const KernelSpec kernel = KernelSpec::by_name(c.kernel, h);
  const EstimatorOptions opts = estimator_options(c);
  const PenaltyKind kind = penalty_kind_by_name(c.penalty);

  std::ostringstream rep;
  rep << "select: penalty " << c.penalty << ", " << c.family << ", h = "
      << fmt(h) << "\n";
  if (!h_note.empty()) rep << h_note << "\n";
  result["bandwidth_used"] = h;

  if (kind == PenaltyKind::l0) {
    SubsetOptions sopts;
    sopts.estimator = opts;
    sopts.keep_trace = data.d() <= 12;
    const InfoCriterion crit = criterion_by_name(c.criterion);
    const SubsetResult sub = best_subset(data, family, kernel, crit, sopts);

    std::vector<int> subset_1based;
    for (int j : sub.best_subset) subset_1based.push_back(j + 1);
    result["criterion"] = c.criterion;
    result["criterion_lambda"] = criterion_lambda(crit, data.n(), data.d());
    result["best_subset"] = subset_1based;
    result["criterion_value"] = sub.criterion_value;
    result["subsets_evaluated"] = sub.subsets_evaluated;
    result["coefficients"] = coefficient_table(data, sub.fit);
    write_curves_csv(dir / "curves.csv", sub.fit.alpha_curves, data.x_names);
    result["curves_csv"] = "curves.csv";
    if (sopts.keep_trace) {
      std::ostringstream csv;
      csv << "mask,score\n";
      for (const auto& [mask, score] : sub.trace)
        csv << mask << "," << fmt(score) << "\n";
      write_text(dir / "subset_trace.csv", csv.str());
      result["subset_trace_csv"] = "subset_trace.csv";
    }
    rep << "criterion " << c.criterion << ", subsets evaluated "
        << sub.subsets_evaluated << "\nbest subset:";
    for (int j : subset_1based) rep << " z" << j;
    rep << "\n\n" << coefficient_report(data, sub.fit);
  } else {
    PenaltySpec pen;
    pen.kind = kind;
    pen.a = c.scad_a;
    pen.q = c.lq_q;
    LambdaPolicy policy;
    policy.mode = c.lambda_policy == "fixed" ? LambdaPolicy::Mode::fixed
                                             : LambdaPolicy::Mode::gcv;
    policy.fixed_lambda = c.lambda_value;
    policy.se_scale = !c.lambda_raw;
    for (int j : c.no_penalize) policy.exempt.push_back(j - 1);
    const BackfitResult bf = backfit(data, family, kernel, pen, policy, opts);

    result["coefficients"] = coefficient_table(data, bf.fit);
    result["deviance"] = bf.fit.deviance;
    result["effective_df"] = bf.fit.effective_df;
    result["gcv"] = bf.fit.gcv;
    result["converged"] = bf.fit.converged;
    std::vector<double> lambdas(bf.fit.lambda_used.data(),
                                bf.fit.lambda_used.data() + data.d());
    result["lambda_used"] = lambdas;
    if (bf.selection) {
      result["lambda_star"] = bf.selection->lambda_star;
      ordered_json path = ordered_json::array();
      std::ostringstream csv;
      csv << "lambda,gcv,df,zero_count,ok\n";
      for (const auto& pt : bf.selection->path) {
        int zeros = 0;
        for (bool z : pt.zero_mask) zeros += z ? 1 : 0;
        ordered_json row;
        row["lambda"] = pt.lambda;
        row["ok"] = pt.ok;
        if (pt.ok) {
          row["gcv"] = pt.gcv;
          row["df"] = pt.df;
          row["zero_count"] = zeros;
        }
        path.push_back(row);
        csv << fmt(pt.lambda) << ","
            << (pt.ok ? fmt(pt.gcv) : std::string("nan")) << ","
            << (pt.ok ? fmt(pt.df) : std::string("nan")) << "," << zeros << ","
            << (pt.ok ? 1 : 0) << "\n";
      }
      result["lambda_path"] = path;
      write_text(dir / "lambda_path.csv", csv.str());
      result["lambda_path_csv"] = "lambda_path.csv";
    }
    write_curves_csv(dir / "curves.csv", bf.fit.alpha_curves, data.x_names);
    result["curves_csv"] = "curves.csv";

    if (bf.selection)
      rep << "gcv-selected lambda = " << fmt(bf.selection->lambda_star)
          << " (SE-scaled per coefficient)\n";
    rep << "\n" << coefficient_report(data, bf.fit);
    rep << "\ndeviance = " << fmt4(bf.fit.deviance)
        << ", effective df = " << fmt4(bf.fit.effective_df)
        << ", gcv = " << fmt4(bf.fit.gcv) << "\n";
  }
  report = rep.str();
  return kExitOk;
}

int run_test(const RunConfig& c, const fs::path& dir, ordered_json& result,
             std::string& report) {
  const QuasiFamily family = QuasiFamily::by_name(c.family);
  const Dataset data = load_and_check(c, family);
  std::string h_note;
  const double h = resolve_bandwidth(c, data, &h_note);
  const KernelSpec kernel = KernelSpec::by_name(c.kernel, h);

  std::vector<int> null_idx;
  for (int j : c.null_x) {
    if (j < 1 || j > data.p())
      throw std::invalid_argument("null_x index out of range: " +
                                  std::to_string(j));
    null_idx.push_back(j - 1);
  }

  GlrtOptions gopts;
  gopts.estimator = estimator_options(c);
  const GlrtResult res = glrt(data, family, kernel, null_idx, gopts);

  result["bandwidth_used"] = h;
  result["t_glr"] = res.t_glr;
  result["r_h1"] = res.r_h1;
  result["r_h0"] = res.r_h0;
  result["df_n"] = res.df_n;
  result["p_asymptotic"] = res.p_asymptotic;
  result["p_tested"] = res.p_tested;
  result["partial_null"] = res.partial_null;
  if (res.nesting_warning) result["nesting_warning"] = true;
  if (!res.notes.empty()) result["notes"] = res.notes;

  std::ostringstream rep;
  rep << "glrt: H0 sets alpha_j(.) = 0 for x components";
  for (int j : c.null_x) rep << " " << j;
  rep << "\n";
  if (!h_note.empty()) rep << h_note << "\n";
  rep << "t_glr = " << fmt4(res.t_glr) << ", df_n = " << fmt4(res.df_n)
      << ", asymptotic p = " << fmt4(res.p_asymptotic) << "\n";

  if (c.bootstrap_b > 0) {
    const BootstrapNullResult boot = bootstrap_null(
        data, family, kernel, null_idx, c.bootstrap_b, c.seed, gopts);
    result["p_bootstrap"] = boot.p_bootstrap;
    result["df_fitted"] = boot.df_fitted;
    result["bootstrap_failures"] = boot.failures;
    std::ostringstream csv;
    csv << "t_glr\n";
    for (double t : boot.bootstrap_stats) csv << fmt(t) << "\n";
    write_text(dir / "bootstrap_stats.csv", csv.str());
    result["bootstrap_stats_csv"] = "bootstrap_stats.csv";
    rep << "bootstrap (B = " << c.bootstrap_b << "): p = "
        << fmt4(boot.p_bootstrap) << ", df_fitted = " << fmt4(boot.df_fitted)
        << "\n";
    rep << "decision basis: bootstrap p-value (asymptotic df is main-order "
           "only)\n";
  }
  if (res.nesting_warning) rep << "warning: " << res.notes << "\n";
  report = rep.str();
  return kExitOk;
}

int run_bandwidth(const RunConfig& c, const fs::path& dir,
                  ordered_json& result, std::string& report) {
  const QuasiFamily family = QuasiFamily::by_name(c.family);
  const Dataset data = load_and_check(c, family);
  const KernelSpec proto = KernelSpec::by_name(c.kernel, 1.0);
  FitOptions fopts;
  fopts.threads = c.threads;
  const CvBandwidthResult cv = select_bandwidth_cv(
      data, family, proto, c.h_grid, c.folds, c.seed, fopts);
  const double h_under = undersmooth(cv.h_star, data.n());

  result["h_star"] = cv.h_star;
  result["h_undersmoothed"] = h_under;
  ordered_json scores = ordered_json::array();
  std::ostringstream csv;
  csv << "h,cv_score\n";
  for (std::size_t i = 0; i < cv.h_grid.size(); ++i) {
    ordered_json row;
    row["h"] = cv.h_grid[i];
    row["cv"] = std::isfinite(cv.cv_scores[i]) ? ordered_json(cv.cv_scores[i])
                                               : ordered_json(nullptr);
    scores.push_back(row);
    csv << fmt(cv.h_grid[i]) << ","
        << (std::isfinite(cv.cv_scores[i]) ? fmt(cv.cv_scores[i])
                                           : std::string("nan"))
        << "\n";
  }
  result["cv_scores"] = scores;
  write_text(dir / "cv_scores.csv", csv.str());
  result["cv_scores_csv"] = "cv_scores.csv";

  std::ostringstream rep;
  rep << "bandwidth: " << c.folds << "-fold cross-validation over "
      << c.h_grid.size() << " candidates\n";
  rep << "h_star = " << fmt(cv.h_star)
      << ", undersmoothed h (n^(-2/15) rule) = " << fmt(h_under) << "\n";
  rep << "use the undersmoothed value for root-n inference on beta\n";
  report = rep.str();
  return kExitOk;
}

ScenarioSpec resolve_scenario(const RunConfig& c) {
  ScenarioSpec spec = ScenarioSpec::by_name(c.scenario, c.full_scale);
  if (c.scenario_n != 0) spec.n = c.scenario_n;
  if (c.scenario_h != 0.0) spec.h = c.scenario_h;
  return spec;
}

int run_simulate(const RunConfig& c, const fs::path& dir, ordered_json& result,
                 std::string& report) {
  const ScenarioSpec spec = resolve_scenario(c);
  result["scenario"] = scenario_echo(spec);
  StudyOptions opts;
  opts.threads = c.threads;

  std::ostringstream rep;
  rep << "simulate: scenario " << spec.name << " (" << spec.family
      << ", n = " << spec.n << ", h = " << fmt(spec.h) << "), study " << c.study
      << ", reps = " << c.reps << ", seed = " << c.seed << "\n\n";

  if (c.study == "table1") {
    std::vector<SelectionMethod> methods;
    for (const auto& m : c.methods) methods.push_back(method_by_name(m));
    const StudyReport study =
        run_table1_study(spec, methods, c.reps, c.seed, opts);

    ordered_json rows = ordered_json::array();
    std::ostringstream csv;
    csv << "method,rgmse_median,rgmse_mad_scaled,c_avg,i_avg\n";
    char line[160];
    rep << "  method   RGMSE median (MAD/.6745)        C        I\n";
    for (const auto& row : study.rows) {
      ordered_json r;
      r["method"] = row.method;
      r["rgmse_median"] = row.rgmse_median;
      r["rgmse_mad_scaled"] = row.rgmse_mad_scaled;
      r["c_avg"] = row.c_avg;
      r["i_avg"] = row.i_avg;
      rows.push_back(r);
      csv << row.method << "," << fmt(row.rgmse_median) << ","
          << fmt(row.rgmse_mad_scaled) << "," << fmt(row.c_avg) << ","
          << fmt(row.i_avg) << "\n";
      std::snprintf(line, sizeof(line), "  %-8s %12.4f (%6.4f) %12.4f %8.4f\n",
                    row.method.c_str(), row.rgmse_median, row.rgmse_mad_scaled,
                    row.c_avg, row.i_avg);
      rep << line;
    }
    result["replications"] = study.replications;
    result["failures"] = study.failures;
    result["rows"] = rows;
    write_text(dir / "table1.csv", csv.str());
    result["table1_csv"] = "table1.csv";
    rep << "\nfailed replications: " << study.failures << " / " << c.reps
        << "\n";
  } else if (c.study == "table2") {
    std::vector<SelectionMethod> methods;
    for (const auto& m : c.methods) methods.push_back(method_by_name(m));
    const TimingReport timing =
        run_timing_study(spec, c.d_values, methods, c.reps, c.seed, opts);

    std::ostringstream csv;
    csv << "method,d,mean_seconds,sd_seconds\n";
    rep << "  method       d   mean seconds     sd\n";
    char line[160];
    for (const auto& row : timing.rows) {
      csv << row.method << "," << row.d << "," << fmt(row.mean_seconds) << ","
          << fmt(row.sd_seconds) << "\n";
      std::snprintf(line, sizeof(line), "  %-8s %5d %14.4f %10.4f\n",
                    row.method.c_str(), row.d, row.mean_seconds,
                    row.sd_seconds);
      rep << line;
    }
    write_text(dir / "timing.csv", csv.str());
    // Wall-clock measurements are inherently not byte-reproducible, so they
    // live in timing.csv / report.txt only; result.json stays deterministic.
    result["replications"] = timing.replications;
    result["timing_csv"] = "timing.csv";
    result["timing_note"] =
        "wall-clock timings are in timing.csv and are not covered by the "
        "byte-reproducibility contract";
  } else {  // power
    const PowerReport power = run_power_study(
        spec, c.delta_grid, c.levels, c.reps, c.bootstrap_b, c.seed, opts);
    ordered_json grid = ordered_json::array();
    std::ostringstream csv;
    csv << "delta,level,power\n";
    rep << "  delta";
    for (double l : power.levels) rep << "   level " << fmt4(l);
    rep << "\n";
    for (std::size_t i = 0; i < power.deltas.size(); ++i) {
      rep << "  " << fmt4(power.deltas[i]);
      for (std::size_t j = 0; j < power.levels.size(); ++j) {
        ordered_json r;
        r["delta"] = power.deltas[i];
        r["level"] = power.levels[j];
        r["power"] = power.power[i][j];
        grid.push_back(r);
        csv << fmt(power.deltas[i]) << "," << fmt(power.levels[j]) << ","
            << fmt(power.power[i][j]) << "\n";
        rep << "     " << fmt4(power.power[i][j]) << "  ";
      }
      rep << "\n";
    }
    result["df_fitted"] = power.df_fitted;
    result["power"] = grid;
    write_text(dir / "power.csv", csv.str());
    result["power_csv"] = "power.csv";
    std::ostringstream nullcsv;
    nullcsv << "t_glr\n";
    for (double t : power.null_stats) nullcsv << fmt(t) << "\n";
    write_text(dir / "null_stats.csv", nullcsv.str());
    result["null_stats_csv"] = "null_stats.csv";
    rep << "\nbootstrap df_fitted = " << fmt4(power.df_fitted) << " (B = "
        << c.bootstrap_b << ")\n";
  }
  report = rep.str();
  return kExitOk;
}

}  // namespace

int run(const RunConfig& config) {
  const auto errors = validate_run_config(config);
  if (!errors.empty()) {
    std::fprintf(stderr, "config errors:\n");
    for (const auto& e : errors) std::fprintf(stderr, "  %s\n", e.c_str());
    return kExitConfigError;
  }

  try {
    const fs::path dir(config.out_dir);
    fs::create_directories(dir);

    ordered_json doc;
    doc["config"] = config_echo(config);
    if (config.seed_set) doc["seed"] = config.seed;
    ordered_json result;
    std::string report;

    int code = kExitOk;
    if (config.command == "fit")
      code = run_fit(config, dir, result, report);
    else if (config.command == "select")
      code = run_select(config, dir, result, report);
    else if (config.command == "test")
      code = run_test(config, dir, result, report);
    else if (config.command == "bandwidth")
      code = run_bandwidth(config, dir, result, report);
    else
      code = run_simulate(config, dir, result, report);

    doc["results"] = result;
    write_text(dir / "result.json", doc.dump(2) + "\n");
    write_text(dir / "report.txt", report);
    return code;
  } catch (const FitError& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return kExitNumericalError;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "data validation failed: %s\n", e.what());
    return kExitDataError;
  } catch (const std::domain_error& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return kExitNumericalError;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitNumericalError;
  }
}

}  // namespace gvcplm

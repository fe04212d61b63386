#include "simix/report.hpp"

#include <cmath>
#include <filesystem>

#include "simix/csv.hpp"

namespace simix {

namespace {

constexpr const char* kModule = "cli-io";

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw_io(kModule, "cannot create output directory " + dir + ": " + ec.message());
}

std::string join(const std::string& dir, const std::string& name) {
  return (std::filesystem::path(dir) / name).string();
}

std::vector<std::pair<std::string, std::string>> meta_entries(const RunMeta& meta) {
  std::vector<std::pair<std::string, std::string>> kv;
  kv.emplace_back("command", meta.command);
  if (!meta.model.empty()) kv.emplace_back("model", meta.model);
  if (!meta.estimator.empty()) kv.emplace_back("estimator", meta.estimator);
  kv.emplace_back("k", std::to_string(meta.k));
  kv.emplace_back("kernel", kernel_family_name(meta.kernel));
  if (meta.bandwidth > 0.0) kv.emplace_back("bandwidth", format_double(meta.bandwidth));
  kv.emplace_back("bandwidth_from_cv", meta.bandwidth_from_cv ? "true" : "false");
  kv.emplace_back("grid_n", std::to_string(meta.grid_n));
  kv.emplace_back("seed", std::to_string(meta.seed));
  kv.emplace_back("standardized", meta.standardized ? "true" : "false");
  if (!meta.input_path.empty()) kv.emplace_back("input", meta.input_path);
  if (!meta.response_name.empty()) kv.emplace_back("response", meta.response_name);
  if (!meta.column_names.empty()) {
    std::string cols;
    for (std::size_t i = 0; i < meta.column_names.size(); ++i) {
      cols += (i ? " " : "") + meta.column_names[i];
    }
    kv.emplace_back("covariates", cols);
  }
  return kv;
}

std::string alpha_string(const Eigen::VectorXd& alpha) {
  std::string s;
  for (Eigen::Index i = 0; i < alpha.size(); ++i) {
    s += (i ? " " : "") + format_double(alpha[i]);
  }
  return s;
}

void write_trace(const std::string& path, const std::vector<double>& trace) {
  std::vector<std::vector<double>> rows;
  rows.reserve(trace.size());
  for (std::size_t i = 0; i < trace.size(); ++i) {
    rows.push_back({static_cast<double>(i), trace[i]});
  }
  write_csv(path, {"iteration", "loglik"}, rows);
}

void write_cv_table(const std::string& path, const BandwidthSelection& sel) {
  std::vector<std::vector<double>> rows;
  for (std::size_t c = 0; c < sel.candidates.size(); ++c) {
    rows.push_back({sel.candidates[c], sel.mean_scores[c],
                    static_cast<double>(sel.win_counts[c])});
  }
  write_csv(path, {"bandwidth", "mean_cv", "wins"}, rows);
}

void append_cv_meta(std::vector<std::pair<std::string, std::string>>& kv,
                    const BandwidthSelection& sel) {
  kv.emplace_back("h_hat", format_double(sel.h_hat));
  kv.emplace_back("h_undersmooth", format_double(sel.undersmooth));
  kv.emplace_back("h_oversmooth", format_double(sel.oversmooth));
}

}  // namespace

void write_msim_report(const std::string& out_dir, const RunMeta& meta, const MsimFit& fit,
                       const BandwidthSelection* cv) {
  ensure_dir(out_dir);
  auto kv = meta_entries(meta);
  kv.emplace_back("alpha", alpha_string(fit.alpha.alpha()));
  kv.emplace_back("alpha_sign_convention", "first nonzero entry positive");
  kv.emplace_back("loglik", format_double(fit.loglik));
  kv.emplace_back("converged", fit.converged ? "true" : "false");
  kv.emplace_back("n_outer_iters", std::to_string(fit.n_outer_iters));
  kv.emplace_back("underflow_rows", std::to_string(fit.underflow_rows));
  if (cv) append_cv_meta(kv, *cv);
  write_kv(join(out_dir, "summary.txt"), kv);

  const Eigen::Index k = fit.curves.k();
  std::vector<std::string> header{"u"};
  for (Eigen::Index j = 0; j < k; ++j) header.push_back("pi_" + std::to_string(j + 1));
  for (Eigen::Index j = 0; j < k; ++j) header.push_back("m_" + std::to_string(j + 1));
  for (Eigen::Index j = 0; j < k; ++j) header.push_back("sigma2_" + std::to_string(j + 1));
  std::vector<std::vector<double>> rows;
  for (Eigen::Index t = 0; t < fit.curves.grid.size(); ++t) {
    std::vector<double> row{fit.curves.grid.points()[t]};
    for (Eigen::Index j = 0; j < k; ++j) row.push_back(fit.curves.pi(j, t));
    for (Eigen::Index j = 0; j < k; ++j) row.push_back(fit.curves.m(j, t));
    for (Eigen::Index j = 0; j < k; ++j) row.push_back(fit.curves.sigma2(j, t));
    rows.push_back(std::move(row));
  }
  write_csv(join(out_dir, "curves.csv"), header, rows);
  write_trace(join(out_dir, "loglik_trace.csv"), fit.loglik_trace);
  if (cv) write_cv_table(join(out_dir, "cv_table.csv"), *cv);
}

void write_mrsip_report(const std::string& out_dir, const RunMeta& meta, const MrsipFit& fit,
                        const BandwidthSelection* cv) {
  ensure_dir(out_dir);
  auto kv = meta_entries(meta);
  kv.emplace_back("alpha", alpha_string(fit.alpha.alpha()));
  kv.emplace_back("alpha_sign_convention", "first nonzero entry positive");
  kv.emplace_back("loglik", format_double(fit.loglik));
  kv.emplace_back("converged", fit.converged ? "true" : "false");
  kv.emplace_back("n_outer_iters", std::to_string(fit.n_outer_iters));
  kv.emplace_back("underflow_rows", std::to_string(fit.underflow_rows));
  if (fit.params.has_coincident_components()) {
    kv.emplace_back("warning", "two components have coinciding (beta, sigma2) pairs");
  }
  if (cv) append_cv_meta(kv, *cv);
  write_kv(join(out_dir, "summary.txt"), kv);

  const Eigen::Index k = fit.pi_curve.k();
  std::vector<std::string> header{"u"};
  for (Eigen::Index j = 0; j < k; ++j) header.push_back("pi_" + std::to_string(j + 1));
  std::vector<std::vector<double>> rows;
  for (Eigen::Index t = 0; t < fit.pi_curve.grid.size(); ++t) {
    std::vector<double> row{fit.pi_curve.grid.points()[t]};
    for (Eigen::Index j = 0; j < k; ++j) row.push_back(fit.pi_curve.pi(j, t));
    rows.push_back(std::move(row));
  }
  write_csv(join(out_dir, "curves.csv"), header, rows);

  std::vector<std::string> pheader{"component"};
  for (Eigen::Index c = 0; c < fit.params.beta.cols(); ++c) {
    pheader.push_back("beta_" + std::to_string(c));
  }
  pheader.push_back("sigma2");
  std::vector<std::vector<double>> prows;
  for (Eigen::Index j = 0; j < k; ++j) {
    std::vector<double> row{static_cast<double>(j + 1)};
    for (Eigen::Index c = 0; c < fit.params.beta.cols(); ++c) row.push_back(fit.params.beta(j, c));
    row.push_back(fit.params.sigma2[j]);
    prows.push_back(std::move(row));
  }
  write_csv(join(out_dir, "params.csv"), pheader, prows);
  write_trace(join(out_dir, "loglik_trace.csv"), fit.loglik_trace);
  if (cv) write_cv_table(join(out_dir, "cv_table.csv"), *cv);
}

void write_bandwidth_report(const std::string& out_dir, const RunMeta& meta,
                            const BandwidthSelection& sel) {
  ensure_dir(out_dir);
  auto kv = meta_entries(meta);
  append_cv_meta(kv, sel);
  write_kv(join(out_dir, "summary.txt"), kv);
  write_cv_table(join(out_dir, "cv_table.csv"), sel);
}

void write_replication_report(const std::string& out_dir, const ReplicationReport& report) {
  ensure_dir(out_dir);
  const ReplicationConfig& cfg = report.config;

  std::vector<std::pair<std::string, std::string>> kv;
  kv.emplace_back("command", "simulate");
  kv.emplace_back("example", cfg.example == ExampleId::example1 ? "1" : "2");
  kv.emplace_back("n", std::to_string(cfg.n));
  kv.emplace_back("reps", std::to_string(cfg.reps));
  kv.emplace_back("k", std::to_string(cfg.k));
  kv.emplace_back("kernel", kernel_family_name(cfg.kernel));
  kv.emplace_back("grid_n", std::to_string(cfg.grid_n));
  kv.emplace_back("seed", std::to_string(cfg.seed));
  kv.emplace_back("truth_alpha", alpha_string(report.truth_alpha));
  for (const auto& agg : report.aggregates) {
    std::string prefix = estimator_name(agg.est);
    if (estimator_uses_bandwidth(agg.est)) {
      prefix += "@h=" + format_double(agg.bandwidth);
    }
    kv.emplace_back(prefix + ".ok", std::to_string(agg.n_ok));
    kv.emplace_back(prefix + ".failed", std::to_string(agg.n_failed));
    if (agg.mse_alpha_x100.size() > 0) {
      kv.emplace_back(prefix + ".mse_alpha_x100", alpha_string(agg.mse_alpha_x100));
    }
    if (std::isfinite(agg.mean_rase_pi)) {
      kv.emplace_back(prefix + ".mean_rase_pi", format_double(agg.mean_rase_pi));
      kv.emplace_back(prefix + ".sd_rase_pi", format_double(agg.sd_rase_pi));
    }
    if (std::isfinite(agg.mean_rase_m)) {
      kv.emplace_back(prefix + ".mean_rase_m", format_double(agg.mean_rase_m));
      kv.emplace_back(prefix + ".sd_rase_m", format_double(agg.sd_rase_m));
      kv.emplace_back(prefix + ".mean_rase_sigma2", format_double(agg.mean_rase_sigma2));
      kv.emplace_back(prefix + ".sd_rase_sigma2", format_double(agg.sd_rase_sigma2));
    }
    if (agg.mse_beta_x100.size() > 0) {
      std::string betas;
      for (Eigen::Index j = 0; j < agg.mse_beta_x100.rows(); ++j) {
        for (Eigen::Index c = 0; c < agg.mse_beta_x100.cols(); ++c) {
          betas += (betas.empty() ? "" : " ") + format_double(agg.mse_beta_x100(j, c));
        }
      }
      kv.emplace_back(prefix + ".mse_beta_x100", betas);
      kv.emplace_back(prefix + ".mse_sigma2_x100", alpha_string(agg.mse_sigma2_x100));
    }
  }
  write_kv(join(out_dir, "summary.txt"), kv);

  // one row per (replication, estimator, bandwidth)
  const Eigen::Index p = report.truth_alpha.size();
  std::vector<std::string> header{"rep", "estimator_id", "bandwidth", "ok"};
  for (Eigen::Index c = 0; c < p; ++c) header.push_back("alpha_" + std::to_string(c + 1));
  header.insert(header.end(), {"rase_pi", "rase_m", "rase_sigma2"});
  std::vector<std::vector<double>> rows;
  for (const auto& row : report.rows) {
    std::vector<double> out{static_cast<double>(row.rep), static_cast<double>(row.est),
                            row.bandwidth, row.ok ? 1.0 : 0.0};
    for (Eigen::Index c = 0; c < p; ++c) {
      out.push_back(row.alpha_hat.size() > c ? row.alpha_hat[c]
                                             : std::numeric_limits<double>::quiet_NaN());
    }
    out.push_back(row.rase_pi);
    out.push_back(row.rase_m);
    out.push_back(row.rase_sigma2);
    rows.push_back(std::move(out));
  }
  write_csv(join(out_dir, "replications.csv"), header, rows);
}

void write_mccv_report(const std::string& out_dir, const RunMeta& meta,
                       const MccvResult& result) {
  ensure_dir(out_dir);
  auto kv = meta_entries(meta);
  for (std::size_t p = 0; p < result.names.size(); ++p) {
    double acc = 0.0;
    int count = 0;
    for (const double v : result.mspe[p]) {
      if (std::isfinite(v)) {
        acc += v;
        ++count;
      }
    }
    kv.emplace_back(result.names[p] + ".mean_mspe",
                    count ? format_double(acc / count) : "nan");
    kv.emplace_back(result.names[p] + ".failures", std::to_string(result.failures[p]));
  }
  write_kv(join(out_dir, "summary.txt"), kv);

  std::vector<std::string> header{"partition"};
  for (const auto& name : result.names) header.push_back(name);
  std::vector<std::vector<double>> rows;
  if (!result.mspe.empty()) {
    for (std::size_t part = 0; part < result.mspe.front().size(); ++part) {
      std::vector<double> row{static_cast<double>(part)};
      for (std::size_t p = 0; p < result.names.size(); ++p) row.push_back(result.mspe[p][part]);
      rows.push_back(std::move(row));
    }
  }
  write_csv(join(out_dir, "mccv.csv"), header, rows);
}

}  // namespace simix

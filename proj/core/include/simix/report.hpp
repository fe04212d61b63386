#pragma once

#include <optional>
#include <string>

#include "simix/bandwidth.hpp"
#include "simix/replicate.hpp"

namespace simix {

// Everything a report needs to be replayed: model choice, controls, seed.
// Reports never include timestamps, so identical runs are byte-identical.
struct RunMeta {
  std::string command;
  std::string model;  // "msim" or "mrsip"
  std::string estimator;  // "os" or "fib" for msim
  int k = 2;
  KernelFamily kernel = KernelFamily::epanechnikov;
  double bandwidth = 0.0;
  bool bandwidth_from_cv = false;
  Eigen::Index grid_n = 100;
  std::uint64_t seed = 0;
  bool standardized = false;
  std::string input_path;
  std::string response_name;
  std::vector<std::string> column_names;
};

// summary.txt + curves.csv (+ params.csv for linear components,
// loglik_trace.csv, cv_table.csv when CV ran)
void write_msim_report(const std::string& out_dir, const RunMeta& meta, const MsimFit& fit,
                       const BandwidthSelection* cv);
void write_mrsip_report(const std::string& out_dir, const RunMeta& meta, const MrsipFit& fit,
                        const BandwidthSelection* cv);

// summary.txt + cv_table.csv
void write_bandwidth_report(const std::string& out_dir, const RunMeta& meta,
                            const BandwidthSelection& sel);

// summary.txt + replications.csv + aggregates.csv
void write_replication_report(const std::string& out_dir, const ReplicationReport& report);

// summary.txt + mccv.csv
void write_mccv_report(const std::string& out_dir, const RunMeta& meta, const MccvResult& result);

}  // namespace simix

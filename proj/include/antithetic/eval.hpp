#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "antithetic/losses.hpp"
#include "antithetic/manifest.hpp"

namespace antithetic {

// Query x gallery cosine distances, every entry 1 - cos in [0, 2].
using DistanceMatrix = Eigen::MatrixXd;

struct RankingResult {
  std::vector<double> cmc;  // cmc[k] = fraction with a correct match in top k+1
  double map = 0.0;
  int skipped_queries = 0;  // queries with no valid gallery match
};

struct DistanceStats {
  double intra = 0.0;    // mean 1-cos over same-identity feature pairs
  double inter = 0.0;    // mean over cross-identity feature pairs
  double centers = 0.0;  // mean over identity-center pairs
};

// Mean pair distances split by the resolution bins of the two endpoints.
// Row order: (HR,HR), (LR,LR), cross. Empty categories stay unset.
struct ResolutionTable {
  std::array<std::optional<double>, 3> intra;
  std::array<std::optional<double>, 3> inter;
  std::array<long, 3> intra_pairs{0, 0, 0};
  std::array<long, 3> inter_pairs{0, 0, 0};
};

// Batch-hard selection tallies, rows indexed by anchor bin (HR=0, LR=1) and
// columns by the chosen sample's bin. Normalized rows sum to 1.
struct SelectionHistogram {
  std::array<std::array<long, 2>, 2> positive_counts{{{0, 0}, {0, 0}}};
  std::array<std::array<long, 2>, 2> negative_counts{{{0, 0}, {0, 0}}};
  std::array<std::array<double, 2>, 2> positive_normalized{{{0, 0}, {0, 0}}};
  std::array<std::array<double, 2>, 2> negative_normalized{{{0, 0}, {0, 0}}};
};

struct ProbeReports {
  std::optional<RankingResult> lr;
  std::optional<RankingResult> hr;
  RankingResult all;
};

DistanceMatrix distance_matrix(const Eigen::MatrixXd& queries, const Eigen::MatrixXd& gallery);

/// Single-query ranking. Gallery entries sharing both identity and camera
/// with the query are excluded before ranking; remaining entries sort by
/// (distance, gallery index). Queries left without any correct match are
/// skipped and counted. AP is the mean of precision at each relevant rank.
RankingResult cmc_map(const DistanceMatrix& dm, std::span<const int> q_ids,
                      std::span<const int> g_ids, std::span<const int> q_cams,
                      std::span<const int> g_cams);

/// d_intra / d_inter over feature pairs plus d_centers over the full bank.
/// Throws, naming the statistic, when a category has no pairs.
DistanceStats distance_stats(const Eigen::MatrixXd& features, const std::vector<int>& labels,
                             const CenterBank& bank);

ResolutionTable distance_by_resolution(const Eigen::MatrixXd& features,
                                       const std::vector<int>& labels,
                                       const std::vector<PartitionLabel>& bins);

SelectionHistogram triplet_histogram(const std::vector<Triplet>& selected,
                                     const std::vector<PartitionLabel>& bins);

/// cmc_map restricted to LR-binned and HR-binned queries, plus the full set.
/// A sub-report is absent when its bin holds no query.
ProbeReports probe_breakdown(const DistanceMatrix& dm, std::span<const int> q_ids,
                             std::span<const int> g_ids, std::span<const int> q_cams,
                             std::span<const int> g_cams,
                             const std::vector<PartitionLabel>& q_bins);

// Serialized artifacts.
struct EvalReport {
  RankingResult ranking;
  std::optional<DistanceStats> stats;
  std::optional<ProbeReports> probes;
};

std::string to_json_string(const EvalReport& report);
std::string to_csv(const ResolutionTable& table);
std::string to_csv(const SelectionHistogram& histogram);

}  // namespace antithetic

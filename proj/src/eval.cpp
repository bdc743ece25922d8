#include "antithetic/eval.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace antithetic {

namespace {

double pair_distance(const Eigen::MatrixXd& rows, Eigen::Index i, Eigen::Index j) {
  const double ni = std::max(rows.row(i).norm(), kNormEps);
  const double nj = std::max(rows.row(j).norm(), kNormEps);
  return 1.0 - std::clamp(rows.row(i).dot(rows.row(j)) / (ni * nj), -1.0, 1.0);
}

}  // namespace

DistanceMatrix distance_matrix(const Eigen::MatrixXd& queries, const Eigen::MatrixXd& gallery) {
  if (queries.cols() != gallery.cols())
    throw std::invalid_argument("query and gallery dimensions do not match");
  DistanceMatrix dm(queries.rows(), gallery.rows());
  for (Eigen::Index q = 0; q < queries.rows(); ++q) {
    const double nq = std::max(queries.row(q).norm(), kNormEps);
    for (Eigen::Index g = 0; g < gallery.rows(); ++g) {
      const double ng = std::max(gallery.row(g).norm(), kNormEps);
      dm(q, g) = 1.0 - std::clamp(queries.row(q).dot(gallery.row(g)) / (nq * ng), -1.0, 1.0);
    }
  }
  return dm;
}

RankingResult cmc_map(const DistanceMatrix& dm, std::span<const int> q_ids,
                      std::span<const int> g_ids, std::span<const int> q_cams,
                      std::span<const int> g_cams) {
  const Eigen::Index q_count = dm.rows();
  const Eigen::Index g_count = dm.cols();
  if (static_cast<Eigen::Index>(q_ids.size()) != q_count ||
      static_cast<Eigen::Index>(q_cams.size()) != q_count ||
      static_cast<Eigen::Index>(g_ids.size()) != g_count ||
      static_cast<Eigen::Index>(g_cams.size()) != g_count)
    throw std::invalid_argument("id/camera lists do not match the distance matrix");

  RankingResult result;
  result.cmc.assign(g_count, 0.0);
  double ap_sum = 0.0;
  int valid = 0;

  std::vector<std::pair<double, int>> order;
  for (Eigen::Index q = 0; q < q_count; ++q) {
    order.clear();
    for (Eigen::Index g = 0; g < g_count; ++g) {
      if (g_ids[g] == q_ids[q] && g_cams[g] == q_cams[q]) continue;  // junk
      order.emplace_back(dm(q, g), static_cast<int>(g));
    }
    std::sort(order.begin(), order.end());  // ties fall back to gallery index

    int relevant = 0;
    for (const auto& [d, g] : order)
      if (g_ids[g] == q_ids[q]) ++relevant;
    if (relevant == 0) {
      ++result.skipped_queries;
      continue;
    }
    ++valid;

    int hits = 0;
    int first_hit = -1;
    double ap = 0.0;
    for (std::size_t pos = 0; pos < order.size(); ++pos) {
      if (g_ids[order[pos].second] != q_ids[q]) continue;
      ++hits;
      if (first_hit < 0) first_hit = static_cast<int>(pos);
      ap += static_cast<double>(hits) / static_cast<double>(pos + 1);
    }
    ap_sum += ap / relevant;
    for (Eigen::Index k = first_hit; k < g_count; ++k) result.cmc[k] += 1.0;
  }

  if (valid == 0) throw std::runtime_error("no query has a valid gallery match");
  for (double& v : result.cmc) v /= valid;
  result.map = ap_sum / valid;
  return result;
}

DistanceStats distance_stats(const Eigen::MatrixXd& features, const std::vector<int>& labels,
                             const CenterBank& bank) {
  const Eigen::Index n = features.rows();
  if (static_cast<Eigen::Index>(labels.size()) != n)
    throw std::invalid_argument("label count does not match feature count");

  double intra_sum = 0.0, inter_sum = 0.0;
  long intra_pairs = 0, inter_pairs = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double d = pair_distance(features, i, j);
      if (labels[i] == labels[j]) {
        intra_sum += d;
        ++intra_pairs;
      } else {
        inter_sum += d;
        ++inter_pairs;
      }
    }
  }
  if (intra_pairs == 0) throw std::runtime_error("d_intra: no same-identity pairs");
  if (inter_pairs == 0) throw std::runtime_error("d_inter: no cross-identity pairs");
  if (bank.centers.rows() < 2) throw std::runtime_error("d_centers: fewer than two centers");

  double center_sum = 0.0;
  long center_pairs = 0;
  for (Eigen::Index i = 0; i < bank.centers.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < bank.centers.rows(); ++j) {
      center_sum += pair_distance(bank.centers, i, j);
      ++center_pairs;
    }
  }
  return {intra_sum / intra_pairs, inter_sum / inter_pairs, center_sum / center_pairs};
}

ResolutionTable distance_by_resolution(const Eigen::MatrixXd& features,
                                       const std::vector<int>& labels,
                                       const std::vector<PartitionLabel>& bins) {
  const Eigen::Index n = features.rows();
  if (static_cast<Eigen::Index>(labels.size()) != n ||
      static_cast<Eigen::Index>(bins.size()) != n)
    throw std::invalid_argument("labels/bins do not match feature count");

  std::array<double, 3> intra_sum{0, 0, 0}, inter_sum{0, 0, 0};
  ResolutionTable table;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      int cat;  // 0 = (HR,HR), 1 = (LR,LR), 2 = cross, both directions pooled
      if (bins[i] != bins[j])
        cat = 2;
      else
        cat = bins[i] == PartitionLabel::HR ? 0 : 1;
      const double d = pair_distance(features, i, j);
      if (labels[i] == labels[j]) {
        intra_sum[cat] += d;
        ++table.intra_pairs[cat];
      } else {
        inter_sum[cat] += d;
        ++table.inter_pairs[cat];
      }
    }
  }
  for (int cat = 0; cat < 3; ++cat) {
    if (table.intra_pairs[cat] > 0) table.intra[cat] = intra_sum[cat] / table.intra_pairs[cat];
    if (table.inter_pairs[cat] > 0) table.inter[cat] = inter_sum[cat] / table.inter_pairs[cat];
  }
  return table;
}

SelectionHistogram triplet_histogram(const std::vector<Triplet>& selected,
                                     const std::vector<PartitionLabel>& bins) {
  if (selected.empty()) throw std::invalid_argument("empty selection log");
  auto bin_of = [&](int idx) {
    if (idx < 0 || idx >= static_cast<int>(bins.size()))
      throw std::out_of_range("triplet index outside the bin list");
    return bins[idx] == PartitionLabel::HR ? 0 : 1;
  };
  SelectionHistogram h;
  for (const Triplet& t : selected) {
    ++h.positive_counts[bin_of(t.anchor)][bin_of(t.positive)];
    ++h.negative_counts[bin_of(t.anchor)][bin_of(t.negative)];
  }
  for (int row = 0; row < 2; ++row) {
    const double pos_total = h.positive_counts[row][0] + h.positive_counts[row][1];
    const double neg_total = h.negative_counts[row][0] + h.negative_counts[row][1];
    for (int col = 0; col < 2; ++col) {
      if (pos_total > 0) h.positive_normalized[row][col] = h.positive_counts[row][col] / pos_total;
      if (neg_total > 0) h.negative_normalized[row][col] = h.negative_counts[row][col] / neg_total;
    }
  }
  return h;
}

ProbeReports probe_breakdown(const DistanceMatrix& dm, std::span<const int> q_ids,
                             std::span<const int> g_ids, std::span<const int> q_cams,
                             std::span<const int> g_cams,
                             const std::vector<PartitionLabel>& q_bins) {
  if (q_bins.size() != static_cast<std::size_t>(dm.rows()))
    throw std::invalid_argument("query bins do not match the distance matrix");

  auto subset = [&](PartitionLabel want) -> std::optional<RankingResult> {
    std::vector<int> rows, ids, cams;
    for (std::size_t q = 0; q < q_bins.size(); ++q) {
      if (q_bins[q] != want) continue;
      rows.push_back(static_cast<int>(q));
      ids.push_back(q_ids[q]);
      cams.push_back(q_cams[q]);
    }
    if (rows.empty()) return std::nullopt;
    DistanceMatrix sub(rows.size(), dm.cols());
    for (std::size_t r = 0; r < rows.size(); ++r) sub.row(r) = dm.row(rows[r]);
    return cmc_map(sub, ids, g_ids, cams, g_cams);
  };

  ProbeReports reports;
  reports.lr = subset(PartitionLabel::LR);
  reports.hr = subset(PartitionLabel::HR);
  reports.all = cmc_map(dm, q_ids, g_ids, q_cams, g_cams);
  return reports;
}

namespace {

nlohmann::json ranking_json(const RankingResult& r) {
  return {{"cmc", r.cmc}, {"map", r.map}, {"skipped_queries", r.skipped_queries}};
}

}  // namespace

std::string to_json_string(const EvalReport& report) {
  nlohmann::json j;
  j["cmc"] = report.ranking.cmc;
  j["map"] = report.ranking.map;
  j["skipped_queries"] = report.ranking.skipped_queries;
  if (report.stats) {
    j["d_intra"] = report.stats->intra;
    j["d_inter"] = report.stats->inter;
    j["d_centers"] = report.stats->centers;
  }
  if (report.probes) {
    nlohmann::json p;
    if (report.probes->lr) p["LR"] = ranking_json(*report.probes->lr);
    if (report.probes->hr) p["HR"] = ranking_json(*report.probes->hr);
    p["ALL"] = ranking_json(report.probes->all);
    j["probe_breakdown"] = p;
  }
  return j.dump(2);
}

std::string to_csv(const ResolutionTable& table) {
  static const char* kRows[3] = {"(HR,HR)", "(LR,LR)", "cross"};
  std::ostringstream out;
  out << "pair,intra,intra_pairs,inter,inter_pairs\n";
  out.precision(17);
  for (int cat = 0; cat < 3; ++cat) {
    out << kRows[cat] << ",";
    if (table.intra[cat]) out << *table.intra[cat];
    out << "," << table.intra_pairs[cat] << ",";
    if (table.inter[cat]) out << *table.inter[cat];
    out << "," << table.inter_pairs[cat] << "\n";
  }
  return out.str();
}

std::string to_csv(const SelectionHistogram& h) {
  static const char* kBins[2] = {"HR", "LR"};
  std::ostringstream out;
  out << "kind,anchor,to_HR,to_LR,norm_HR,norm_LR\n";
  out.precision(17);
  for (int row = 0; row < 2; ++row)
    out << "positive," << kBins[row] << "," << h.positive_counts[row][0] << ","
        << h.positive_counts[row][1] << "," << h.positive_normalized[row][0] << ","
        << h.positive_normalized[row][1] << "\n";
  for (int row = 0; row < 2; ++row)
    out << "negative," << kBins[row] << "," << h.negative_counts[row][0] << ","
        << h.negative_counts[row][1] << "," << h.negative_normalized[row][0] << ","
        << h.negative_normalized[row][1] << "\n";
  return out.str();
}

}  // namespace antithetic

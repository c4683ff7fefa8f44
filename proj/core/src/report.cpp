#include "weyl/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <system_error>

#include <json.hpp>

#include "weyl/errors.hpp"

namespace weyl {

namespace {

using ordered = nlohmann::ordered_json;

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

ordered number_or_null(std::optional<double> v) {
  if (!v || !std::isfinite(*v)) return nullptr;
  return *v;
}

ordered finite(double v) { return std::isfinite(v) ? ordered(v) : ordered(nullptr); }

ordered row_json(const SweepRow& r) {
  ordered j;
  j["hbar"] = r.hbar;
  j["n_count"] = r.n_count;
  j["scaled_count"] = r.scaled_count;
  j["volume"] = r.volume;
  j["remainder"] = r.remainder;
  j["counting_method"] = to_string(r.counting_method);
  j["truncation_ratio"] = number_or_null(r.truncation_ratio);
  j["unknowns"] = r.unknowns;
  j["spacing"] = r.spacing;
  j["shift"] = r.shift;
  j["refinements"] = r.refinements;
  j["near_crossing"] = r.near_crossing;
  j["compact_count"] = r.compact_count ? ordered(*r.compact_count) : ordered(nullptr);
  j["compact_scaled"] = number_or_null(r.compact_scaled);
  j["relative_forward"] = to_string(r.relative_forward);
  j["relative_reverse"] = to_string(r.relative_reverse);
  j["ims_suite"] = to_string(r.ims);
  j["rank_lemma"] = to_string(r.rank_lemma);
  return j;
}

ordered relative_json(const RelativeRow& r) {
  ordered j;
  j["hbar"] = r.hbar;
  j["c"] = r.c;
  j["c_hbar_sq"] = r.c_hbar_sq;
  j["n1"] = r.n1;
  j["n2_shifted"] = r.n2_shifted;
  j["forward"] = to_string(r.forward);
  j["delta"] = r.delta;
  j["c_prime"] = r.c_prime;
  j["c_prime_hbar_sq"] = r.c_prime_hbar_sq;
  j["n2_upper"] = r.n2_upper;
  j["n1_upper_shifted"] = r.n1_upper_shifted;
  j["reverse"] = to_string(r.reverse);
  j["sandwich_gap"] = r.sandwich_gap;
  j["sandwich_closed"] = r.sandwich_closed;
  j["refinements"] = r.refinements;
  return j;
}

ordered ims_json(const ImsRow& r) {
  ordered j;
  j["hbar"] = r.hbar;
  j["residual"] = r.residual;
  j["unity_error"] = r.unity_error;
  j["partition_ok"] = r.partition_ok;
  j["partition_detail"] = r.partition_detail;
  j["deviation"] = r.deviation;
  j["norm_phi"] = r.norm_phi;
  j["norm_psi"] = r.norm_psi;
  j["limit"] = r.limit;
  j["bound_holds"] = r.bound_holds;
  j["status"] = to_string(r.status);
  return j;
}

ordered rank_json(const RankRow& r) {
  ordered j;
  j["hbar"] = r.hbar;
  j["evaluated"] = r.evaluated;
  j["min_eig_projected"] = finite(r.min_eig_projected);
  j["min_eig_transported"] = finite(r.min_eig_transported);
  j["psi_margin"] = finite(r.psi_margin);
  j["c_hbar_sq"] = r.c_hbar_sq;
  j["vacuous"] = r.vacuous;
  j["lemma"] = to_string(r.lemma);
  j["lemma_count"] = r.lemma_count;
  j["lemma_rank"] = r.lemma_rank;
  j["status"] = to_string(r.status);
  return j;
}

std::string failure_name(FailureKind k) {
  switch (k) {
    case FailureKind::None: return "none";
    case FailureKind::Config: return "config";
    case FailureKind::Numerical: return "numerical";
  }
  return "none";
}

}  // namespace

std::string csv_header() {
  return "hbar,n_count,scaled_count,volume,remainder,counting_method,truncation_ratio,"
         "relative_forward,relative_reverse,ims_suite,rank_lemma";
}

std::string to_csv(const SweepReport& report) {
  std::ostringstream os;
  os << csv_header() << "\n";
  for (const auto& r : report.rows) {
    os << fmt(r.hbar) << "," << r.n_count << "," << fmt(r.scaled_count) << "," << fmt(r.volume) << ","
       << fmt(r.remainder) << "," << to_string(r.counting_method) << ","
       << (r.truncation_ratio ? fmt(*r.truncation_ratio) : std::string()) << "," << to_string(r.relative_forward)
       << "," << to_string(r.relative_reverse) << "," << to_string(r.ims) << "," << to_string(r.rank_lemma) << "\n";
  }
  return os.str();
}

std::string to_json(const SweepReport& report) {
  ordered j;
  j["schema_version"] = kReportSchemaVersion;
  j["name"] = report.name;
  j["lambda"] = report.lambda;
  j["model"] = report.model;
  j["pair"] = report.pair;
  j["complete"] = report.complete;
  if (report.failure == FailureKind::None) {
    j["failure"] = nullptr;
  } else {
    j["failure"]["kind"] = failure_name(report.failure);
    j["failure"]["detail"] = report.failure_detail;
  }
  j["volume"]["value"] = report.volume;
  j["volume"]["error_estimate"] = report.volume_error;
  if (report.monte_carlo_volume) {
    j["volume"]["monte_carlo"]["value"] = *report.monte_carlo_volume;
    j["volume"]["monte_carlo"]["error_estimate"] = *report.monte_carlo_error;
  } else {
    j["volume"]["monte_carlo"] = nullptr;
  }
  j["compact_volume"] = number_or_null(report.compact_volume);
  j["epsilon"] = number_or_null(report.epsilon);
  j["delta"] = number_or_null(report.delta);
  j["sandwich_closes_at"] = number_or_null(report.sandwich_closes_at);
  j["rows"] = ordered::array();
  for (const auto& r : report.rows) j["rows"].push_back(row_json(r));
  j["relative"] = ordered::array();
  for (const auto& r : report.relative) j["relative"].push_back(relative_json(r));
  j["ims"] = ordered::array();
  for (const auto& r : report.ims) j["ims"].push_back(ims_json(r));
  j["rank"] = ordered::array();
  for (const auto& r : report.rank) j["rank"].push_back(rank_json(r));
  j["commutator_slope"] = number_or_null(report.commutator_slope);
  j["fit"]["below_resolution"] = report.fit.below_resolution;
  j["fit"]["slope"] = report.fit.below_resolution ? ordered(nullptr) : finite(report.fit.slope);
  j["fit"]["r_squared"] = report.fit.below_resolution ? ordered(nullptr) : finite(report.fit.r_squared);
  j["fit"]["points"] = report.fit.points;
  j["verdicts"] = ordered::array();
  for (const auto& v : report.verdicts) {
    ordered e;
    e["check"] = to_string(v.check);
    e["subject"] = v.subject;
    e["status"] = to_string(v.status);
    e["margin"] = finite(v.margin);
    e["detail"] = v.detail;
    j["verdicts"].push_back(e);
  }
  j["provenance"]["config_hash"] = report.provenance.config_hash;
  j["provenance"]["seed"] = report.provenance.seed;
  j["provenance"]["version"] = report.provenance.version;
  return j.dump(2) + "\n";
}

std::string to_dat(const SweepReport& report) {
  std::ostringstream os;
  os << "# hbar remainder\n";
  for (const auto& r : report.rows) os << fmt(r.hbar) << " " << fmt(r.remainder) << "\n";
  return os.str();
}

std::string gnuplot_script(const SweepReport& report) {
  std::ostringstream os;
  os << "set logscale xy\n"
     << "set xlabel 'hbar'\n"
     << "set ylabel '|remainder|'\n"
     << "set title '" << report.name << "'\n"
     << "plot '" << report.name << ".dat' using 1:(abs($2)) with linespoints title 'scaled count - volume'\n";
  return os.str();
}

void write_atomic(const std::filesystem::path& path, const std::string& contents) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << contents;
    out.flush();
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw std::runtime_error("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

void write_report_files(const SweepReport& report, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_atomic(dir / (report.name + ".csv"), to_csv(report));
  write_atomic(dir / (report.name + ".json"), to_json(report));
  write_atomic(dir / (report.name + ".dat"), to_dat(report));
  write_atomic(dir / (report.name + ".gp"), gnuplot_script(report));
}

void write_matrix_file(const DiscreteOperator& op, const std::filesystem::path& path) {
  std::ostringstream os;
  write_coordinate_text(op, os);
  write_atomic(path, os.str());
}

}  // namespace weyl

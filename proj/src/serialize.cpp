#include "tolerant/serialize.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace tolerant {

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<double> weights_of(const Vector& v) {
  return {v.data(), v.data() + v.size()};
}

}  // namespace

Pmf load_pmf(const std::string& path) {
  const std::string text = read_file(path);
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) throw std::runtime_error("empty pmf file " + path);

  std::vector<double> values;
  if (text[first] == '[') {
    const nlohmann::json j = nlohmann::json::parse(text);
    values = j.get<std::vector<double>>();
  } else {
    std::istringstream lines(text);
    std::string line;
    while (std::getline(lines, line)) {
      const auto start = line.find_first_not_of(" \t\r");
      if (start == std::string::npos) continue;
      values.push_back(std::stod(line.substr(start)));
    }
  }
  Vector w = Eigen::Map<Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
  return Pmf(std::move(w));
}

void save_pmf(const std::string& path, const Pmf& p) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out.precision(17);
  for (Eigen::Index i = 0; i < p.size(); ++i) out << p[i] << "\n";
}

nlohmann::json to_json(const Pmf& p) { return weights_of(p.weights()); }

nlohmann::json to_json(const Histogram& h) {
  // Histograms travel as plain JSON arrays of integers.
  return std::vector<std::int64_t>(h.counts.data(),
                                   h.counts.data() + h.counts.size());
}

nlohmann::json to_json(const SplitMap& map) {
  nlohmann::json j;
  j["block_sizes"] = std::vector<std::int64_t>(
      map.block_sizes.data(), map.block_sizes.data() + map.block_sizes.size());
  j["new_domain_size"] = map.new_domain_size();
  return j;
}

nlohmann::json to_json(const Bucketing& b) {
  nlohmann::json j;
  j["ell"] = b.ell;
  j["eps2"] = b.eps2;
  j["low_mass"] = b.low_mass;
  j["low_mass_total"] = b.low_mass_total;
  j["buckets"] = b.buckets;
  j["bucket_mass"] = b.bucket_mass;
  return j;
}

nlohmann::json to_json(const EmbeddingSpec& spec) {
  nlohmann::json j;
  j["subset"] = spec.subset;
  j["mas"] = spec.mas;
  j["subset_mass"] = spec.subset_mass;
  j["rat"] = spec.rat;
  j["blocks"] = spec.blocks;
  j["block_mass"] = spec.block_mass;
  return j;
}

nlohmann::json to_json(const MomentMatchedPair& pair) {
  nlohmann::json j;
  j["support"] = weights_of(pair.support);
  j["w"] = weights_of(pair.w);
  j["w_prime"] = weights_of(pair.w_prime);
  j["objective"] = pair.objective;
  j["mean_y"] = pair.mean_y;
  j["eps1_problem"] = pair.eps1_problem;
  j["eps1_effective"] = pair.eps1_effective;
  j["eps2_effective"] = pair.eps2_effective;
  j["max_moment_residual"] = pair.max_moment_residual;
  j["support_u"] = weights_of(pair.support_u);
  j["n"] = pair.n;
  j["m"] = pair.m;
  j["kappa"] = pair.kappa;
  j["M"] = pair.big_m;
  j["L"] = pair.degree;
  return j;
}

nlohmann::json to_json(const IoVerdict& v) {
  nlohmann::json j;
  j["decision"] = v.decision == Decision::kFar ? "far" : "close";
  j["ell"] = v.ell;
  j["mass_batch_size"] = v.mass_batch_size;
  j["core_budget"] = v.core_budget;
  j["repetitions"] = v.repetitions;
  nlohmann::json subtests = nlohmann::json::array();
  for (const auto& s : v.subtests) {
    subtests.push_back({{"kind", s.kind},
                        {"bucket", s.bucket},
                        {"accepted", s.accepted},
                        {"statistic", s.statistic},
                        {"threshold", s.threshold}});
  }
  j["subtests"] = subtests;
  return j;
}

nlohmann::json verdict_json(const Verdict& v, double m, Eigen::Index n,
                            double eps2, double c, std::uint64_t seed) {
  nlohmann::json j;
  j["decision"] = v.decision == Decision::kFar ? "far" : "close";
  j["z"] = v.z;
  j["tau"] = v.tau;
  j["m"] = m;
  j["n"] = n;
  j["eps2"] = eps2;
  j["c"] = c;
  j["seed"] = seed;
  return j;
}

std::string error_rate_csv(const std::vector<ErrorRateRow>& rows) {
  std::ostringstream out;
  out.precision(17);
  out << "m,close_error,close_lo,close_hi,far_error,far_lo,far_hi,trials\n";
  for (const auto& r : rows) {
    out << r.m << ',' << r.close_error << ',' << r.close_ci.lo << ','
        << r.close_ci.hi << ',' << r.far_error << ',' << r.far_ci.lo << ','
        << r.far_ci.hi << ',' << r.trials << '\n';
  }
  return out.str();
}

std::string phase_diagram_csv(const std::vector<PhaseDiagramRow>& rows) {
  std::ostringstream out;
  out.precision(17);
  out << "eps1,eps2,m_star,capped,dominant_term\n";
  for (const auto& r : rows) {
    out << r.eps1 << ',' << r.eps2 << ',' << r.m_star << ','
        << (r.capped ? 1 : 0) << ',' << r.label << '\n';
  }
  return out.str();
}

std::vector<PhaseDiagramRow> parse_phase_diagram_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty csv");
  std::vector<PhaseDiagramRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string f;
    PhaseDiagramRow r;
    std::getline(fields, f, ',');
    r.eps1 = std::stod(f);
    std::getline(fields, f, ',');
    r.eps2 = std::stod(f);
    std::getline(fields, f, ',');
    r.m_star = std::stod(f);
    std::getline(fields, f, ',');
    r.capped = std::stoi(f) != 0;
    std::getline(fields, r.label, ',');
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace tolerant

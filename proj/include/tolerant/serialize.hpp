#pragma once

#include <string>

#include <json.hpp>

#include "tolerant/harness.hpp"
#include "tolerant/instance_optimal.hpp"
#include "tolerant/lower_bound.hpp"
#include "tolerant/pmf.hpp"
#include "tolerant/sampling.hpp"
#include "tolerant/splitting.hpp"
#include "tolerant/tester.hpp"

namespace tolerant {

// Pmf file format: one nonnegative decimal per line, or a JSON array.
// Loading validates normalization.
Pmf load_pmf(const std::string& path);
void save_pmf(const std::string& path, const Pmf& p);

nlohmann::json to_json(const Pmf& p);
nlohmann::json to_json(const Histogram& h);
nlohmann::json to_json(const SplitMap& map);
nlohmann::json to_json(const Bucketing& b);
nlohmann::json to_json(const EmbeddingSpec& spec);
nlohmann::json to_json(const MomentMatchedPair& pair);
nlohmann::json to_json(const IoVerdict& v);

// Verdict with its run context {decision, z, tau, m, n, eps2, c, seed}.
nlohmann::json verdict_json(const Verdict& v, double m, Eigen::Index n,
                            double eps2, double c, std::uint64_t seed);

std::string error_rate_csv(const std::vector<ErrorRateRow>& rows);
std::string phase_diagram_csv(const std::vector<PhaseDiagramRow>& rows);
std::vector<PhaseDiagramRow> parse_phase_diagram_csv(const std::string& text);

}  // namespace tolerant

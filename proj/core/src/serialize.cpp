#include "identlab/serialize.hpp"

#include <string>

#include "identlab/error.hpp"

namespace identlab {

using nlohmann::json;

namespace {

// Rejects keys outside `allowed` so typos in configs do not pass silently.
void check_keys(const json& j, std::initializer_list<const char*> allowed, const char* what) {
  if (!j.is_object()) throw Error(ErrorCode::ConfigInvalid, std::string(what) + ": expected an object");
  for (const auto& item : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || item.key() == a;
    if (!ok) throw Error(ErrorCode::ConfigInvalid, std::string(what) + ": unknown field '" + item.key() + "'");
  }
}

}  // namespace

Eigen::MatrixXd matrix_from_json(const json& rows) {
  if (!rows.is_array() || rows.empty()) throw Error(ErrorCode::ConfigInvalid, "matrix: expected a non-empty array of rows");
  const std::size_t cols = rows.front().size();
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (!rows[r].is_array() || rows[r].size() != cols) throw Error(ErrorCode::ConfigInvalid, "matrix: ragged rows");
    for (std::size_t c = 0; c < cols; ++c) m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c].get<double>();
  }
  return m;
}

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

void to_json(json& j, const EquicorrSpec& s) { j = json{{"n", s.n}, {"mu", s.mu}, {"sigma2", s.sigma2}, {"rho", s.rho}}; }

void from_json(const json& j, EquicorrSpec& s) {
  check_keys(j, {"n", "mu", "sigma2", "rho"}, "EquicorrSpec");
  s.n = j.at("n").get<std::size_t>();
  s.mu = j.value("mu", 0.0);
  s.sigma2 = j.at("sigma2").get<double>();
  s.rho = j.at("rho").get<double>();
}

void to_json(json& j, const TwoLevelSpec& s) {
  j = json{{"mu", s.mu}, {"tau1_2", s.tau1_2}, {"tau2_2", s.tau2_2}, {"group_sizes", s.group_sizes}};
}

void from_json(const json& j, TwoLevelSpec& s) {
  check_keys(j, {"mu", "tau1_2", "tau2_2", "group_sizes"}, "TwoLevelSpec");
  s.mu = j.value("mu", 0.0);
  s.tau1_2 = j.at("tau1_2").get<double>();
  s.tau2_2 = j.at("tau2_2").get<double>();
  s.group_sizes = j.at("group_sizes").get<std::vector<std::size_t>>();
}

void to_json(json& j, const BinarySpec& s) {
  j = json{{"variant", std::string(to_string(s.variant))}, {"p", s.p}};
  if (s.variant == BinaryVariant::ChangePoint) j["m_cp"] = s.m_cp;
  if (s.r_override) j["r_override"] = *s.r_override;
  if (s.q_fixed) j["q_fixed"] = *s.q_fixed;
}

void from_json(const json& j, BinarySpec& s) {
  check_keys(j, {"variant", "p", "m_cp", "r_override", "q_fixed"}, "BinarySpec");
  s.variant = binary_variant_from_string(j.at("variant").get<std::string>());
  s.p = j.at("p").get<double>();
  s.m_cp = j.value("m_cp", std::size_t{1});
  s.r_override.reset();
  s.q_fixed.reset();
  if (j.contains("r_override")) s.r_override = j.at("r_override").get<double>();
  if (j.contains("q_fixed")) s.q_fixed = j.at("q_fixed").get<double>();
}

void to_json(json& j, const FixedClassSpec& s) {
  j = json{{"centers", matrix_to_json(s.centers)}, {"sigma2", s.sigma2}, {"labels", s.labels}};
}

void from_json(const json& j, FixedClassSpec& s) {
  check_keys(j, {"centers", "sigma2", "labels"}, "FixedClassSpec");
  s.centers = matrix_from_json(j.at("centers"));
  s.sigma2 = j.at("sigma2").get<double>();
  s.labels = j.at("labels").get<std::vector<std::size_t>>();
}

void to_json(json& j, const MatchedPair& s) {
  j = json{{"rho1", s.rho1}, {"sigma1_2", s.sigma1_2}, {"rho2", s.rho2}, {"sigma2_2", s.sigma2_2}};
}

void from_json(const json& j, MatchedPair& s) {
  check_keys(j, {"rho1", "sigma1_2", "rho2", "sigma2_2"}, "MatchedPair");
  s.rho1 = j.at("rho1").get<double>();
  s.sigma1_2 = j.at("sigma1_2").get<double>();
  s.rho2 = j.at("rho2").get<double>();
  s.sigma2_2 = j.contains("sigma2_2") ? j.at("sigma2_2").get<double>() : matched_pair(s.rho1, s.rho2, s.sigma1_2);
}

void to_json(json& j, const KMeansFit& f) {
  j = json{{"centers", matrix_to_json(f.centers)}, {"labels", f.labels}, {"objective", f.objective}};
}

void to_json(json& j, const Interval& ci) { j = json{{"lo", ci.lo}, {"hi", ci.hi}}; }

void to_json(json& j, const ProbEstimate& p) {
  j = json{{"p_hat", p.p_hat}, {"ci", p.ci}, {"hits", p.hits}, {"reps", p.reps}};
}

void to_json(json& j, const DistinguishReport& r) {
  j = json{{"set", r.set_name},
           {"n", r.n},
           {"reps", r.reps},
           {"level", r.level},
           {"p1", r.p1},
           {"p2", r.p2},
           {"verdict", std::string(to_string(r.verdict.kind))},
           {"alpha", r.verdict.alpha},
           {"beta", r.verdict.beta}};
  if (r.reverse) j["reverse"] = *r.reverse;
}

void to_json(json& j, const ConsistencyRow& r) {
  j = json{{"n", r.n}, {"reps", r.reps}, {"frac_correct", r.frac_correct}, {"ci_lo", r.ci.lo}, {"ci_hi", r.ci.hi}};
}

}  // namespace identlab

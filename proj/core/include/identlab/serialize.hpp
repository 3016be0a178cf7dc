#pragma once

#include <nlohmann/json.hpp>

#include "identlab/distinguish.hpp"
#include "identlab/gaussian.hpp"
#include "identlab/kmeans.hpp"
#include "identlab/models.hpp"

// JSON mappings for model specs and reports. Field names follow the struct
// members; labels are 0-based.
namespace identlab {

void to_json(nlohmann::json& j, const EquicorrSpec& s);
void from_json(const nlohmann::json& j, EquicorrSpec& s);

void to_json(nlohmann::json& j, const TwoLevelSpec& s);
void from_json(const nlohmann::json& j, TwoLevelSpec& s);

void to_json(nlohmann::json& j, const BinarySpec& s);
void from_json(const nlohmann::json& j, BinarySpec& s);

void to_json(nlohmann::json& j, const FixedClassSpec& s);
void from_json(const nlohmann::json& j, FixedClassSpec& s);

void to_json(nlohmann::json& j, const MatchedPair& s);
void from_json(const nlohmann::json& j, MatchedPair& s);

void to_json(nlohmann::json& j, const KMeansFit& f);
void to_json(nlohmann::json& j, const Interval& ci);
void to_json(nlohmann::json& j, const ProbEstimate& p);
void to_json(nlohmann::json& j, const DistinguishReport& r);
void to_json(nlohmann::json& j, const ConsistencyRow& r);

Eigen::MatrixXd matrix_from_json(const nlohmann::json& rows);
nlohmann::json matrix_to_json(const Eigen::MatrixXd& m);

}  // namespace identlab

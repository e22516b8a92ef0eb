#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "steerbias/scenario.hpp"
#include "steerbias/serialize.hpp"
#include "test_oracles.hpp"

using namespace steerbias;
using Eigen::MatrixXd;
using Eigen::VectorXd;

TEST(GroupJson, DocumentedFieldNames) {
  const json j = group_to_json(FiniteGroup::cyclic(3));
  EXPECT_TRUE(j.contains("order"));
  EXPECT_TRUE(j.contains("mul"));
  EXPECT_EQ(j.at("order"), 3);
  EXPECT_EQ(j.at("mul")[1][2], 0);
}

TEST(RepJson, DocumentedFieldNamesRowMajor) {
  const json j = rep_to_json(shear_reflection_rep());
  EXPECT_TRUE(j.contains("group"));
  EXPECT_TRUE(j.contains("dim"));
  EXPECT_TRUE(j.contains("mats"));
  // row-major flat: [[1,0,0,1], [-1,0,2,1]]
  EXPECT_EQ(j.at("mats")[1][0], -1.0);
  EXPECT_EQ(j.at("mats")[1][2], 2.0);
}

TEST(DatasetJson, DocumentedFieldNames) {
  VectorXd x(2);
  x << 1, 2;
  const json j = dataset_to_json(LabeledDataset(std::vector<LabeledPoint>{{x, -1}}));
  EXPECT_EQ(j.at("dim"), 2);
  EXPECT_EQ(j.at("points")[0].at("y"), -1);
  EXPECT_EQ(j.at("points")[0].at("x")[1], 2.0);
}

TEST(RoundTrip, RandomArtifactsSurviveEncodeDecode) {
  std::mt19937_64 rng(404);
  for (int trial = 0; trial < 10; ++trial) {
    const int m = 2 + uniform_index(rng, 3);
    const Representation rep = oracles::random_conjugated_rep(rng, m, 2 * m);
    const Representation back = rep_from_json(rep_to_json(rep), 1e-8);
    EXPECT_TRUE(back == rep);
    EXPECT_EQ(rep_content_hash(back), rep_content_hash(rep));

    const LabeledDataset s = oracles::random_dataset(rng, 1 + uniform_index(rng, 6), 3);
    const LabeledDataset s2 = dataset_from_json(dataset_to_json(s));
    ASSERT_EQ(s2.size(), s.size());
    for (int i = 0; i < s.size(); ++i) {
      EXPECT_EQ(s2[i].y, s[i].y);
      EXPECT_EQ(s2[i].x, s[i].x);  // exact: shortest-round-trip doubles
    }
  }
}

TEST(RoundTrip, WeightsAllArchitectures) {
  std::mt19937_64 rng(405);
  const Representation rep = cyclic_shift_rep(2, 4);
  for (const NetworkSpec& spec :
       {NetworkSpec::fc({4, 3, 2}), NetworkSpec::gcnn(rep, {4, 3, 2}),
        NetworkSpec::steerable(rep, {4, 2, 2})}) {
    const NetworkWeights w = random_weights(spec, rng, 1.0);
    const NetworkWeights back = weights_from_json(spec, weights_to_json(spec, w));
    EXPECT_EQ(flatten_weights(spec, back), flatten_weights(spec, w));
    const NetworkSpec spec2 = netspec_from_json(netspec_to_json(spec));
    EXPECT_EQ(spec2.depth(), spec.depth());
    EXPECT_EQ(spec2.kind(), spec.kind());
  }
}

TEST(RepJson, ContentHashDiscriminates) {
  const std::string h1 = rep_content_hash(reversal_rep(2));
  const std::string h2 = rep_content_hash(reversal_rep(4));
  EXPECT_EQ(h1.size(), 16u);
  EXPECT_NE(h1, h2);
}

TEST(RepJson, MalformedInputsRejected) {
  EXPECT_THROW(rep_from_json(json{{"dim", 2}}), std::invalid_argument);
  EXPECT_THROW(group_from_json(json{{"order", 2}}), std::invalid_argument);
  json j = rep_to_json(reversal_rep(2));
  j["mats"][1] = json::array({1, 0, 0});  // wrong length
  EXPECT_THROW(rep_from_json(j), std::invalid_argument);
  // a homomorphism violation in the payload is caught on load
  json k = rep_to_json(reversal_rep(2));
  k["mats"][1] = json::array({2, 0, 0, 1});
  EXPECT_THROW(rep_from_json(k), validation_error);
}

TEST(IntertwinerJson, ReferencesRepsByHash) {
  const Representation reg = Representation::regular(FiniteGroup::cyclic(2));
  const Representation triv = Representation::trivial(reg.group(), 1);
  const json j = intertwiner_basis_to_json(IntertwinerBasis::compute(reg, triv));
  EXPECT_EQ(j.at("rep_in"), rep_content_hash(reg));
  EXPECT_EQ(j.at("rep_out"), rep_content_hash(triv));
  EXPECT_EQ(j.at("count"), 1);
}

TEST(SolutionJson, CarriesCertificateFields) {
  VectorXd x(2);
  x << 0, 3;
  const LabeledDataset s(std::vector<LabeledPoint>{{x, 1}});
  const MaxMarginSolution sol = max_margin(s, 1e-8);
  const json j = solution_to_json(sol);
  EXPECT_TRUE(j.at("feasible").get<bool>());
  EXPECT_EQ(j.at("gamma").size(), 2u);
  const json c = certificate_to_json(kkt_certify(s, sol.gamma, sol.duals, 1e-6));
  EXPECT_TRUE(c.at("passed").get<bool>());
  EXPECT_TRUE(c.contains("primal_residual"));
  EXPECT_TRUE(c.contains("stationarity_residual"));
  EXPECT_TRUE(c.contains("slackness_residual"));
}

TEST(TraceJson, DownsamplesAndKeepsEndpoints) {
  TrainTrace trace;
  for (int i = 0; i < 5000; ++i) {
    trace.snapshot_times.push_back(i);
    trace.losses.push_back(1.0 / (1 + i));
    trace.directions.push_back(VectorXd::Ones(2).normalized());
  }
  trace.final_direction = trace.directions.back();
  trace.final_loss = trace.losses.back();
  trace.converged = true;
  const json j = trace_to_json(trace, 100);
  EXPECT_LE(j.at("times").size(), 100u);
  EXPECT_EQ(j.at("times").front(), 0.0);
  EXPECT_EQ(j.at("times").back(), 4999.0);
}

TEST(TraceCsv, HasDocumentedColumns) {
  TrainTrace trace;
  trace.snapshot_times = {0.0, 1.0};
  trace.losses = {2.0, 0.5};
  trace.directions = {VectorXd::Ones(2).normalized(), VectorXd::Ones(2).normalized()};
  trace.final_direction = trace.directions.back();
  std::ostringstream os;
  trace_to_csv(trace, os);
  const std::string text = os.str();
  EXPECT_NE(text.find("snapshot,time,loss,direction_cos_move"), std::string::npos);
  EXPECT_NE(text.find("\n0,"), std::string::npos);
}

TEST(FileHelpers, MissingFileNamesPath) {
  try {
    read_json_file("/definitely/not/here.json");
    FAIL() << "expected error";
  } catch (const std::runtime_error& e) {
    EXPECT_NE(std::string(e.what()).find("/definitely/not/here.json"), std::string::npos);
  }
}

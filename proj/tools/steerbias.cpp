// Command-line front end: scenario runner, representation validator, SVM
// solver and intertwiner-basis calculator over the documented JSON schemas.
// Exit codes: 0 = success / all trials pass, 1 = any trial failed (or an
// invalid representation), 2 = configuration error.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "steerbias/scenario.hpp"

namespace {

using steerbias::json;

int cmd_run(const std::string& scenario_path, const std::optional<std::string>& out,
            const std::string& format, std::optional<std::uint64_t> seed,
            std::optional<double> tol) {
  steerbias::Scenario sc = steerbias::scenario_from_json(steerbias::read_json_file(scenario_path));
  if (seed) sc.seed = *seed;
  if (tol) sc.align_tol = *tol;
  const steerbias::ScenarioReport report = steerbias::run_scenario(sc);
  if (out) {
    const auto fmt =
        format == "csv" ? steerbias::ReportFormat::Csv : steerbias::ReportFormat::Json;
    steerbias::emit_report(report, fmt, *out);
  }
  std::printf("%s: %d trials, %d passed, %d failed, %d inconclusive -> %s\n",
              report.scenario.c_str(), static_cast<int>(report.trials.size()), report.passed,
              report.failed, report.inconclusive, report.all_pass ? "PASS" : "FAIL");
  if (!out) std::cout << steerbias::report_to_json(report).dump(2) << "\n";
  return report.all_pass ? 0 : 1;
}

int cmd_validate_rep(const std::string& path, double tol) {
  try {
    const steerbias::Representation rep =
        steerbias::rep_from_json(steerbias::read_json_file(path), tol);
    std::printf("valid representation: |G| = %d, dim = %d, unitary = %s, hash = %s\n",
                rep.group().order(), rep.dim(), rep.is_unitary() ? "yes" : "no",
                steerbias::rep_content_hash(rep).c_str());
    return 0;
  } catch (const steerbias::validation_error& e) {
    std::printf("invalid representation: %s\n", e.what());
    return 1;
  }
}

int cmd_svm(const std::string& dataset_path, double tol, const std::optional<std::string>& out) {
  const steerbias::LabeledDataset s =
      steerbias::dataset_from_json(steerbias::read_json_file(dataset_path));
  const steerbias::MaxMarginSolution sol = steerbias::max_margin(s, tol);
  json j = steerbias::solution_to_json(sol);
  if (sol.feasible)
    j["certificate"] = steerbias::certificate_to_json(
        steerbias::kkt_certify(s, sol.gamma, sol.duals, tol));
  const std::string text = j.dump(2) + "\n";
  if (out) steerbias::write_text_file(*out, text);
  else std::cout << text;
  return 0;
}

int cmd_intertwiners(const std::string& in_path, const std::string& out_path,
                     const std::optional<std::string>& out) {
  const steerbias::Representation rin =
      steerbias::rep_from_json(steerbias::read_json_file(in_path));
  const steerbias::Representation rout =
      steerbias::rep_from_json(steerbias::read_json_file(out_path));
  const steerbias::IntertwinerBasis basis = steerbias::IntertwinerBasis::compute(rin, rout);
  const std::string text = steerbias::intertwiner_basis_to_json(basis).dump(2) + "\n";
  if (out) steerbias::write_text_file(*out, text);
  else std::cout << text;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"steerbias: implicit-bias experiments for linear steerable networks"};
  app.require_subcommand(1);

  std::string scenario_path, rep_path, dataset_path, rep_in_path, rep_out_path;
  std::string format = "json";
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::optional<double> align_tol;
  double tol = 1e-6;

  auto* run = app.add_subcommand("run", "run a scenario json and report per-trial results");
  run->add_option("scenario", scenario_path, "scenario json file")->required();
  run->add_option("--out", out, "write the report to this path");
  run->add_option("--format", format, "report format: json or csv")
      ->check(CLI::IsMember({"json", "csv"}));
  run->add_option("--seed", seed, "override the scenario seed");
  run->add_option("--tol", align_tol, "override the alignment tolerance");

  auto* vrep = app.add_subcommand("validate-rep", "check a representation json");
  vrep->add_option("rep", rep_path, "representation json file")->required();
  double hom_tol = steerbias::kHomomorphismTol;
  vrep->add_option("--tol", hom_tol, "homomorphism tolerance (per entry)");

  auto* svm = app.add_subcommand("svm", "solve the hard-margin SVM for a dataset json");
  svm->add_option("dataset", dataset_path, "dataset json file")->required();
  svm->add_option("--tol", tol, "KKT certificate tolerance");
  svm->add_option("--out", out, "write the solution to this path");

  auto* itw = app.add_subcommand("intertwiners", "basis of maps commuting with two representations");
  itw->add_option("rep_in", rep_in_path, "input representation json")->required();
  itw->add_option("rep_out", rep_out_path, "output representation json")->required();
  itw->add_option("--out", out, "write the basis to this path");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(scenario_path, out, format, seed, align_tol);
    if (vrep->parsed()) return cmd_validate_rep(rep_path, hom_tol);
    if (svm->parsed()) return cmd_svm(dataset_path, tol, out);
    if (itw->parsed()) return cmd_intertwiners(rep_in_path, rep_out_path, out);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 2;
}

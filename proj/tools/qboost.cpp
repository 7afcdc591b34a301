#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "qboost/csv_io.hpp"
#include "qboost/error.hpp"
#include "qboost/json_io.hpp"
#include "qboost/metrics.hpp"
#include "qboost/sampler.hpp"
#include "qboost/simulation.hpp"
#include "qboost/study_service.hpp"
#include "qboost/thurstone.hpp"

namespace {

using namespace qboost;

void emit(const std::string& output, const std::string& text) {
  if (output.empty() || output == "-") {
    std::cout << text;
  } else {
    write_text_file(output, text);
  }
}

std::string pcm_text(const PairComparisonMatrix& pcm) {
  std::ostringstream out;
  write_pcm_csv(out, pcm);
  return out.str();
}

std::vector<Model> parse_models(const std::string& list) {
  std::vector<Model> models;
  std::stringstream in(list);
  std::string item;
  while (std::getline(in, item, ',')) models.push_back(parse_model(item));
  if (models.empty()) throw UsageError("no models given");
  return models;
}

BatchMode parse_mode(const std::string& m) {
  if (m == "tree") return BatchMode::SpanningTree;
  if (m == "topk") return BatchMode::GlobalTopK;
  throw UsageError("unknown batch mode: " + m);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Active pairwise-comparison sampling and scale recovery"};
  app.require_subcommand(1);

  std::string input, input2, output, model = "case3", models = "case3,case5,bt", mode = "tree";
  std::string csv_out, host = "127.0.0.1", dir = "studies", noise = "gaussian";
  std::uint64_t seed = 0;
  std::size_t batch_size = 0, n = 60, reps = 100, trials = 50, threads = 0;
  int quadrature = kDefaultQuadratureOrder, port = 8080, restarts = 3, sim_restarts = 1;
  double pseudocount = 0.5;
  bool acr_init = false;

  auto* ingest = app.add_subcommand("ingest-acr", "ACR ratings CSV to pairwise matrix CSV");
  ingest->add_option("input", input, "ACR CSV (observer,stimulus,rating)")->required();
  ingest->add_option("-o,--output", output, "output PCM CSV (default stdout)");

  auto* fit = app.add_subcommand("fit", "fit a scale model to a PCM CSV");
  fit->add_option("input", input, "PCM CSV (winner,loser,count)")->required();
  fit->add_option("--model", model, "case3 | case5 | bt");
  fit->add_option("--seed", seed);
  fit->add_option("--pseudocount", pseudocount);
  fit->add_option("--restarts", restarts);
  fit->add_option("-o,--output", output, "estimate JSON (default stdout)");

  auto* select = app.add_subcommand("select", "choose the next batch of pairs");
  select->add_option("input", input, "estimate JSON")->required();
  select->add_option("--batch-size", batch_size)->required();
  select->add_option("--quadrature-order", quadrature);
  select->add_option("--mode", mode, "tree | topk");
  select->add_option("--seed", seed, "accepted for uniformity; selection is deterministic");
  select->add_option("-o,--output", output);

  auto* merge = app.add_subcommand("merge", "sum two PCM CSVs over the same stimuli");
  merge->add_option("base", input)->required();
  merge->add_option("increment", input2)->required();
  merge->add_option("-o,--output", output);

  auto* sim = app.add_subcommand("simulate", "Monte Carlo SROCC-vs-trial simulation");
  sim->add_option("--n", n);
  sim->add_option("--reps", reps);
  sim->add_option("--trials", trials);
  sim->add_option("--seed", seed);
  sim->add_option("--models", models, "comma-separated list");
  sim->add_flag("--acr-init", acr_init, "quantised ACR pre-pass before pairwise trials");
  sim->add_option("--noise", noise, "gaussian | uniform");
  sim->add_option("--mode", mode, "tree | topk");
  sim->add_option("--restarts", sim_restarts, "starts per warm-started refit");
  sim->add_option("--threads", threads, "0 = QBOOST_THREADS or hardware");
  sim->add_option("-o,--output", output, "report JSON (default stdout)");
  sim->add_option("--csv", csv_out, "also write model,trial,mean,std CSV");

  auto* agree = app.add_subcommand("agreement", "agreement of an estimate with a reference PCM");
  agree->add_option("pcm", input)->required();
  agree->add_option("estimate", input2)->required();

  auto* srv = app.add_subcommand("serve", "run the study service");
  srv->add_option("--port", port);
  srv->add_option("--host", host);
  srv->add_option("--dir", dir, "persistence directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return exit_code_for(ErrorKind::Usage);
  }

  try {
    if (*ingest) {
      emit(output, pcm_text(pcm_from_acr(read_acr_csv(std::filesystem::path(input)))));
    } else if (*fit) {
      const Model m = parse_model(model);
      FitOptions opts;
      opts.seed = seed;
      opts.pseudocount = pseudocount;
      opts.restarts = restarts;
      const auto est = fit_model(m, read_pcm_csv(std::filesystem::path(input)), opts);
      emit(output, dump_canonical(estimate_to_json(est)));
    } else if (*select) {
      const QualityEstimate est = estimate_from_json(read_json_file(input));
      const SamplingBatch batch =
          select_batch(est, batch_size, gauss_hermite_rule(quadrature), parse_mode(mode));
      emit(output, dump_canonical(batch_to_json(batch, est.stimulus_ids)));
    } else if (*merge) {
      emit(output, pcm_text(pcm_merge(read_pcm_csv(std::filesystem::path(input)),
                                      read_pcm_csv(std::filesystem::path(input2)))));
    } else if (*sim) {
      SimulationConfig config;
      config.n = n;
      config.reps = reps;
      config.standard_trials = trials;
      config.seed = seed;
      config.models = parse_models(models);
      config.acr_init = acr_init;
      config.batch_mode = parse_mode(mode);
      config.fit.restarts = sim_restarts;
      config.threads = threads;
      if (noise == "gaussian") config.noise = NoiseModel::Gaussian;
      else if (noise == "uniform") config.noise = NoiseModel::UniformAdditive;
      else throw UsageError("unknown noise model: " + noise);
      const SimulationReport report = run_simulation(config);
      emit(output, dump_canonical(report_to_json(report)));
      if (!csv_out.empty()) write_text_file(csv_out, report_to_csv(report));
    } else if (*agree) {
      const PairComparisonMatrix ref = read_pcm_csv(std::filesystem::path(input));
      const QualityEstimate est = estimate_from_json(read_json_file(input2));
      if (est.stimulus_ids != ref.stimulus_ids())
        throw DataError("estimate and matrix cover different stimuli");
      const AgreementResult r = agreement_proportion(ref, est.s_hat);
      emit("", dump_canonical(Json{{"proportion", r.proportion},
                                   {"compared", r.compared},
                                   {"missing_pairs", r.missing_pairs},
                                   {"tied_reference_pairs", r.tied_reference_pairs},
                                   {"tied_score_pairs", r.tied_score_pairs}}));
    } else if (*srv) {
      StudyStore store(dir);
      std::cerr << "listening on " << host << ':' << port << '\n';
      serve(store, host, port);
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(ErrorKind::Data);
  }
  return 0;
}

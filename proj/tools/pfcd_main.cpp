// pfcd: community detection on attributed networks.
//
//   pfcd detect    fit the model to a graph (optionally with features) and
//                  write memberships, communities, and an influence report
//   pfcd generate  sample a degree-corrected planted-partition benchmark
//   pfcd evaluate  score a detected cover against ground truth
//
// Exit codes: 0 success (detect: converged), 2 detect hit max-iters,
// 1 any error.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "pfcd/pfcd.hpp"

namespace fs = std::filesystem;

namespace {

struct DetectArgs {
  std::string graph_path;
  std::string features_path;
  std::vector<std::string> assortative;
  std::string out_dir;
  bool plain = false;
  pfcd::FitConfig cfg;
};

std::string join(const std::vector<std::string>& parts, char sep) {
  std::string s;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) s += sep;
    s += parts[i];
  }
  return s;
}

int run_detect(const DetectArgs& args) {
  pfcd::EdgeListReport report;
  const pfcd::Graph g = pfcd::load_edge_list(args.graph_path, &report);
  if (report.self_loops_dropped || report.duplicates_dropped)
    std::cerr << "note: dropped " << report.self_loops_dropped << " self-loop(s) and "
              << report.duplicates_dropped << " duplicate edge(s)\n";

  pfcd::FeatureTable features = pfcd::FeatureTable::empty(g.n);
  if (!args.plain && !args.features_path.empty()) {
    const pfcd::RawFeatureTable raw = pfcd::load_feature_table(args.features_path, g);
    features = pfcd::split_features(raw, args.assortative);
  } else if (!args.plain && !args.assortative.empty()) {
    throw std::runtime_error("--assortative requires --features");
  }

  pfcd::FitResult result;
  try {
    result = pfcd::fit(g, features, args.cfg);
  } catch (const pfcd::FitDivergedError& e) {
    fs::create_directories(args.out_dir);
    pfcd::save_model_params(e.params, (fs::path(args.out_dir) / "diverged").string());
    std::cerr << "error: " << e.what() << "\n"
              << "parameter state written to " << (fs::path(args.out_dir) / "diverged").string()
              << "\n";
    return 1;
  }

  fs::create_directories(args.out_dir);
  pfcd::save_model_params(result.params, args.out_dir);

  const pfcd::ThresholdResult extracted = pfcd::threshold_memberships(result.params.membership);
  if (extracted.degenerate)
    std::cerr << "warning: all memberships are zero; every node assigned to community 0\n";
  pfcd::write_assignment(extracted.assignment, g.node_labels,
                         (fs::path(args.out_dir) / "assignments.tsv").string());
  pfcd::write_hard_labels(extracted.assignment, g.node_labels,
                          (fs::path(args.out_dir) / "labels.tsv").string());

  const auto report_rows = pfcd::feature_influence_report(
      result.params, features.assortative_names, features.generative_names);
  pfcd::write_influence_report(report_rows,
                               (fs::path(args.out_dir) / "influence.tsv").string());

  auto manifest = pfcd::manifest_entries(args.cfg, result);
  manifest.emplace_back("command", "detect");
  manifest.emplace_back("graph", args.graph_path);
  manifest.emplace_back("features", args.plain ? "" : args.features_path);
  manifest.emplace_back("assortative", args.plain ? "" : join(args.assortative, ','));
  manifest.emplace_back("plain", args.plain || args.features_path.empty() ? "1" : "0");
  manifest.emplace_back("nodes", std::to_string(g.n));
  manifest.emplace_back("edges", std::to_string(g.m));
  pfcd::write_run_manifest(manifest, (fs::path(args.out_dir) / "manifest.tsv").string());

  std::cout << "nodes\t" << g.n << "\nedges\t" << g.m << "\niterations\t" << result.iterations
            << "\nconverged\t" << (result.converged ? 1 : 0) << "\nlog_likelihood\t"
            << pfcd::detail::format_double(result.ll_trace.back()) << "\ncommunities\t"
            << extracted.assignment.communities.size() << "\n";
  return result.converged ? 0 : 2;
}

struct GenerateArgs {
  pfcd::SynthConfig cfg;
  std::string out_dir;
};

int run_generate(const GenerateArgs& args) {
  const pfcd::SynthNetwork net = pfcd::generate_network(args.cfg);
  const pfcd::RawFeatureTable features =
      pfcd::generate_features(net.ground_truth, args.cfg.mu, args.cfg.p, args.cfg.seed);

  fs::create_directories(args.out_dir);
  pfcd::write_edge_list(net.graph, (fs::path(args.out_dir) / "edges.tsv").string());
  pfcd::write_feature_tsv(features, net.graph.node_labels,
                          (fs::path(args.out_dir) / "features.tsv").string());
  pfcd::write_assignment(net.ground_truth, net.graph.node_labels,
                         (fs::path(args.out_dir) / "truth.tsv").string());

  std::vector<std::pair<std::string, std::string>> manifest;
  manifest.emplace_back("command", "generate");
  manifest.emplace_back("n", std::to_string(args.cfg.n));
  manifest.emplace_back("communities", std::to_string(args.cfg.communities));
  manifest.emplace_back("beta", pfcd::detail::format_double(args.cfg.beta_in));
  manifest.emplace_back("r", pfcd::detail::format_double(args.cfg.r));
  manifest.emplace_back("hub_fraction", pfcd::detail::format_double(args.cfg.hub_fraction));
  manifest.emplace_back("theta_hub", pfcd::detail::format_double(args.cfg.theta_hub));
  manifest.emplace_back("theta_normal", pfcd::detail::format_double(args.cfg.theta_normal));
  manifest.emplace_back("mu", pfcd::detail::format_double(args.cfg.mu));
  manifest.emplace_back("p", std::to_string(args.cfg.p));
  manifest.emplace_back("seed", std::to_string(args.cfg.seed));
  manifest.emplace_back("edges", std::to_string(net.graph.m));
  pfcd::write_run_manifest(manifest, (fs::path(args.out_dir) / "manifest.tsv").string());

  std::cout << "edges\t" << net.graph.m << "\n";
  return 0;
}

struct EvaluateArgs {
  std::string detected_path;
  std::string truth_path;
  std::string metric = "both";
};

int run_evaluate(const EvaluateArgs& args) {
  std::vector<std::string> detected_nodes, truth_nodes;
  const pfcd::CommunityAssignment detected =
      pfcd::read_assignment(args.detected_path, detected_nodes);
  pfcd::CommunityAssignment truth = pfcd::read_assignment(args.truth_path, truth_nodes);

  // Both files must cover exactly the same node set.
  {
    std::set<std::string> ds(detected_nodes.begin(), detected_nodes.end());
    std::set<std::string> ts(truth_nodes.begin(), truth_nodes.end());
    if (ds != ts) {
      std::vector<std::string> missing, extra;
      std::set_difference(ts.begin(), ts.end(), ds.begin(), ds.end(), std::back_inserter(missing));
      std::set_difference(ds.begin(), ds.end(), ts.begin(), ts.end(), std::back_inserter(extra));
      std::cerr << "error: node coverage mismatch: detected file covers " << ds.size()
                << " node(s), truth file covers " << ts.size() << "\n";
      auto show = [](const char* what, const std::vector<std::string>& v) {
        if (v.empty()) return;
        std::cerr << what;
        for (std::size_t i = 0; i < std::min<std::size_t>(v.size(), 5); ++i)
          std::cerr << (i ? ", " : " ") << v[i];
        if (v.size() > 5) std::cerr << ", ...";
        std::cerr << "\n";
      };
      show("  only in truth:", missing);
      show("  only in detected:", extra);
      return 1;
    }
  }

  // Re-index the truth structures into the detected file's node order.
  {
    std::unordered_map<std::string, int> detected_id;
    for (std::size_t i = 0; i < detected_nodes.size(); ++i)
      detected_id.emplace(detected_nodes[i], static_cast<int>(i));
    std::vector<int> remap(truth_nodes.size());
    for (std::size_t i = 0; i < truth_nodes.size(); ++i)
      remap[i] = detected_id.at(truth_nodes[i]);
    std::vector<int> labels(truth.labels.size());
    for (std::size_t i = 0; i < truth.labels.size(); ++i)
      labels[static_cast<std::size_t>(remap[i])] = truth.labels[i];
    truth.labels = std::move(labels);
    for (auto& community : truth.communities) {
      for (int& u : community) u = remap[static_cast<std::size_t>(u)];
      std::sort(community.begin(), community.end());
    }
  }

  std::ostringstream out;
  if (args.metric == "f1" || args.metric == "both")
    out << "f1\t" << pfcd::detail::format_double(pfcd::f1_score(detected, truth)) << "\n";
  if (args.metric == "nmi" || args.metric == "both")
    out << "nmi\t" << pfcd::detail::format_double(pfcd::nmi(detected.labels, truth.labels)) << "\n";
  std::cout << out.str();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Overlapping community detection on attributed networks"};
  app.require_subcommand(1);

  DetectArgs detect;
  CLI::App* cmd_detect = app.add_subcommand("detect", "Fit the model and extract communities");
  cmd_detect->add_option("--graph", detect.graph_path, "Edge-list file")->required();
  cmd_detect->add_option("--features", detect.features_path, "Feature TSV (node, feature, value)");
  cmd_detect->add_option("--assortative", detect.assortative,
                         "Comma-separated feature names treated as assortative")
      ->delimiter(',');
  cmd_detect->add_option("--k", detect.cfg.k, "Number of communities")->required();
  cmd_detect->add_option("--alpha", detect.cfg.alpha, "Ascent step size")->capture_default_str();
  cmd_detect->add_option("--ll-threshold", detect.cfg.ll_threshold,
                         "Convergence threshold on |delta log-likelihood|")
      ->capture_default_str();
  cmd_detect->add_option("--max-iters", detect.cfg.max_iters, "Iteration cap")->capture_default_str();
  cmd_detect->add_option("--seed", detect.cfg.seed, "RNG seed for initialization")->capture_default_str();
  cmd_detect->add_flag("--plain", detect.plain, "Ignore features; structure-only fit");
  cmd_detect->add_option("--out", detect.out_dir, "Output directory")->required();

  GenerateArgs gen;
  CLI::App* cmd_generate = app.add_subcommand("generate", "Sample a synthetic benchmark");
  cmd_generate->add_option("--n", gen.cfg.n, "Node count (split into two equal blocks)")
      ->required();
  cmd_generate->add_option("--mu", gen.cfg.mu, "Feature mean separation")->required();
  cmd_generate->add_option("--p", gen.cfg.p, "Feature draws per node")->capture_default_str();
  cmd_generate->add_option("--beta", gen.cfg.beta_in, "Within-block base edge rate")->capture_default_str();
  cmd_generate->add_option("--r", gen.cfg.r, "Cross-block rate multiplier")->capture_default_str();
  cmd_generate->add_option("--hub-fraction", gen.cfg.hub_fraction, "Fraction of hub nodes")->capture_default_str();
  cmd_generate->add_option("--seed", gen.cfg.seed, "RNG seed")->capture_default_str();
  cmd_generate->add_option("--out", gen.out_dir, "Output directory")->required();

  EvaluateArgs eval;
  CLI::App* cmd_evaluate = app.add_subcommand("evaluate", "Score detected communities");
  cmd_evaluate->add_option("--detected", eval.detected_path, "Detected assignment file")
      ->required();
  cmd_evaluate->add_option("--truth", eval.truth_path, "Ground-truth assignment file")->required();
  cmd_evaluate->add_option("--metric", eval.metric, "f1, nmi, or both")->capture_default_str()
      ->check(CLI::IsMember({"f1", "nmi", "both"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (cmd_detect->parsed()) return run_detect(detect);
    if (cmd_generate->parsed()) return run_generate(gen);
    if (cmd_evaluate->parsed()) return run_evaluate(eval);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "mcal/bounds.hpp"
#include "mcal/canonical.hpp"
#include "mcal/metrics.hpp"
#include "mcal/model_io.hpp"
#include "mcal/rng.hpp"
#include "mcal/scaling.hpp"
#include "mcal/synthetic.hpp"
#include "mcal/wrappers.hpp"

namespace {

using nlohmann::json;

std::uint64_t default_seed() {
  if (const char* env = std::getenv("MCALIB_SEED"))
    return std::strtoull(env, nullptr, 10);
  return 0;
}

void emit(const json& j, const std::string& output) {
  std::string text = j.dump(2) + "\n";
  if (output.empty()) {
    std::cout << text;
  } else {
    std::ofstream out(output, std::ios::binary);
    if (!out) throw mcal::Error(mcal::ErrorKind::SchemaViolation,
                                "cannot open " + output + " for writing");
    out << text;
  }
}

// Temperature models consume raw logits; every other notion takes probability
// rows.
mcal::Dataset read_input(const std::string& path, const std::string& notion,
                         bool renormalize) {
  if (notion == "temperature")
    return mcal::read_dataset_raw(path, mcal::CsvMode::logits);
  return mcal::read_dataset(path, mcal::CsvMode::probs, renormalize);
}

// The top-label style notions keep the base argmax by contract; recovering
// the (class, prob) pair by re-running argmax on the substituted matrix can
// flip the class when a calibrated value drops below another entry, so the
// decomposition is taken from the model directly.
mcal::TopLabelDecomposition model_decomposition(const mcal::AnyModel& model,
                                                const mcal::Matrix& base_scores,
                                                const mcal::Matrix& preds) {
  const std::string& t = model.notion;
  if (t == "top-label") return mcal::predict_top_label(model.m2b.top_label, base_scores);
  if (t == "confidence") return mcal::predict_confidence(model.m2b.confidence, base_scores);
  if (t == "top-k-label" || t == "top-k-confidence") {
    mcal::TopKDecomposition out = mcal::predict_top_k(model.m2b.top_k, base_scores);
    mcal::TopLabelDecomposition top;
    top.top_class = out.rank_class.col(0);
    top.top_prob = out.rank_prob.col(0);
    return top;
  }
  return mcal::top_label(preds);
}

json matrix_json(const mcal::Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index l = 0; l < m.cols(); ++l) row.push_back(m(i, l));
    rows.push_back(std::move(row));
  }
  return rows;
}

int run(int argc, char** argv) {
  CLI::App app{"Post-hoc multiclass calibration toolkit"};
  app.require_subcommand(1);

  // ---- fit ----
  auto* fit = app.add_subcommand("fit", "Fit a calibrator on a CSV dataset");
  std::string fit_notion, fit_calibrator = "hb", fit_input, fit_output;
  std::string fit_scheme = "sierpinski";
  int fit_ppb = 50, fit_bins = 0, fit_topk = 2, fit_scheme_param = 2;
  double fit_delta = 1e-10;
  std::uint64_t fit_seed = default_seed();
  bool fit_renorm = false;
  fit->add_option("--notion", fit_notion, "calibration notion")
      ->required()
      ->check(CLI::IsMember({"top-label", "class-wise", "confidence", "normalized",
                             "top-k-label", "top-k-confidence", "temperature",
                             "canonical"}));
  fit->add_option("--calibrator", fit_calibrator)->check(CLI::IsMember({"hb", "identity"}));
  auto* ppb_opt = fit->add_option("--points-per-bin", fit_ppb, "HB points per bin");
  auto* bins_opt = fit->add_option("--bins", fit_bins, "fixed HB bin count");
  bins_opt->excludes(ppb_opt);
  fit->add_option("--delta", fit_delta, "tie-break magnitude");
  fit->add_option("--seed", fit_seed, "RNG seed (default: MCALIB_SEED or 0)");
  fit->add_option("--top-k", fit_topk, "K for the top-K notions");
  fit->add_option("--scheme", fit_scheme, "canonical scheme")
      ->check(CLI::IsMember({"sierpinski", "grid", "projection-hb"}));
  fit->add_option("--scheme-param", fit_scheme_param,
                  "canonical scheme size (depth q / grid K / bins B)");
  fit->add_flag("--renormalize", fit_renorm, "renormalize probability rows");
  fit->add_option("--input", fit_input, "calibration CSV")->required();
  fit->add_option("--output", fit_output, "model JSON path (default stdout)");

  // ---- predict ----
  auto* predict = app.add_subcommand("predict", "Apply a saved model to a CSV dataset");
  std::string pr_model, pr_input, pr_output;
  bool pr_renorm = false;
  predict->add_option("--model", pr_model)->required();
  predict->add_option("--input", pr_input)->required();
  predict->add_option("--output", pr_output);
  predict->add_flag("--renormalize", pr_renorm);

  // ---- eval ----
  auto* eval = app.add_subcommand("eval", "Evaluate a calibration metric");
  std::string ev_metric, ev_model, ev_input, ev_preds, ev_output;
  int ev_bins = 15;
  bool ev_unbinned = false, ev_renorm = false;
  eval->add_option("--metric", ev_metric)
      ->required()
      ->check(CLI::IsMember({"conf-ece", "tl-ece", "tl-mce", "cw-ece", "conf-mce"}));
  auto* evb = eval->add_option("--bins", ev_bins, "equal-width cell count");
  eval->add_flag("--unbinned", ev_unbinned, "group by exact value")->excludes(evb);
  eval->add_option("--model", ev_model, "apply this model before evaluating");
  auto* evi = eval->add_option("--input", ev_input, "base-score CSV");
  eval->add_option("--preds", ev_preds, "already-calibrated CSV")->excludes(evi);
  eval->add_flag("--renormalize", ev_renorm);
  eval->add_option("--output", ev_output);

  // ---- diagram ----
  auto* diagram = app.add_subcommand("diagram", "Reliability/validity diagram data");
  std::string dg_type, dg_model, dg_input, dg_output;
  int dg_bins = 15;
  bool dg_renorm = false;
  diagram->add_option("--type", dg_type)
      ->required()
      ->check(CLI::IsMember({"confidence", "top-label", "validity"}));
  diagram->add_option("--bins", dg_bins);
  diagram->add_option("--model", dg_model);
  diagram->add_option("--input", dg_input)->required();
  diagram->add_flag("--renormalize", dg_renorm);
  diagram->add_option("--output", dg_output);

  // ---- bounds ----
  auto* bounds = app.add_subcommand("bounds", "Distribution-free guarantee levels");
  int bd_theorem = 1, bd_k = 50, bd_classes = 0;
  long bd_n = 0;
  double bd_alpha = 0.1, bd_delta = 1e-10;
  std::string bd_output;
  bounds->add_option("--theorem", bd_theorem)->check(CLI::IsMember({1, 2}));
  bounds->add_option("--k", bd_k, "points per bin")->required();
  bounds->add_option("--n", bd_n, "calibration set size")->required();
  bounds->add_option("--alpha", bd_alpha);
  bounds->add_option("--delta", bd_delta);
  bounds->add_option("--classes", bd_classes, "L (theorem 2; alpha split evenly)");
  bounds->add_option("--output", bd_output);

  // ---- simulate ----
  auto* simulate = app.add_subcommand("simulate", "Monte-Carlo coverage experiment");
  long sm_reps = 100, sm_n = 2000;
  int sm_k = 50, sm_classes = 3, sm_atoms = 0;
  double sm_alpha = 0.1, sm_delta = 1e-10;
  std::uint64_t sm_seed = default_seed();
  std::string sm_notion = "top-label", sm_output;
  simulate->add_option("--replications", sm_reps);
  simulate->add_option("--n", sm_n);
  simulate->add_option("--k", sm_k);
  simulate->add_option("--alpha", sm_alpha);
  simulate->add_option("--delta", sm_delta);
  simulate->add_option("--seed", sm_seed);
  simulate->add_option("--classes", sm_classes);
  simulate->add_option("--atoms", sm_atoms, "support size (default 30*L)");
  simulate->add_option("--notion", sm_notion)
      ->check(CLI::IsMember({"top-label", "class-wise"}));
  simulate->add_option("--output", sm_output);

  CLI11_PARSE(app, argc, argv);

  if (fit->parsed()) {
    mcal::Dataset data = read_input(fit_input, fit_notion, fit_renorm);
    mcal::AnyModel model;
    model.notion = fit_notion;
    model.L = static_cast<int>(data.classes());
    mcal::BinaryCalibratorSpec spec;
    spec.kind = fit_calibrator == "hb" ? mcal::CalibratorKind::histogram_binning
                                       : mcal::CalibratorKind::identity;
    spec.bins = *bins_opt ? mcal::BinsPolicy::fixed_bins(fit_bins)
                          : mcal::BinsPolicy::points_per_bin(fit_ppb);
    spec.delta = fit_delta;
    spec.seed = fit_seed;
    model.spec = spec;
    if (fit_notion == "temperature") {
      model.temperature = mcal::fit_temperature(data.scores, data.labels);
    } else if (fit_notion == "canonical") {
      mcal::CanonicalScheme scheme;
      if (fit_scheme == "sierpinski") {
        scheme.kind = mcal::CanonicalSchemeKind::sierpinski;
        scheme.sierpinski = {model.L, fit_scheme_param};
      } else if (fit_scheme == "grid") {
        scheme.kind = mcal::CanonicalSchemeKind::grid;
        scheme.grid = {model.L, fit_scheme_param};
      } else {
        scheme.kind = mcal::CanonicalSchemeKind::projection_hb;
        mcal::Matrix dirs = mcal::default_directions(
            model.L, fit_scheme_param, mcal::DirectionPolicy::canonical_cycle);
        scheme.projection = mcal::fit_projection_hb(data.scores, fit_scheme_param, dirs);
      }
      model.canonical = mcal::fit_canonical(scheme, data);
    } else {
      mcal::M2BNotionSpec notion;
      notion.K = fit_topk;
      if (fit_notion == "top-label") notion.notion = mcal::Notion::top_label;
      else if (fit_notion == "class-wise") notion.notion = mcal::Notion::class_wise;
      else if (fit_notion == "confidence") notion.notion = mcal::Notion::confidence;
      else if (fit_notion == "normalized") notion.notion = mcal::Notion::normalized;
      else if (fit_notion == "top-k-label") notion.notion = mcal::Notion::top_k_label;
      else notion.notion = mcal::Notion::top_k_confidence;
      model.m2b = mcal::fit_m2b(notion, data, spec);
    }
    std::string text = mcal::model_to_json(model);
    if (fit_output.empty()) {
      std::cout << text;
    } else {
      std::ofstream out(fit_output, std::ios::binary);
      if (!out) throw mcal::Error(mcal::ErrorKind::SchemaViolation,
                                  "cannot open " + fit_output + " for writing");
      out << text;
    }
    return 0;
  }

  if (predict->parsed()) {
    mcal::AnyModel model = mcal::load_model(pr_model);
    mcal::Dataset data = read_input(pr_input, model.notion, pr_renorm);
    mcal::Matrix preds = mcal::apply_model(model, data.scores);
    json j;
    j["rows"] = preds.rows();
    j["notion"] = model.notion;
    j["predictions"] = matrix_json(preds);
    emit(j, pr_output);
    return 0;
  }

  if (eval->parsed()) {
    mcal::Matrix preds;
    mcal::TopLabelDecomposition top;
    mcal::Labels labels;
    if (!ev_preds.empty()) {
      mcal::Dataset d = mcal::read_dataset(ev_preds, mcal::CsvMode::probs, ev_renorm);
      preds = d.scores;
      top = mcal::top_label(preds);
      labels = d.labels;
    } else {
      if (ev_input.empty())
        throw CLI::RequiredError("--input or --preds");
      if (!ev_model.empty()) {
        mcal::AnyModel model = mcal::load_model(ev_model);
        mcal::Dataset d = read_input(ev_input, model.notion, ev_renorm);
        preds = mcal::apply_model(model, d.scores);
        top = model_decomposition(model, d.scores, preds);
        labels = d.labels;
      } else {
        mcal::Dataset d = mcal::read_dataset(ev_input, mcal::CsvMode::probs, ev_renorm);
        preds = d.scores;
        top = mcal::top_label(preds);
        labels = d.labels;
      }
    }
    mcal::BinningScheme scheme = ev_unbinned ? mcal::BinningScheme::unbinned()
                                             : mcal::BinningScheme::equal_width(ev_bins);
    double value = 0.0;
    if (ev_metric == "conf-ece") value = mcal::conf_ece(top, labels, scheme);
    else if (ev_metric == "tl-ece") value = mcal::tl_ece(top, labels, scheme);
    else if (ev_metric == "tl-mce") value = mcal::tl_mce(top, labels, scheme);
    else if (ev_metric == "conf-mce") value = mcal::conf_mce(top, labels, scheme);
    else value = mcal::cw_ece(preds, labels, scheme);
    json j;
    j["metric"] = ev_metric;
    j["value"] = value;
    if (ev_unbinned) j["binning"] = "unbinned";
    else j["bins"] = ev_bins;
    j["rows"] = labels.size();
    emit(j, ev_output);
    return 0;
  }

  if (diagram->parsed()) {
    mcal::Matrix preds;
    mcal::TopLabelDecomposition top;
    mcal::Labels labels;
    if (!dg_model.empty()) {
      mcal::AnyModel model = mcal::load_model(dg_model);
      mcal::Dataset d = read_input(dg_input, model.notion, dg_renorm);
      preds = mcal::apply_model(model, d.scores);
      top = model_decomposition(model, d.scores, preds);
      labels = d.labels;
    } else {
      mcal::Dataset d = mcal::read_dataset(dg_input, mcal::CsvMode::probs, dg_renorm);
      preds = d.scores;
      top = mcal::top_label(preds);
      labels = d.labels;
    }
    json j;
    j["type"] = dg_type;
    if (dg_type == "validity") {
      mcal::ValidityCurve curve = mcal::validity_curve(
          top, labels, mcal::ValidityGrouping::by_class_and_cell,
          mcal::BinningScheme::equal_width(dg_bins), 0.01);
      j["epsilon"] = curve.epsilon;
      j["value"] = curve.value;
    } else {
      mcal::ReliabilityDiagramData data = mcal::reliability_diagram(top, labels, dg_bins);
      j["bins_total"] = data.B;
      json arr = json::array();
      for (const auto& b : data.bins) {
        json e{{"bin", b.bin},     {"conf", b.conf},   {"acc", b.acc},
               {"weight", b.weight}, {"delta", b.delta}, {"ordinate", b.ordinate}};
        if (dg_type == "top-label") {
          json pc = json::array();
          for (const auto& c : b.per_class)
            pc.push_back(json{{"class", c.class_index + 1},
                              {"deviation", c.deviation},
                              {"count", c.count}});
          e["per_class"] = pc;
        }
        arr.push_back(std::move(e));
      }
      j["bins"] = arr;
    }
    emit(j, dg_output);
    return 0;
  }

  if (bounds->parsed()) {
    json j;
    if (bd_theorem == 1) {
      mcal::BoundRequest req{bd_k, bd_n, bd_alpha, bd_delta, {}, {}};
      mcal::Theorem1Bounds b = mcal::theorem1_bounds(req);
      j["theorem"] = 1;
      j["eps_marginal"] = b.eps_marginal;
      j["eps_conditional"] = b.eps_conditional;
      j["expected_tl_ece"] = b.expected_tl_ece;
      j["alpha"] = bd_alpha;
    } else {
      if (bd_classes < 2)
        throw CLI::ValidationError("--classes", "theorem 2 needs --classes >= 2");
      mcal::BoundRequest req;
      req.n = bd_n;
      req.delta = bd_delta;
      req.k_per_class.assign(static_cast<std::size_t>(bd_classes), bd_k);
      req.alpha_per_class.assign(static_cast<std::size_t>(bd_classes),
                                 bd_alpha / bd_classes);
      mcal::Theorem2Bounds b = mcal::theorem2_bounds(req);
      j["theorem"] = 2;
      j["eps_marginal"] = b.eps_marginal;
      j["eps_conditional"] = b.eps_conditional;
      j["eps_max_marginal"] = b.eps_max_marginal;
      j["eps_max_conditional"] = b.eps_max_conditional;
      j["alpha_sum"] = b.alpha_sum;
      j["expected_cw_ece"] = b.expected_cw_ece;
    }
    j["k"] = bd_k;
    j["n"] = bd_n;
    j["delta"] = bd_delta;
    emit(j, bd_output);
    return 0;
  }

  if (simulate->parsed()) {
    int atoms = sm_atoms > 0 ? sm_atoms : 30 * sm_classes;
    mcal::DiscreteDistribution dist =
        mcal::spread_distribution(sm_classes, atoms, mcal::mix_seed(sm_seed, 0xd157, 0));
    mcal::CoverageNotion notion = sm_notion == "top-label"
                                      ? mcal::CoverageNotion::top_label
                                      : mcal::CoverageNotion::class_wise;
    mcal::CoverageReport r = mcal::coverage_experiment(dist, notion, sm_n, sm_k, sm_delta,
                                                       sm_alpha, sm_reps, sm_seed);
    json j;
    j["notion"] = sm_notion;
    j["classes"] = sm_classes;
    j["atoms"] = atoms;
    j["n"] = sm_n;
    j["k"] = sm_k;
    j["alpha"] = r.alpha;
    j["replications"] = r.replications;
    j["eps_marginal"] = r.eps_marginal;
    j["eps_conditional"] = r.eps_conditional;
    j["conditional_violation_freq"] = r.conditional_violation_freq;
    j["mean_marginal_coverage"] = r.mean_marginal_coverage;
    j["mean_exact_ece"] = r.mean_exact_ece;
    j["max_deviation"] = r.max_deviation;
    j["marginal_coverage"] = r.marginal_coverage;
    j["exact_ece"] = r.exact_ece;
    emit(j, sm_output);
    return 0;
  }

  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const mcal::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

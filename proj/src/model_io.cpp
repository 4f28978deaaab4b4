#include "mcal/model_io.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <vector>

#include <json.hpp>

namespace mcal {

using nlohmann::json;

namespace {

constexpr int kFormatVersion = 1;

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

double parse_double(const std::string& s, long row) {
  try {
    std::size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorKind::NonFinite,
                "non-numeric value '" + s + "' in data row " + std::to_string(row));
  }
}

}  // namespace

namespace {

Dataset read_dataset_impl(const std::string& path, CsvMode mode, bool renormalize,
                          bool raw_scores) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::EmptyInput, "cannot open " + path);

  std::string header_line;
  if (!std::getline(in, header_line))
    throw Error(ErrorKind::MalformedHeader, "missing header in " + path);

  const std::string prefix = mode == CsvMode::probs ? "p_" : "logit_";
  std::vector<std::string> header = split_csv_line(header_line);
  for (auto& h : header) h = trim(h);
  if (header.size() < 3 || header.back() != "label")
    throw Error(ErrorKind::MalformedHeader,
                "expected columns " + prefix + "1.." + prefix + "L,label");
  const int L = static_cast<int>(header.size()) - 1;
  for (int l = 0; l < L; ++l)
    if (header[static_cast<std::size_t>(l)] != prefix + std::to_string(l + 1))
      throw Error(ErrorKind::MalformedHeader,
                  "column " + std::to_string(l + 1) + " should be " + prefix +
                      std::to_string(l + 1) + ", got " +
                      header[static_cast<std::size_t>(l)]);

  std::vector<double> values;
  std::vector<int> labels;
  std::string line;
  long row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    std::vector<std::string> fields = split_csv_line(line);
    if (fields.size() != header.size())
      throw Error(ErrorKind::RaggedRow, "row " + std::to_string(row) + " has " +
                                            std::to_string(fields.size()) +
                                            " fields, expected " +
                                            std::to_string(header.size()));
    for (int l = 0; l < L; ++l)
      values.push_back(parse_double(trim(fields[static_cast<std::size_t>(l)]), row));
    const std::string& lab = trim(fields.back());
    double lv = parse_double(lab, row);
    long li = std::lround(lv);
    if (static_cast<double>(li) != lv || li < 1 || li > L)
      throw Error(ErrorKind::LabelOutOfRange,
                  "row " + std::to_string(row) + ": label " + lab +
                      " outside 1.." + std::to_string(L));
    labels.push_back(static_cast<int>(li - 1));
  }
  const long n = static_cast<long>(labels.size());
  if (n == 0) throw Error(ErrorKind::EmptyInput, "no data rows in " + path);

  Matrix raw(n, L);
  for (long i = 0; i < n; ++i)
    for (int l = 0; l < L; ++l) raw(i, l) = values[static_cast<std::size_t>(i * L + l)];

  Dataset data;
  data.labels = Labels(n);
  for (long i = 0; i < n; ++i) data.labels[i] = labels[static_cast<std::size_t>(i)];
  data.scores = raw_scores             ? raw
                : mode == CsvMode::logits ? softmax_rows(raw)
                                          : validate_and_normalize(raw, renormalize);
  return data;
}

}  // namespace

Dataset read_dataset(const std::string& path, CsvMode mode, bool renormalize) {
  return read_dataset_impl(path, mode, renormalize, false);
}

Dataset read_dataset_raw(const std::string& path, CsvMode mode) {
  return read_dataset_impl(path, mode, false, true);
}

// ---- JSON serialization ----

namespace {

void require_keys(const json& j, const std::set<std::string>& keys,
                  const std::string& where) {
  if (!j.is_object())
    throw Error(ErrorKind::SchemaViolation, where + ": expected an object");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!keys.count(it.key()))
      throw Error(ErrorKind::SchemaViolation, where + ": unknown field '" + it.key() + "'");
  for (const auto& k : keys)
    if (!j.contains(k))
      throw Error(ErrorKind::SchemaViolation, where + ": missing field '" + k + "'");
}

json binary_to_json(const BinaryModel& m) {
  return json{{"kind", m.kind == CalibratorKind::histogram_binning ? "hb" : "identity"},
              {"upper_edges", m.upper_edges},
              {"bin_values", m.bin_values},
              {"bin_counts", m.bin_counts},
              {"delta", m.delta},
              {"seed", m.seed}};
}

BinaryModel binary_from_json(const json& j, const std::string& where) {
  require_keys(j, {"kind", "upper_edges", "bin_values", "bin_counts", "delta", "seed"},
               where);
  BinaryModel m;
  std::string kind = j.at("kind").get<std::string>();
  if (kind == "hb")
    m.kind = CalibratorKind::histogram_binning;
  else if (kind == "identity")
    m.kind = CalibratorKind::identity;
  else
    throw Error(ErrorKind::SchemaViolation, where + ": unknown calibrator kind " + kind);
  m.upper_edges = j.at("upper_edges").get<std::vector<double>>();
  m.bin_values = j.at("bin_values").get<std::vector<double>>();
  m.bin_counts = j.at("bin_counts").get<std::vector<int>>();
  m.delta = j.at("delta").get<double>();
  m.seed = j.at("seed").get<std::uint64_t>();
  return m;
}

json spec_to_json(const BinaryCalibratorSpec& s) {
  return json{
      {"calibrator", s.kind == CalibratorKind::histogram_binning ? "hb" : "identity"},
      {"bins_mode",
       s.bins.mode == BinsPolicy::Mode::points_per_bin ? "points-per-bin" : "fixed-bins"},
      {"bins_value", s.bins.value},
      {"delta", s.delta},
      {"seed", s.seed}};
}

BinaryCalibratorSpec spec_from_json(const json& j) {
  require_keys(j, {"calibrator", "bins_mode", "bins_value", "delta", "seed"}, "spec");
  BinaryCalibratorSpec s;
  std::string cal = j.at("calibrator").get<std::string>();
  if (cal == "hb")
    s.kind = CalibratorKind::histogram_binning;
  else if (cal == "identity")
    s.kind = CalibratorKind::identity;
  else
    throw Error(ErrorKind::SchemaViolation, "spec: unknown calibrator " + cal);
  std::string mode = j.at("bins_mode").get<std::string>();
  if (mode == "points-per-bin")
    s.bins.mode = BinsPolicy::Mode::points_per_bin;
  else if (mode == "fixed-bins")
    s.bins.mode = BinsPolicy::Mode::fixed_bins;
  else
    throw Error(ErrorKind::SchemaViolation, "spec: unknown bins_mode " + mode);
  s.bins.value = j.at("bins_value").get<int>();
  s.delta = j.at("delta").get<double>();
  s.seed = j.at("seed").get<std::uint64_t>();
  return s;
}

json per_class_to_json(const std::vector<BinaryModel>& v) {
  json arr = json::array();
  for (const auto& m : v) arr.push_back(binary_to_json(m));
  return arr;
}

std::vector<BinaryModel> per_class_from_json(const json& j, const std::string& where) {
  if (!j.is_array())
    throw Error(ErrorKind::SchemaViolation, where + ": expected an array");
  std::vector<BinaryModel> v;
  for (std::size_t i = 0; i < j.size(); ++i)
    v.push_back(binary_from_json(j[i], where + "[" + std::to_string(i) + "]"));
  return v;
}

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index l = 0; l < m.cols(); ++l) row.push_back(m(i, l));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty())
    throw Error(ErrorKind::SchemaViolation, where + ": expected a non-empty array");
  const Eigen::Index rows = static_cast<Eigen::Index>(j.size());
  const Eigen::Index cols = static_cast<Eigen::Index>(j[0].size());
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    if (!j[static_cast<std::size_t>(i)].is_array() ||
        static_cast<Eigen::Index>(j[static_cast<std::size_t>(i)].size()) != cols)
      throw Error(ErrorKind::SchemaViolation, where + ": ragged rows");
    for (Eigen::Index l = 0; l < cols; ++l)
      m(i, l) = j[static_cast<std::size_t>(i)][static_cast<std::size_t>(l)].get<double>();
  }
  return m;
}

json scheme_to_json(const CanonicalScheme& s) {
  switch (s.kind) {
    case CanonicalSchemeKind::sierpinski:
      return json{{"kind", "sierpinski"}, {"q", s.sierpinski.q}};
    case CanonicalSchemeKind::grid:
      return json{{"kind", "grid"}, {"K", s.grid.K}};
    case CanonicalSchemeKind::projection_hb:
      return json{{"kind", "projection-hb"},
                  {"B", s.projection.B},
                  {"q_vectors", matrix_to_json(s.projection.q_vectors)},
                  {"thresholds", s.projection.thresholds},
                  {"interior_quota", s.projection.interior_quota}};
  }
  throw Error(ErrorKind::SchemaViolation, "unreachable scheme kind");
}

CanonicalScheme scheme_from_json(const json& j, int L) {
  if (!j.is_object() || !j.contains("kind"))
    throw Error(ErrorKind::SchemaViolation, "scheme: missing kind");
  CanonicalScheme s;
  std::string kind = j.at("kind").get<std::string>();
  if (kind == "sierpinski") {
    require_keys(j, {"kind", "q"}, "scheme");
    s.kind = CanonicalSchemeKind::sierpinski;
    s.sierpinski.L = L;
    s.sierpinski.q = j.at("q").get<int>();
  } else if (kind == "grid") {
    require_keys(j, {"kind", "K"}, "scheme");
    s.kind = CanonicalSchemeKind::grid;
    s.grid.L = L;
    s.grid.K = j.at("K").get<int>();
  } else if (kind == "projection-hb") {
    require_keys(j, {"kind", "B", "q_vectors", "thresholds", "interior_quota"}, "scheme");
    s.kind = CanonicalSchemeKind::projection_hb;
    s.projection.B = j.at("B").get<int>();
    s.projection.q_vectors = matrix_from_json(j.at("q_vectors"), "scheme.q_vectors");
    s.projection.thresholds = j.at("thresholds").get<std::vector<double>>();
    s.projection.interior_quota = j.at("interior_quota").get<int>();
  } else {
    throw Error(ErrorKind::SchemaViolation, "scheme: unknown kind " + kind);
  }
  return s;
}

}  // namespace

Matrix apply_model(const AnyModel& model, const Matrix& scores) {
  if (static_cast<int>(scores.cols()) != model.L)
    throw Error(ErrorKind::ClassCountMismatch,
                "model has " + std::to_string(model.L) + " classes, data has " +
                    std::to_string(scores.cols()));
  const std::string& t = model.notion;
  if (t == "top-label" || t == "confidence") {
    TopLabelDecomposition out =
        t == "top-label" ? predict_top_label(model.m2b.top_label, scores)
                         : predict_confidence(model.m2b.confidence, scores);
    Matrix result = scores;
    for (Eigen::Index i = 0; i < scores.rows(); ++i)
      result(i, out.top_class[i]) = out.top_prob[i];
    return result;
  }
  if (t == "class-wise") return predict_class_wise(model.m2b.class_wise, scores);
  if (t == "normalized") return predict_normalized(model.m2b.normalized, scores);
  if (t == "top-k-label" || t == "top-k-confidence") {
    TopKDecomposition out = predict_top_k(model.m2b.top_k, scores);
    Matrix result = scores;
    for (Eigen::Index i = 0; i < scores.rows(); ++i)
      for (int k = 0; k < out.K; ++k) result(i, out.rank_class(i, k)) = out.rank_prob(i, k);
    return result;
  }
  if (t == "temperature") return apply_temperature(model.temperature, scores);
  if (t == "canonical") return predict_canonical_rows(model.canonical, scores);
  throw Error(ErrorKind::SchemaViolation, "unknown notion " + t);
}

std::string model_to_json(const AnyModel& model) {
  json j;
  j["format_version"] = kFormatVersion;
  j["notion"] = model.notion;
  j["L"] = model.L;
  const std::string& t = model.notion;
  if (t == "top-label") {
    j["spec"] = spec_to_json(model.spec);
    j["model"] = json{{"per_class", per_class_to_json(model.m2b.top_label.per_class)},
                      {"fallback_classes", model.m2b.top_label.fallback_classes}};
  } else if (t == "class-wise") {
    j["spec"] = spec_to_json(model.spec);
    j["model"] = json{{"per_class", per_class_to_json(model.m2b.class_wise.per_class)}};
  } else if (t == "confidence") {
    j["spec"] = spec_to_json(model.spec);
    j["model"] = json{{"pooled", binary_to_json(model.m2b.confidence.pooled)}};
  } else if (t == "normalized") {
    j["spec"] = spec_to_json(model.spec);
    j["model"] = json{{"per_class", per_class_to_json(model.m2b.normalized.per_class)}};
  } else if (t == "top-k-label") {
    json cells = json::array();
    for (const auto& [r, c] : model.m2b.top_k.fallback_cells)
      cells.push_back(json::array({r, c}));
    j["spec"] = spec_to_json(model.spec);
    j["model"] = json{{"K", model.m2b.top_k.K},
                      {"grid", per_class_to_json(model.m2b.top_k.grid)},
                      {"fallback_cells", cells}};
  } else if (t == "top-k-confidence") {
    j["spec"] = spec_to_json(model.spec);
    j["model"] = json{{"K", model.m2b.top_k.K},
                      {"per_rank", per_class_to_json(model.m2b.top_k.per_rank)}};
  } else if (t == "temperature") {
    j["model"] = json{{"T", model.temperature.T},
                      {"t_min", model.temperature.t_min},
                      {"t_max", model.temperature.t_max},
                      {"fit_nll", model.temperature.fit_nll}};
  } else if (t == "canonical") {
    j["model"] = json{{"scheme", scheme_to_json(model.canonical.scheme)},
                      {"pi_hat", matrix_to_json(model.canonical.pi_hat)}};
  } else {
    throw Error(ErrorKind::SchemaViolation, "unknown notion " + t);
  }
  return j.dump(2) + "\n";
}

AnyModel model_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::SchemaViolation, std::string("invalid JSON: ") + e.what());
  }
  std::set<std::string> top_keys = {"format_version", "notion", "L", "model"};
  bool has_spec = j.is_object() && j.contains("spec");
  if (has_spec) top_keys.insert("spec");
  require_keys(j, top_keys, "model file");
  if (!j.at("format_version").is_number_integer() ||
      j.at("format_version").get<int>() != kFormatVersion)
    throw Error(ErrorKind::VersionMismatch,
                "unsupported format_version (expected " + std::to_string(kFormatVersion) +
                    ")");

  AnyModel m;
  m.notion = j.at("notion").get<std::string>();
  m.L = j.at("L").get<int>();
  if (m.L < 2) throw Error(ErrorKind::SchemaViolation, "L must be >= 2");
  if (has_spec) m.spec = spec_from_json(j.at("spec"));
  const json& body = j.at("model");
  const std::string& t = m.notion;
  if (t == "top-label") {
    require_keys(body, {"per_class", "fallback_classes"}, "model");
    m.m2b.notion = Notion::top_label;
    m.m2b.top_label.L = m.L;
    m.m2b.top_label.per_class = per_class_from_json(body.at("per_class"), "per_class");
    m.m2b.top_label.fallback_classes =
        body.at("fallback_classes").get<std::vector<int>>();
    if (static_cast<int>(m.m2b.top_label.per_class.size()) != m.L)
      throw Error(ErrorKind::SchemaViolation, "per_class size must equal L");
  } else if (t == "class-wise" || t == "normalized") {
    require_keys(body, {"per_class"}, "model");
    auto models = per_class_from_json(body.at("per_class"), "per_class");
    if (static_cast<int>(models.size()) != m.L)
      throw Error(ErrorKind::SchemaViolation, "per_class size must equal L");
    if (t == "class-wise") {
      m.m2b.notion = Notion::class_wise;
      m.m2b.class_wise.L = m.L;
      m.m2b.class_wise.per_class = std::move(models);
    } else {
      m.m2b.notion = Notion::normalized;
      m.m2b.normalized.L = m.L;
      m.m2b.normalized.per_class = std::move(models);
    }
  } else if (t == "confidence") {
    require_keys(body, {"pooled"}, "model");
    m.m2b.notion = Notion::confidence;
    m.m2b.confidence.L = m.L;
    m.m2b.confidence.pooled = binary_from_json(body.at("pooled"), "pooled");
  } else if (t == "top-k-label") {
    require_keys(body, {"K", "grid", "fallback_cells"}, "model");
    m.m2b.notion = Notion::top_k_label;
    m.m2b.top_k.L = m.L;
    m.m2b.top_k.variant = TopKVariant::label;
    m.m2b.top_k.K = body.at("K").get<int>();
    m.m2b.top_k.grid = per_class_from_json(body.at("grid"), "grid");
    if (static_cast<int>(m.m2b.top_k.grid.size()) != m.m2b.top_k.K * m.L)
      throw Error(ErrorKind::SchemaViolation, "grid size must equal K*L");
    for (const auto& cell : body.at("fallback_cells")) {
      if (!cell.is_array() || cell.size() != 2)
        throw Error(ErrorKind::SchemaViolation, "fallback_cells entries must be pairs");
      m.m2b.top_k.fallback_cells.emplace_back(cell[0].get<int>(), cell[1].get<int>());
    }
  } else if (t == "top-k-confidence") {
    require_keys(body, {"K", "per_rank"}, "model");
    m.m2b.notion = Notion::top_k_confidence;
    m.m2b.top_k.L = m.L;
    m.m2b.top_k.variant = TopKVariant::confidence;
    m.m2b.top_k.K = body.at("K").get<int>();
    m.m2b.top_k.per_rank = per_class_from_json(body.at("per_rank"), "per_rank");
    if (static_cast<int>(m.m2b.top_k.per_rank.size()) != m.m2b.top_k.K)
      throw Error(ErrorKind::SchemaViolation, "per_rank size must equal K");
  } else if (t == "temperature") {
    require_keys(body, {"T", "t_min", "t_max", "fit_nll"}, "model");
    m.temperature.T = body.at("T").get<double>();
    m.temperature.t_min = body.at("t_min").get<double>();
    m.temperature.t_max = body.at("t_max").get<double>();
    m.temperature.fit_nll = body.at("fit_nll").get<double>();
    m.temperature.L = m.L;
  } else if (t == "canonical") {
    require_keys(body, {"scheme", "pi_hat"}, "model");
    m.canonical.L = m.L;
    m.canonical.scheme = scheme_from_json(body.at("scheme"), m.L);
    m.canonical.pi_hat = matrix_from_json(body.at("pi_hat"), "pi_hat");
    if (static_cast<int>(m.canonical.pi_hat.cols()) != m.L)
      throw Error(ErrorKind::SchemaViolation, "pi_hat must have L columns");
  } else {
    throw Error(ErrorKind::SchemaViolation, "unknown notion " + t);
  }
  return m;
}

void save_model(const AnyModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::SchemaViolation, "cannot open " + path + " for writing");
  out << model_to_json(model);
}

AnyModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::SchemaViolation, "cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return model_from_json(buf.str());
}

}  // namespace mcal

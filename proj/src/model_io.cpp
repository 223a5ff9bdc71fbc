#include <fstream>
#include <istream>
#include <ostream>

#include "cefrlab/model.hpp"
#include "json.hpp"

namespace cefrlab {

namespace {

using nlohmann::json;

json labels_to_json(const std::vector<CefrLabel>& labels) {
  json a = json::array();
  for (auto l : labels) a.push_back(std::string(to_string(l)));
  return a;
}

std::vector<CefrLabel> labels_from_json(const json& a) {
  std::vector<CefrLabel> out;
  for (const auto& v : a) {
    auto l = parse_level(v.get<std::string>());
    if (!l) throw FormatError("model file: unknown label " + v.dump());
    out.push_back(*l);
  }
  return out;
}

json scaler_to_json(const Scaler& s) { return {{"means", s.means}, {"stds", s.stds}}; }

Scaler scaler_from_json(const json& j) {
  Scaler s;
  s.means = j.at("means").get<std::vector<double>>();
  s.stds = j.at("stds").get<std::vector<double>>();
  return s;
}

void expect(bool cond, const std::string& what) {
  if (!cond) throw FormatError("model file: " + what);
}

json to_json(const MlrModel& m) {
  return {{"format_version", kModelFormatVersion},
          {"kind", "mlr"},
          {"labels", labels_to_json(m.labels)},
          {"feature_names", m.feature_names},
          {"ridge", m.ridge},
          {"scaler", scaler_to_json(m.scaler)},
          {"weights", m.weights},
          {"training",
           {{"iterations", m.info.iterations},
            {"converged", m.info.converged},
            {"final_nll", m.info.final_nll},
            {"warnings", m.info.warnings}}}};
}

json to_json(const LinRegModel& m) {
  return {{"format_version", kModelFormatVersion},
          {"kind", "linreg"},
          {"feature_names", m.feature_names},
          {"ridge", m.ridge},
          {"scaler", scaler_to_json(m.scaler)},
          {"weights", m.weights}};
}

json to_json(const MajorityModel& m) {
  return {{"format_version", kModelFormatVersion},
          {"kind", "majority"},
          {"label", std::string(to_string(m.label))},
          {"labels", labels_to_json(m.labels)},
          {"feature_names", m.feature_names}};
}

AnyModel from_json(const json& j) {
  expect(j.is_object(), "top level is not an object");
  const int version = j.at("format_version").get<int>();
  if (version != kModelFormatVersion)
    throw FormatError("model file: unsupported format_version " + std::to_string(version) +
                      " (expected " + std::to_string(kModelFormatVersion) + ")");
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "mlr") {
    MlrModel m;
    m.labels = labels_from_json(j.at("labels"));
    m.feature_names = j.at("feature_names").get<std::vector<std::string>>();
    m.ridge = j.at("ridge").get<double>();
    m.scaler = scaler_from_json(j.at("scaler"));
    m.weights = j.at("weights").get<std::vector<double>>();
    if (auto t = j.find("training"); t != j.end()) {
      m.info.iterations = t->value("iterations", 0);
      m.info.converged = t->value("converged", false);
      m.info.final_nll = t->value("final_nll", 0.0);
      m.info.warnings = t->value("warnings", std::vector<std::string>{});
    }
    const std::size_t d = m.feature_names.size();
    expect(m.labels.size() >= 2, "mlr model needs at least two labels");
    expect(m.scaler.means.size() == d && m.scaler.stds.size() == d, "scaler size mismatch");
    expect(m.weights.size() == m.labels.size() * (d + 1), "weight matrix size mismatch");
    return m;
  }
  if (kind == "linreg") {
    LinRegModel m;
    m.feature_names = j.at("feature_names").get<std::vector<std::string>>();
    m.ridge = j.at("ridge").get<double>();
    m.scaler = scaler_from_json(j.at("scaler"));
    m.weights = j.at("weights").get<std::vector<double>>();
    const std::size_t d = m.feature_names.size();
    expect(m.scaler.means.size() == d && m.scaler.stds.size() == d, "scaler size mismatch");
    expect(m.weights.size() == d + 1, "weight vector size mismatch");
    return m;
  }
  if (kind == "majority") {
    MajorityModel m;
    auto l = parse_level(j.at("label").get<std::string>());
    expect(l.has_value(), "unknown majority label");
    m.label = *l;
    m.labels = labels_from_json(j.at("labels"));
    m.feature_names = j.at("feature_names").get<std::vector<std::string>>();
    return m;
  }
  throw FormatError("model file: unknown model kind '" + kind + "'");
}

}  // namespace

void save_model(std::ostream& out, const AnyModel& model, const std::string& invocation) {
  json j = std::visit([](const auto& m) { return to_json(m); }, model);
  if (!invocation.empty()) j["invocation"] = invocation;
  out << j.dump(2) << '\n';
}

void save_model_file(const std::string& path, const AnyModel& model, const std::string& invocation) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write model file: " + path);
  save_model(out, model, invocation);
}

AnyModel load_model(std::istream& in) {
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw FormatError(std::string("model file is truncated or not valid JSON: ") + e.what());
  }
  try {
    return from_json(j);
  } catch (const json::exception& e) {
    throw FormatError(std::string("model file: missing or mistyped field: ") + e.what());
  }
}

AnyModel load_model_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open model file: " + path);
  return load_model(in);
}

}  // namespace cefrlab

#include "homog/coeffs_io.hpp"

#include <fstream>
#include <json.hpp>
#include <sstream>

#include "homog/errors.hpp"

namespace homog {

using nlohmann::json;

namespace {

json matrix_json(const Eigen::MatrixXd& M) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    json r = json::array();
    for (Eigen::Index j = 0; j < M.cols(); ++j) r.push_back(M(i, j));
    rows.push_back(r);
  }
  return rows;
}

Eigen::MatrixXd matrix_from(const json& j) {
  if (!j.is_array() || j.empty() || !j[0].is_array()) throw SchemaError("expected a nested matrix array");
  Eigen::MatrixXd M(j.size(), j[0].size());
  for (std::size_t r = 0; r < j.size(); ++r) {
    if (j[r].size() != j[0].size()) throw SchemaError("ragged matrix array");
    for (std::size_t c = 0; c < j[r].size(); ++c) M(r, c) = j[r][c].get<double>();
  }
  return M;
}

json vector_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

json param_json(const ExtendedParam& p) { return p.is_inf() ? json("inf") : json(p.value()); }

ExtendedParam param_from(const json& j) {
  if (j.is_string()) return ExtendedParam::parse(j.get<std::string>());
  return ExtendedParam(j.get<double>());
}

json kernel_json(const KernelSample& k) {
  json samples = json::array();
  for (int s = 0; s < k.steps(); ++s) samples.push_back({{"t", k.times[s]}, {"matrix", matrix_json(k.values[s])}});
  json meta = json::object();
  for (const auto& [key, v] : k.meta) meta[key] = v;
  return {{"problem", k.problem}, {"dt", k.dt}, {"samples", samples}, {"meta", meta}};
}

KernelSample kernel_from(const json& j) {
  KernelSample k;
  k.problem = j.at("problem").get<std::string>();
  k.dt = j.at("dt").get<double>();
  for (const auto& s : j.at("samples")) {
    k.times.push_back(s.at("t").get<double>());
    k.values.push_back(matrix_from(s.at("matrix")));
  }
  for (const auto& [key, v] : j.at("meta").items()) k.meta[key] = v.get<double>();
  return k;
}

json report_json(const SpdReport& r) {
  return {{"name", r.name},          {"eigenvalues", vector_json(r.eigenvalues)},
          {"asymmetry", r.asymmetry}, {"symmetry_tol", r.symmetry_tol},
          {"min_eig", r.min_eig},     {"max_eig", r.max_eig},
          {"symmetric", r.symmetric}, {"positive", r.positive},
          {"ok", r.ok()}};
}

SpdReport report_from(const json& j) {
  SpdReport r;
  r.name = j.at("name").get<std::string>();
  const auto& e = j.at("eigenvalues");
  r.eigenvalues.resize(e.size());
  for (std::size_t i = 0; i < e.size(); ++i) r.eigenvalues[i] = e[i].get<double>();
  r.asymmetry = j.at("asymmetry").get<double>();
  r.symmetry_tol = j.at("symmetry_tol").get<double>();
  r.min_eig = j.at("min_eig").get<double>();
  r.max_eig = j.at("max_eig").get<double>();
  r.symmetric = j.at("symmetric").get<bool>();
  r.positive = j.at("positive").get<bool>();
  return r;
}

}  // namespace

std::string coefficients_to_json(const EffectiveCoefficients& c) {
  json j;
  j["schema"] = kCoeffsSchema;
  j["dim"] = c.dim;
  j["m"] = c.m;
  j["rho_hat"] = c.rho_hat;
  j["regime"] = to_string(c.regime);
  j["geometry_hash"] = c.geometry_hash;
  const auto& p = c.params;
  j["params"] = {{"mu0", param_json(p.mu0)},     {"nu0", param_json(p.nu0)},       {"lambda0", param_json(p.lambda0)},
                 {"tau0", param_json(p.tau0)},   {"p_star", param_json(p.p_star)}, {"eta0", param_json(p.eta0)},
                 {"mu1", param_json(p.mu1)},     {"lambda1", param_json(p.lambda1)}, {"rho_f", p.rho_f},
                 {"rho_s", p.rho_s}};
  json packing = json::array();
  for (int k = 0; k < packed_size(c.dim); ++k) {
    auto [a, b] = packed_pair(c.dim, k);
    packing.push_back({a, b});
  }
  j["packing"] = packing;
  if (c.A_f0) j["A_f0"] = {{"packed", matrix_json(c.A_f0->packed())}, {"asymmetry", c.A_f0_asymmetry}};
  auto put_matrix = [&](const char* key, const std::optional<Eigen::MatrixXd>& M) {
    if (M) j[key] = matrix_json(*M);
  };
  put_matrix("C_f0", c.C_f0);
  put_matrix("B_f0", c.B_f0);
  put_matrix("B_f1_const", c.B_f1_const);
  put_matrix("B_s2", c.B_s2);
  put_matrix("B_f2_matrix", c.B_f2_matrix);
  put_matrix("B_s2_face_average", c.B_s2_face_average);
  put_matrix("B_f2_face_average", c.B_f2_face_average);
  if (c.a_f0) j["a_f0"] = *c.a_f0;
  if (c.a_f1) j["a_f1"] = *c.a_f1;
  auto put_kernel = [&](const char* key, const std::optional<KernelSample>& k) {
    if (k) j[key] = kernel_json(*k);
  };
  put_kernel("B_f2_kernel", c.B_f2_kernel);
  put_kernel("a_f2_kernel", c.a_f2_kernel);
  put_kernel("B_s1_kernel", c.B_s1_kernel);
  put_kernel("K_f_kernel", c.K_f_kernel);
  put_kernel("B_pi_kernel", c.B_pi_kernel);
  put_kernel("F_kernel", c.F_kernel);
  if (c.q_closure)
    j["q_closure"] = {{"strain", matrix_json(c.q_closure->strain)},
                      {"pi", c.q_closure->pi_coeff},
                      {"div", c.q_closure->div_coeff}};
  json val = json::array();
  for (const auto& r : c.validation) val.push_back(report_json(r));
  j["validation"] = val;
  j["valid"] = c.valid();
  return j.dump(1) + "\n";
}

EffectiveCoefficients coefficients_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw SchemaError(std::string("coefficient file is not valid JSON: ") + e.what());
  }
  if (!j.contains("schema") || j["schema"] != kCoeffsSchema)
    throw SchemaError("unknown coefficient schema '" + (j.contains("schema") ? j["schema"].dump() : std::string("none")) +
                      "', expected " + kCoeffsSchema);
  try {
    EffectiveCoefficients c;
    c.dim = j.at("dim").get<int>();
    c.m = j.at("m").get<double>();
    c.rho_hat = j.at("rho_hat").get<double>();
    c.regime = regime_from_string(j.at("regime").get<std::string>());
    c.geometry_hash = j.at("geometry_hash").get<std::string>();
    const auto& p = j.at("params");
    c.params.mu0 = param_from(p.at("mu0"));
    c.params.nu0 = param_from(p.at("nu0"));
    c.params.lambda0 = param_from(p.at("lambda0"));
    c.params.tau0 = param_from(p.at("tau0"));
    c.params.p_star = param_from(p.at("p_star"));
    c.params.eta0 = param_from(p.at("eta0"));
    c.params.mu1 = param_from(p.at("mu1"));
    c.params.lambda1 = param_from(p.at("lambda1"));
    c.params.rho_f = p.at("rho_f").get<double>();
    c.params.rho_s = p.at("rho_s").get<double>();
    if (j.contains("A_f0")) {
      c.A_f0 = SymRank4Tensor(c.dim, matrix_from(j["A_f0"].at("packed")));
      c.A_f0_asymmetry = j["A_f0"].at("asymmetry").get<double>();
    }
    auto get_matrix = [&](const char* key, std::optional<Eigen::MatrixXd>& M) {
      if (j.contains(key)) M = matrix_from(j[key]);
    };
    get_matrix("C_f0", c.C_f0);
    get_matrix("B_f0", c.B_f0);
    get_matrix("B_f1_const", c.B_f1_const);
    get_matrix("B_s2", c.B_s2);
    get_matrix("B_f2_matrix", c.B_f2_matrix);
    get_matrix("B_s2_face_average", c.B_s2_face_average);
    get_matrix("B_f2_face_average", c.B_f2_face_average);
    if (j.contains("a_f0")) c.a_f0 = j["a_f0"].get<double>();
    if (j.contains("a_f1")) c.a_f1 = j["a_f1"].get<double>();
    auto get_kernel = [&](const char* key, std::optional<KernelSample>& k) {
      if (j.contains(key)) k = kernel_from(j[key]);
    };
    get_kernel("B_f2_kernel", c.B_f2_kernel);
    get_kernel("a_f2_kernel", c.a_f2_kernel);
    get_kernel("B_s1_kernel", c.B_s1_kernel);
    get_kernel("K_f_kernel", c.K_f_kernel);
    get_kernel("B_pi_kernel", c.B_pi_kernel);
    get_kernel("F_kernel", c.F_kernel);
    if (j.contains("q_closure")) {
      PressureClosure q;
      q.strain = matrix_from(j["q_closure"].at("strain"));
      q.pi_coeff = j["q_closure"].at("pi").get<double>();
      q.div_coeff = j["q_closure"].at("div").get<double>();
      c.q_closure = q;
    }
    for (const auto& r : j.at("validation")) c.validation.push_back(report_from(r));
    return c;
  } catch (const json::exception& e) {
    throw SchemaError(std::string("malformed coefficient file: ") + e.what());
  }
}

void save_coefficients(const EffectiveCoefficients& c, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << coefficients_to_json(c);
}

EffectiveCoefficients load_coefficients(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read coefficient file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return coefficients_from_json(ss.str());
}

}  // namespace homog

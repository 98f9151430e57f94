#include "rgap/serialization.hpp"

#include <charconv>
#include <sstream>

#include "rgap/errors.hpp"

namespace rgap {

std::string format_real(double x) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

namespace {

Json vector_json(const Eigen::VectorXd& v) { return Json(std::vector<double>(v.data(), v.data() + v.size())); }

Eigen::VectorXd json_vector(const Json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Index>(v.size()));
}

}  // namespace

Json to_json(const DiscreteMMS& X) {
  Json edges = Json::array();
  for (const Edge& e : X.edges())
    edges.push_back({{"i", e.i},
                     {"j", e.j},
                     {"d", e.length},
                     {"sigma", e.sigma},
                     {"family", e.family == EdgeFamily::radial ? "radial" : "transversal"}});
  Json coords = Json::array();
  for (Index i = 0; i < X.coordinates().rows(); ++i) coords.push_back(vector_json(X.coordinates().row(i).transpose()));
  return {{"tag", to_string(X.tag())},
          {"params", X.params()},
          {"masses", vector_json(X.masses())},
          {"edges", edges},
          {"coordinates", coords}};
}

DiscreteMMS mms_from_json(const Json& j) {
  try {
    std::vector<Edge> edges;
    for (const Json& e : j.at("edges")) {
      const EdgeFamily family =
          e.value("family", std::string("radial")) == "transversal" ? EdgeFamily::transversal : EdgeFamily::radial;
      edges.push_back({e.at("i").get<Index>(), e.at("j").get<Index>(), e.at("d").get<double>(),
                       e.at("sigma").get<double>(), family});
    }
    Eigen::MatrixXd coords;
    if (j.contains("coordinates") && !j.at("coordinates").empty()) {
      const Json& c = j.at("coordinates");
      coords.resize(static_cast<Index>(c.size()), static_cast<Index>(c.front().size()));
      for (std::size_t r = 0; r < c.size(); ++r)
        for (std::size_t k = 0; k < c[r].size(); ++k)
          coords(static_cast<Index>(r), static_cast<Index>(k)) = c[r][k].get<double>();
    }
    return DiscreteMMS(json_vector(j.at("masses")), std::move(edges), builder_tag_from_string(j.at("tag")),
                       j.value("params", std::map<std::string, double>{}), std::move(coords));
  } catch (const Json::exception& e) {
    throw DomainError(std::string("malformed space JSON: ") + e.what());
  }
}

Json to_json(const SampledFunction& u) { return vector_json(u.values()); }

SampledFunction function_from_json(const DiscreteMMS& X, const Json& j) { return SampledFunction(X, json_vector(j)); }

Json to_json(const DistributionFunction& df) {
  return {{"thresholds", df.thresholds}, {"masses", df.masses}, {"domain_mass", df.domain_mass}};
}

DistributionFunction distribution_from_json(const Json& j) {
  DistributionFunction df;
  df.thresholds = j.at("thresholds").get<std::vector<double>>();
  df.masses = j.at("masses").get<std::vector<double>>();
  df.domain_mass = j.at("domain_mass").get<double>();
  if (df.thresholds.size() != df.masses.size()) throw DomainError("thresholds and masses differ in length");
  return df;
}

Json to_json(const RearrangedFunction& w) {
  return {{"K", w.model.K()},
          {"N", w.model.N()},
          {"r", w.r},
          {"domain_mass", w.domain_mass},
          {"dirichlet", w.dirichlet},
          {"grid", vector_json(w.grid)},
          {"values", vector_json(w.values)}};
}

RearrangedFunction rearranged_from_json(const Json& j) {
  return RearrangedFunction{ModelSpaced(j.at("K").get<double>(), j.at("N").get<double>()),
                            j.at("r").get<double>(),
                            j.at("domain_mass").get<double>(),
                            j.at("dirichlet").get<bool>(),
                            json_vector(j.at("grid")),
                            json_vector(j.at("values"))};
}

Json to_json(const EigenResult& res) {
  return {{"lambda", res.lambda},
          {"method", to_string(res.method)},
          {"iterations", res.iterations},
          {"residual", res.residual},
          {"diagnostics", res.diagnostics},
          {"grid", vector_json(res.grid)},
          {"eigenfunction", vector_json(res.eigenfunction)}};
}

std::string eigenfunction_csv(const EigenResult& res) {
  std::ostringstream os;
  os << "x,u\n";
  for (Index i = 0; i < res.eigenfunction.size(); ++i)
    os << format_real(res.grid[i]) << ',' << format_real(res.eigenfunction[i]) << '\n';
  return os.str();
}

Json to_json(const DeficitReport& rep) {
  Json levels = Json::array();
  for (const LevelEntry& l : rep.per_level)
    levels.push_back({{"t", l.t}, {"perimeter", l.perimeter}, {"iso_profile", l.iso_profile}, {"f_u", l.f_u}});
  return {{"energy_in", rep.energy_in},
          {"energy_model", rep.energy_model},
          {"deficit", rep.deficit},
          {"metadata", rep.metadata},
          {"per_level", levels}};
}

std::string levels_csv(const DeficitReport& rep) {
  std::ostringstream os;
  os << "t,perimeter,iso_profile,f_u\n";
  for (const LevelEntry& l : rep.per_level)
    os << format_real(l.t) << ',' << format_real(l.perimeter) << ',' << format_real(l.iso_profile) << ','
       << format_real(l.f_u) << '\n';
  return os.str();
}

}  // namespace rgap

#include "rwrc/json_io.hpp"

#include <stdexcept>

namespace rwrc::io {

json domain_to_json(const lattice::Domain& G) {
  json intervals = json::array();
  for (int i = 0; i < G.d; ++i) intervals.push_back({G.lo[i], G.hi[i]});
  return intervals;
}

lattice::Domain domain_from_json(const json& j, int d) {
  if (!j.is_array() || static_cast<int>(j.size()) != d)
    throw std::invalid_argument("G must be an array of d [lo,hi] pairs");
  lattice::Domain G;
  G.d = d;
  for (int i = 0; i < d; ++i) {
    G.lo[i] = j[i].at(0).get<double>();
    G.hi[i] = j[i].at(1).get<double>();
  }
  return G;
}

json box_to_json(const lattice::LatticeBox& box) {
  return json{{"d", box.dim()}, {"alpha", box.alpha()}, {"G", domain_to_json(box.domain())}};
}

lattice::LatticeBox box_from_json(const json& j) {
  const int d = j.at("d").get<int>();
  const double alpha = j.at("alpha").get<double>();
  return lattice::build_box(d, alpha, domain_from_json(j.at("G"), d));
}

json model_to_json(const conductance::Model& m) {
  if (const auto* t = std::get_if<conductance::TailModel>(&m))
    return json{{"type", "tail"}, {"eta", t->eta}, {"D", t->D}, {"cap", t->cap}};
  if (const auto* e = std::get_if<conductance::EllipticModel>(&m)) {
    json law;
    switch (e->law.kind) {
      case conductance::Law::Kind::Uniform:
        law = json{{"kind", "uniform"}, {"a", e->law.a}, {"b", e->law.b}};
        break;
      case conductance::Law::Kind::TwoPoint:
        law = json{{"kind", "two_point"}, {"a", e->law.a}, {"b", e->law.b}, {"p", e->law.p}};
        break;
      case conductance::Law::Kind::Constant:
        law = json{{"kind", "constant"}, {"a", e->law.a}};
        break;
    }
    return json{{"type", "elliptic"}, {"lambda", e->lambda}, {"law", law}};
  }
  if (const auto* c = std::get_if<conductance::ConstantModel>(&m))
    return json{{"type", "constant"}, {"value", c->value}};
  return json{{"type", "none"}};
}

conductance::Model model_from_json(const json& j) {
  const std::string type = j.at("type").get<std::string>();
  if (type == "tail") {
    conductance::TailModel m;
    m.eta = j.at("eta").get<double>();
    m.D = j.at("D").get<double>();
    m.cap = j.value("cap", 1.0);
    return m;
  }
  if (type == "elliptic") {
    const double lambda = j.at("lambda").get<double>();
    if (!j.contains("law")) return conductance::EllipticModel::uniform(lambda);
    const json& law = j.at("law");
    const std::string kind = law.at("kind").get<std::string>();
    if (kind == "uniform") return conductance::EllipticModel::uniform(lambda);
    if (kind == "two_point")
      return conductance::EllipticModel::two_point(law.at("a").get<double>(),
                                                   law.at("b").get<double>(),
                                                   law.value("p", 0.5));
    if (kind == "constant")
      return conductance::EllipticModel{
          lambda, conductance::Law{conductance::Law::Kind::Constant,
                                   law.at("a").get<double>(), law.at("a").get<double>(), 0.5}};
    throw std::invalid_argument("unknown elliptic law kind");
  }
  if (type == "constant") return conductance::ConstantModel{j.at("value").get<double>()};
  if (type == "none") return std::monostate{};
  throw std::invalid_argument("unknown model type");
}

json field_to_json(const conductance::ConductanceField& field) {
  const auto& box = field.box();
  json edges = json::array();
  field.weights().for_each([&](const lattice::Coord& z, int dir, double w) {
    json row = json::array();
    for (int i = 0; i < box.dim(); ++i) row.push_back(z[i]);
    row.push_back(dir);
    row.push_back(w);
    edges.push_back(std::move(row));
  });
  json out = box_to_json(box);
  out["format"] = "rwrc-field-v1";
  out["model"] = model_to_json(field.model());
  out["seed"] = field.seed();
  out["edges"] = std::move(edges);
  return out;
}

conductance::ConductanceField field_from_json(const json& j) {
  if (j.value("format", "") != "rwrc-field-v1")
    throw std::invalid_argument("not a rwrc field file");
  const auto box = box_from_json(j);
  const int d = box.dim();
  conductance::EdgeValues weights(box);
  const json& edges = j.at("edges");
  if (static_cast<std::int64_t>(edges.size()) != weights.edge_count())
    throw std::invalid_argument("edge list does not cover the box");
  for (const auto& row : edges) {
    lattice::Coord z{};
    for (int i = 0; i < d; ++i) z[i] = row.at(i).get<std::int64_t>();
    const int dir = row.at(d).get<int>();
    const double w = row.at(d + 1).get<double>();
    if (!(w > 0.0)) throw std::invalid_argument("weights must be positive");
    weights.at(std::span<const std::int64_t>(z.data(), d), dir) = w;
  }
  return conductance::ConductanceField(box, std::move(weights),
                                       model_from_json(j.value("model", json{{"type", "none"}})),
                                       j.value("seed", 0ULL));
}

conductance::ScalarField scalar_field_from_json(const json& j) {
  const std::string type = j.is_string() ? j.get<std::string>() : j.at("type").get<std::string>();
  if (type == "zero") return [](std::span<const double>) { return 0.0; };
  if (type == "const") {
    const double v = j.at("value").get<double>();
    return [v](std::span<const double>) { return v; };
  }
  if (type == "coord") {
    const int idx = j.value("index", 0);
    return [idx](std::span<const double> y) { return y[idx]; };
  }
  if (type == "coords_sum")
    return [](std::span<const double> y) {
      double s = 0.0;
      for (const double v : y) s += v;
      return s;
    };
  throw std::invalid_argument("unknown potential spec");
}

}  // namespace rwrc::io

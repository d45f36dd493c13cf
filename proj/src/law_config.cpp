#include "dcm/law_config.hpp"

#include <sstream>
#include <vector>

#include "dcm/errors.hpp"

namespace dcm {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::vector<double> split_numbers(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ValidationError("not a number in law spec: '" + item + "'");
    }
  }
  return out;
}

void expect_count(const std::vector<double>& v, std::size_t count, const std::string& name) {
  if (v.size() != count)
    throw ValidationError("law '" + name + "' takes " + std::to_string(count) + " parameter(s)");
}

nlohmann::json marginal_to_json(const DiscreteLaw& law) {
  return std::visit(overloaded{
                        [&](const family::Tabulated&) {
                          return nlohmann::json{{"dist", "pmf"},
                                                {"values", std::vector<double>(law.pmf().begin(), law.pmf().end())}};
                        },
                        [](const family::PointMass& p) { return nlohmann::json{{"dist", "point"}, {"value", p.value}}; },
                        [](const family::PoissonPareto& p) {
                          return nlohmann::json{{"dist", "poisson_pareto"}, {"shape", p.shape}, {"scale", p.scale}};
                        },
                        [](const family::Zipf& z) {
                          return nlohmann::json{{"dist", "zipf"}, {"exponent", z.exponent}, {"corpus", z.corpus}};
                        },
                        [](const family::Geometric& g) { return nlohmann::json{{"dist", "geometric"}, {"success", g.success}}; },
                    },
                    law.family());
}

}  // namespace

DiscreteLaw parse_marginal(const nlohmann::json& j) {
  try {
    const std::string dist = j.at("dist").get<std::string>();
    if (dist == "poisson_pareto")
      return DiscreteLaw::poisson_pareto(j.at("shape").get<double>(), j.value("scale", 1.0));
    if (dist == "zipf") return DiscreteLaw::zipf(j.at("exponent").get<double>(), j.at("corpus").get<std::uint32_t>());
    if (dist == "point") return DiscreteLaw::point_mass(j.at("value").get<std::uint32_t>());
    if (dist == "geometric") return DiscreteLaw::geometric(j.at("success").get<double>());
    if (dist == "pmf") return DiscreteLaw::from_pmf(j.at("values").get<std::vector<double>>());
    throw ValidationError("unknown marginal dist '" + dist + "'");
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed marginal law: ") + e.what());
  }
}

JointDegreeLaw parse_joint_law(const nlohmann::json& j) {
  try {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "d_regular") return JointDegreeLaw::d_regular(j.at("d").get<std::uint32_t>());
    if (kind == "independent")
      return JointDegreeLaw::independent(parse_marginal(j.at("in")), parse_marginal(j.at("out")));
    if (kind == "equal") return JointDegreeLaw::equal(parse_marginal(j.at("law")));
    if (kind == "explicit") {
      std::vector<JointAtom> table;
      for (const auto& row : j.at("table")) {
        if (!row.is_array() || row.size() != 3) throw ValidationError("explicit table rows are [d_minus, d_plus, p]");
        table.push_back({row[0].get<std::uint32_t>(), row[1].get<std::uint32_t>(), row[2].get<double>()});
      }
      return JointDegreeLaw::explicit_table(std::move(table));
    }
    throw ValidationError("unknown law kind '" + kind + "'");
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed law: ") + e.what());
  }
}

JointDegreeLaw parse_law_spec(const std::string& text) {
  if (!text.empty() && text.front() == '{') {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError(std::string("law JSON does not parse: ") + e.what());
    }
    return parse_joint_law(j);
  }
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw ValidationError("law spec needs 'name:params', got '" + text + "'");
  const std::string name = text.substr(0, colon);
  const auto v = split_numbers(text.substr(colon + 1));

  if (name == "dregular") {
    expect_count(v, 1, name);
    return JointDegreeLaw::d_regular(static_cast<std::uint32_t>(v[0]));
  }
  if (name == "pp-indep" || name == "pp-equal") {
    if (v.size() != 1 && v.size() != 2) throw ValidationError("law '" + name + "' takes shape[,scale]");
    const double scale = v.size() == 2 ? v[1] : 1.0;
    if (name == "pp-equal") return JointDegreeLaw::equal(DiscreteLaw::poisson_pareto(v[0], scale));
    auto m = DiscreteLaw::poisson_pareto(v[0], scale);
    return JointDegreeLaw::independent(m, m);
  }
  if (name == "zipf-equal" || name == "zipf-indep") {
    expect_count(v, 2, name);
    auto m = DiscreteLaw::zipf(v[0], static_cast<std::uint32_t>(v[1]));
    if (name == "zipf-equal") return JointDegreeLaw::equal(m);
    return JointDegreeLaw::independent(m, m);
  }
  if (name == "geom-indep" || name == "geom-equal") {
    expect_count(v, 1, name);
    auto m = DiscreteLaw::geometric(v[0]);
    if (name == "geom-equal") return JointDegreeLaw::equal(m);
    return JointDegreeLaw::independent(m, m);
  }
  throw ValidationError("unknown law name '" + name + "'");
}

nlohmann::json law_to_json(const JointDegreeLaw& law) {
  return std::visit(overloaded{
                        [](const JointDegreeLaw::DRegular& r) { return nlohmann::json{{"kind", "d_regular"}, {"d", r.d}}; },
                        [](const JointDegreeLaw::Independent& i) {
                          return nlohmann::json{{"kind", "independent"},
                                                {"in", marginal_to_json(i.in_law)},
                                                {"out", marginal_to_json(i.out_law)}};
                        },
                        [](const JointDegreeLaw::Equal& e) {
                          return nlohmann::json{{"kind", "equal"}, {"law", marginal_to_json(e.law)}};
                        },
                        [](const JointDegreeLaw::Explicit& x) {
                          nlohmann::json table = nlohmann::json::array();
                          for (const auto& a : x.table) table.push_back({a.d_minus, a.d_plus, a.probability});
                          return nlohmann::json{{"kind", "explicit"}, {"table", table}};
                        },
                    },
                    law.kind());
}

}  // namespace dcm

#include "srnbound/network_io.hpp"

#include <fstream>
#include <sstream>

#include "srnbound/errors.hpp"

namespace srnbound {

using nlohmann::json;

namespace {

FactorKind parse_kind(const std::string& k) {
  if (k == "falling" || k == "falling-factorial" || k == "falling_factorial") {
    return FactorKind::kFalling;
  }
  if (k == "power" || k == "plain-power" || k == "plain_power") return FactorKind::kPower;
  if (k == "indicator") return FactorKind::kIndicator;
  throw ValidationError("unknown factor kind '" + k + "'");
}

const char* kind_name(FactorKind k) {
  switch (k) {
    case FactorKind::kFalling:
      return "falling";
    case FactorKind::kPower:
      return "power";
    case FactorKind::kIndicator:
      return "indicator";
  }
  return "falling";
}

std::size_t parse_species_ref(const json& ref, const std::vector<std::string>& species) {
  if (ref.is_number_integer()) {
    auto idx = ref.get<long long>();
    if (idx < 0 || static_cast<std::size_t>(idx) >= species.size()) {
      throw ValidationError("species index " + std::to_string(idx) + " out of range");
    }
    return static_cast<std::size_t>(idx);
  }
  if (ref.is_string()) {
    const auto name = ref.get<std::string>();
    for (std::size_t s = 0; s < species.size(); ++s) {
      if (species[s] == name) return s;
    }
    throw ValidationError("unknown species '" + name + "'");
  }
  throw ValidationError("factor species must be a name or an index");
}

}  // namespace

ReactionNetwork network_from_json(const json& doc) {
  try {
    if (!doc.contains("species") || !doc.contains("reactions")) {
      throw ValidationError("network document needs 'species' and 'reactions'");
    }
    auto species = doc.at("species").get<std::vector<std::string>>();
    std::map<std::string, double> params;
    if (doc.contains("parameters")) {
      for (const auto& [k, v] : doc.at("parameters").items()) params[k] = v.get<double>();
    }
    std::vector<Reaction> reactions;
    for (const auto& jr : doc.at("reactions")) {
      Reaction r;
      r.name = jr.value("name", "");
      r.change = jr.at("change").get<std::vector<Count>>();
      for (const auto& jt : jr.at("propensity")) {
        Term t;
        const auto& c = jt.at("coeff");
        if (c.is_string()) {
          t.parameter = c.get<std::string>();
        } else {
          t.value = c.get<double>();
          if (t.value < 0) throw ValidationError("negative literal coefficient");
        }
        if (jt.contains("factors")) {
          for (const auto& jf : jt.at("factors")) {
            Factor f;
            f.species = parse_species_ref(jf.at("species"), species);
            f.exponent = jf.value("exponent", 1);
            if (f.exponent < 1) throw ValidationError("factor exponent must be positive");
            f.kind = parse_kind(jf.value("kind", std::string("falling")));
            t.factors.push_back(f);
          }
        }
        r.propensity.push_back(std::move(t));
      }
      reactions.push_back(std::move(r));
    }
    return ReactionNetwork(std::move(species), std::move(reactions), std::move(params));
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed network document: ") + e.what());
  }
}

json network_to_json(const ReactionNetwork& network) {
  json doc;
  doc["species"] = network.species();
  doc["parameters"] = network.parameters();
  json rxs = json::array();
  for (const Reaction& r : network.reactions()) {
    json jr;
    if (!r.name.empty()) jr["name"] = r.name;
    jr["change"] = r.change;
    json terms = json::array();
    for (const Term& t : r.propensity) {
      json jt;
      if (t.parameter.empty()) {
        jt["coeff"] = t.value;
      } else {
        jt["coeff"] = t.parameter;
      }
      json fs = json::array();
      for (const Factor& f : t.factors) {
        fs.push_back({{"species", network.species()[f.species]},
                      {"exponent", f.exponent},
                      {"kind", kind_name(f.kind)}});
      }
      jt["factors"] = fs;
      terms.push_back(jt);
    }
    jr["propensity"] = terms;
    rxs.push_back(jr);
  }
  doc["reactions"] = rxs;
  return doc;
}

ReactionNetwork load_network(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open network file '" + path.string() + "'");
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw ValidationError("network file '" + path.string() + "' is not valid JSON: " + e.what());
  }
  return network_from_json(doc);
}

std::vector<Count> parse_count_list(const std::string& text) {
  std::vector<Count> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t pos = 0;
      out.push_back(std::stoll(item, &pos));
      if (pos != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ValidationError("not an integer list: '" + text + "'");
    }
  }
  if (out.empty()) throw ValidationError("empty integer list");
  return out;
}

}  // namespace srnbound

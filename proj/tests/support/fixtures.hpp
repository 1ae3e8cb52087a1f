#pragma once

#include <map>
#include <string>

#include "srnbound/network.hpp"

namespace fixtures {

/** Default parameters of the toy network. */
inline std::map<std::string, double> default_theta() {
  return {{"b1", 1.0}, {"b2", 2.5}, {"alpha", 2.5}, {"beta", 2.0},
          {"d1", 2.5}, {"d2", 2.5}, {"d3", 3.0}};
}

inline srnbound::Factor falling(std::size_t s, int e = 1) {
  return {s, e, srnbound::FactorKind::kFalling};
}

/** Three-species feedback network with quadratic X2 production. */
inline srnbound::ReactionNetwork toy_network(std::map<std::string, double> theta = default_theta()) {
  using srnbound::Reaction;
  using srnbound::Term;
  std::vector<Reaction> rx;
  rx.push_back({"creation", {1, 0, 0},
                {Term{1, "b1", {falling(1)}}, Term{1, "b1", {falling(2)}}, Term{1, "b2", {}}}});
  rx.push_back({"dimerization", {-2, 3, 0}, {Term{1, "alpha", {falling(0, 2)}}}});
  rx.push_back({"binding", {-1, -1, 1}, {Term{1, "beta", {falling(0), falling(1)}}}});
  rx.push_back({"decay1", {-1, 0, 0}, {Term{1, "d1", {falling(0)}}}});
  rx.push_back({"decay2", {0, -1, 0}, {Term{1, "d2", {falling(1)}}}});
  rx.push_back({"decay3", {0, 0, -1}, {Term{1, "d3", {falling(2)}}}});
  return srnbound::ReactionNetwork({"X1", "X2", "X3"}, std::move(rx), std::move(theta));
}

/** One-species birth-death network with constant rates. */
inline srnbound::ReactionNetwork birth_death(double birth, double death) {
  using srnbound::Reaction;
  using srnbound::Term;
  std::vector<Reaction> rx;
  rx.push_back({"birth", {1}, {Term{birth, "", {}}}});
  rx.push_back({"death", {-1}, {Term{death, "", {{0, 1, srnbound::FactorKind::kIndicator}}}}});
  return srnbound::ReactionNetwork({"X"}, std::move(rx));
}

}  // namespace fixtures

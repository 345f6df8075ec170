#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <string_view>

#include "drlogit/types.hpp"

namespace drlogit {

enum class LinkKind { identity, logistic_expit, exponential };

// Monotone link g with derivative and antiderivative; G' = g so that
// G(x'a) - A x'a is a convex Bregman-type loss for the moment equation
// sum (A - g(x'a)) x = 0.
struct LinkFunction {
  LinkKind kind = LinkKind::identity;

  double g(double u) const {
    switch (kind) {
      case LinkKind::identity: return u;
      case LinkKind::logistic_expit: return expit(u);
      case LinkKind::exponential: return std::exp(std::min(u, kExpArgMax));
    }
    return u;
  }

  double dg(double u) const {
    switch (kind) {
      case LinkKind::identity: return 1.0;
      case LinkKind::logistic_expit: {
        const double e = expit(u);
        return e * (1.0 - e);
      }
      case LinkKind::exponential:
        return std::exp(std::min(u, kExpArgMax));
    }
    return 1.0;
  }

  // Antiderivative of g; softplus for the expit link (stable for large |u|).
  double G(double u) const {
    switch (kind) {
      case LinkKind::identity: return 0.5 * u * u;
      case LinkKind::logistic_expit:
        return u > 0.0 ? u + std::log1p(std::exp(-u))
                       : std::log1p(std::exp(u));
      case LinkKind::exponential:
        return std::exp(std::min(u, kExpArgMax));
    }
    return 0.0;
  }

  const char* name() const {
    switch (kind) {
      case LinkKind::identity: return "identity";
      case LinkKind::logistic_expit: return "expit";
      case LinkKind::exponential: return "exp";
    }
    return "?";
  }

  static LinkFunction identity() { return {LinkKind::identity}; }
  static LinkFunction expit_link() { return {LinkKind::logistic_expit}; }
  static LinkFunction exponential() { return {LinkKind::exponential}; }

  static LinkFunction from_name(std::string_view s) {
    if (s == "identity") return identity();
    if (s == "expit") return expit_link();
    if (s == "exp") return exponential();
    throw std::invalid_argument("unknown link: " + std::string(s));
  }
};

}  // namespace drlogit

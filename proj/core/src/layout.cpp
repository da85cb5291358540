#include "chronoframe/layout.hpp"

#include <set>

namespace chronoframe {

const char* err_name(Err code) {
  switch (code) {
    case Err::LabelCollision: return "LabelCollision";
    case Err::UnknownFactor: return "UnknownFactor";
    case Err::NotHermitian: return "NotHermitian";
    case Err::InvalidDimension: return "InvalidDimension";
    case Err::InvalidWidth: return "InvalidWidth";
    case Err::RequiresPropagatorPath: return "RequiresPropagatorPath";
    case Err::NoPhysicalStates: return "NoPhysicalStates";
    case Err::NotCommensurate: return "NotCommensurate";
    case Err::DegenerateNormalization: return "DegenerateNormalization";
    case Err::OffGridTime: return "OffGridTime";
    case Err::UnsupportedKinematicalForm: return "UnsupportedKinematicalForm";
    case Err::UnresolvableWidth: return "UnresolvableWidth";
    case Err::BadReadoutTime: return "BadReadoutTime";
    case Err::IndistinctBranches: return "IndistinctBranches";
    case Err::OrderNotDefined: return "OrderNotDefined";
    case Err::UnknownField: return "UnknownField";
    case Err::GuardGapViolation: return "GuardGapViolation";
    case Err::ConfigError: return "ConfigError";
    case Err::Internal: return "Internal";
  }
  return "Unknown";
}

SpaceLayout::SpaceLayout(std::vector<Factor> factors) : factors_(std::move(factors)) {
  std::set<std::string> seen;
  for (const auto& f : factors_) {
    if (f.dim < 1) {
      throw SimError(Err::InvalidDimension,
                     "factor '" + f.label + "' has dimension " + std::to_string(f.dim));
    }
    if (!seen.insert(f.label).second) {
      throw SimError(Err::LabelCollision, "duplicate factor label '" + f.label + "'");
    }
    dim_ *= f.dim;
  }
}

bool SpaceLayout::has(std::string_view label) const { return find(label).has_value(); }

std::optional<std::size_t> SpaceLayout::find(std::string_view label) const {
  for (std::size_t i = 0; i < factors_.size(); ++i) {
    if (factors_[i].label == label) return i;
  }
  return std::nullopt;
}

std::size_t SpaceLayout::require(std::string_view label) const {
  if (auto i = find(label)) return *i;
  throw SimError(Err::UnknownFactor, "no factor labeled '" + std::string(label) + "'");
}

long SpaceLayout::stride(std::size_t i) const {
  long s = 1;
  for (std::size_t j = i + 1; j < factors_.size(); ++j) s *= factors_[j].dim;
  return s;
}

SpaceLayout SpaceLayout::without(std::string_view label) const {
  std::size_t pos = require(label);
  std::vector<Factor> rest;
  rest.reserve(factors_.size() - 1);
  for (std::size_t i = 0; i < factors_.size(); ++i) {
    if (i != pos) rest.push_back(factors_[i]);
  }
  return SpaceLayout(std::move(rest));
}

SpaceLayout SpaceLayout::inserted(std::size_t pos, Factor f) const {
  std::vector<Factor> out = factors_;
  out.insert(out.begin() + static_cast<long>(pos), std::move(f));
  return SpaceLayout(std::move(out));
}

SpaceLayout SpaceLayout::subset(const std::vector<std::string>& labels) const {
  std::vector<Factor> out;
  for (const auto& f : factors_) {
    for (const auto& l : labels) {
      if (f.label == l) out.push_back(f);
    }
  }
  if (out.size() != labels.size()) {
    for (const auto& l : labels) require(l);
  }
  return SpaceLayout(std::move(out));
}

SpaceLayout SpaceLayout::concat(const SpaceLayout& a, const SpaceLayout& b) {
  std::vector<Factor> out = a.factors_;
  out.insert(out.end(), b.factors_.begin(), b.factors_.end());
  return SpaceLayout(std::move(out));
}

}  // namespace chronoframe

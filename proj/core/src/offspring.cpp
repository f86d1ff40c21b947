#include "gwlab/offspring.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "gwlab/rates.hpp"

namespace gwlab {

namespace {

[[noreturn]] void fail(const std::string& msg) { throw std::invalid_argument("offspring spec: " + msg); }

double parse_number(std::string_view s) {
  try {
    size_t pos = 0;
    const double v = std::stod(std::string(s), &pos);
    if (pos != s.size()) fail("malformed number '" + std::string(s) + "'");
    return v;
  } catch (const std::invalid_argument&) {
    fail("malformed number '" + std::string(s) + "'");
  } catch (const std::out_of_range&) {
    fail("number out of range '" + std::string(s) + "'");
  }
}

int parse_count(std::string_view s) {
  int v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) fail("malformed count '" + std::string(s) + "'");
  return v;
}

}  // namespace

OffspringDistribution OffspringDistribution::from_atoms(const std::vector<std::pair<int, double>>& pairs) {
  if (pairs.empty()) fail("empty atom list");
  OffspringDistribution d;
  d.atoms_.reserve(pairs.size());
  for (const auto& [k, w] : pairs) {
    if (k <= 0) fail("leaf atom forbidden (counts must be >= 1)");
    if (!(w > 0)) fail("weights must be strictly positive");
    d.atoms_.push_back({k, w});
  }
  std::sort(d.atoms_.begin(), d.atoms_.end(), [](const Atom& a, const Atom& b) { return a.count < b.count; });
  for (size_t i = 1; i < d.atoms_.size(); ++i)
    if (d.atoms_[i].count == d.atoms_[i - 1].count) fail("duplicate count " + std::to_string(d.atoms_[i].count));

  double sum = 0;
  for (const Atom& a : d.atoms_) sum += a.weight;
  if (std::abs(sum - 1.0) >= 1e-9) fail("weights sum to " + std::to_string(sum) + ", outside 1 +/- 1e-9");
  for (Atom& a : d.atoms_) a.weight /= sum;

  d.cum_.reserve(d.atoms_.size());
  double c = 0;
  for (const Atom& a : d.atoms_) {
    c += a.weight;
    d.cum_.push_back(c);
    d.mean_ += a.weight * a.count;
    d.mean_inv_ += a.weight / a.count;
  }
  d.cum_.back() = 1.0;
  d.min_degree_ = d.atoms_.front().count;
  d.max_degree_ = d.atoms_.back().count;
  return d;
}

OffspringDistribution OffspringDistribution::constant(int k) { return from_atoms({{k, 1.0}}); }

OffspringDistribution OffspringDistribution::parse(std::string_view spec) {
  if (spec.empty()) fail("empty spec");
  if (spec.rfind("const:", 0) == 0) return constant(parse_count(spec.substr(6)));
  if (spec.rfind("uniform:", 0) == 0) {
    const std::string_view range = spec.substr(8);
    const size_t dash = range.find('-');
    if (dash == std::string_view::npos) fail("uniform spec needs 'uniform:a-b'");
    const int a = parse_count(range.substr(0, dash));
    const int b = parse_count(range.substr(dash + 1));
    if (b < a) fail("uniform spec needs a <= b");
    std::vector<std::pair<int, double>> pairs;
    for (int k = a; k <= b; ++k) pairs.emplace_back(k, 1.0 / (b - a + 1));
    return from_atoms(pairs);
  }
  std::vector<std::pair<int, double>> pairs;
  size_t pos = 0;
  while (pos <= spec.size()) {
    size_t comma = spec.find(',', pos);
    if (comma == std::string_view::npos) comma = spec.size();
    const std::string_view item = spec.substr(pos, comma - pos);
    const size_t colon = item.find(':');
    if (colon == std::string_view::npos) fail("expected 'count:weight' in '" + std::string(item) + "'");
    pairs.emplace_back(parse_count(item.substr(0, colon)), parse_number(item.substr(colon + 1)));
    pos = comma + 1;
    if (comma == spec.size()) break;
  }
  return from_atoms(pairs);
}

double OffspringDistribution::pmf(int k) const {
  for (const Atom& a : atoms_)
    if (a.count == k) return a.weight;
  return 0.0;
}

int OffspringDistribution::quantile(double u) const {
  // cum_ is short (finite support); linear scan beats binary search here.
  for (size_t i = 0; i + 1 < cum_.size(); ++i)
    if (u < cum_[i]) return atoms_[i].count;
  return atoms_.back().count;
}

double OffspringDistribution::mean_decouple_width(double beta, double eps) const {
  if (!(beta > 0)) throw std::invalid_argument("mean_decouple_width: beta must be > 0");
  if (eps < 0) throw std::invalid_argument("mean_decouple_width: eps must be >= 0");
  double s = 0;
  for (const Atom& a : atoms_) s += a.weight * decouple_width(a.count, beta, eps);
  return s;
}

std::string OffspringDistribution::spec_string() const {
  if (atoms_.size() == 1) return "const:" + std::to_string(atoms_[0].count);
  std::string s;
  for (size_t i = 0; i < atoms_.size(); ++i) {
    if (i) s += ',';
    char buf[48];
    std::snprintf(buf, sizeof buf, "%d:%.17g", atoms_[i].count, atoms_[i].weight);
    s += buf;
  }
  return s;
}

}  // namespace gwlab

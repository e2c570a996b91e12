#include "qstate/corpus.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace qstate {

namespace {

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

// First nonzero component positive: k and -k give the same modes.
bool upper_half(const std::array<int, 3>& k) {
  for (int c : k) {
    if (c != 0) return c > 0;
  }
  return false;
}

}  // namespace

std::string random_trig_expression(Topology topology, int k_max, std::mt19937_64& rng) {
  if (k_max < 1) throw std::invalid_argument("random_trig_expression: k_max must be >= 1");
  std::normal_distribution<double> normal(0.0, 1.0);
  const bool sphere = topology == Topology::sphere;
  const int dims = sphere ? 3 : 2;
  std::string out;
  std::array<int, 3> k{};
  for (k[0] = -k_max; k[0] <= k_max; ++k[0]) {
    for (k[1] = -k_max; k[1] <= k_max; ++k[1]) {
      for (k[2] = dims == 3 ? -k_max : 0; k[2] <= (dims == 3 ? k_max : 0); ++k[2]) {
        if (std::abs(k[0]) + std::abs(k[1]) + std::abs(k[2]) > k_max || !upper_half(k)) continue;
        const double damp = std::exp(-(k[0] * k[0] + k[1] * k[1] + k[2] * k[2]) / 4.0);
        const double a = normal(rng) * damp;
        const double b = normal(rng) * damp;
        std::string phase;
        if (sphere) {
          phase = std::to_string(k[0]) + "*x+" + std::to_string(k[1]) + "*y+" + std::to_string(k[2]) + "*z";
        } else {
          phase = "2*pi*(" + std::to_string(k[0]) + "*u+" + std::to_string(k[1]) + "*v)";
        }
        if (!out.empty()) out += "+";
        out += "(" + format_double(a) + ")*cos(" + phase + ")+(" + format_double(b) + ")*sin(" + phase + ")";
      }
    }
  }
  return out;
}

ScalarField random_trig_field(const MeshPtr& mesh, int k_max, std::mt19937_64& rng) {
  const std::string raw = random_trig_expression(mesh->topology(), k_max, rng);
  const ScalarField base = sample_field(mesh, raw);
  const double sup = base.sup_norm();
  if (!(sup > 0.0)) throw std::runtime_error("random_trig_field: sampled polynomial vanishes on the mesh");
  // Same values as sampling the generator text: the division is its last
  // operation and %.17g round-trips sup.
  std::vector<double> values(base.values().begin(), base.values().end());
  for (double& x : values) x /= sup;
  return ScalarField(mesh, std::move(values), "(" + raw + ")/" + format_double(sup));
}

std::vector<ScalarField> trig_corpus(const MeshPtr& mesh, std::size_t count, int k_max, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<ScalarField> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(random_trig_field(mesh, k_max, rng));
  return out;
}

}  // namespace qstate

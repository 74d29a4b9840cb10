#include "homodyne/network.hpp"

#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

#include <Eigen/Dense>

#include "homodyne/errors.hpp"

namespace homodyne {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::vector<NodeId> terminals(const ElementKind& kind) {
  return std::visit(
      overloaded{
          [](const Resistor& r) { return std::vector<NodeId>{r.a, r.b}; },
          [](const Capacitor& c) { return std::vector<NodeId>{c.a, c.b}; },
          [](const Transconductance& g) {
            return std::vector<NodeId>{g.out_p, g.out_n, g.ctrl_p, g.ctrl_n};
          },
          [](const CurrentSource& s) { return std::vector<NodeId>{s.from, s.into}; },
      },
      kind);
}

struct DisjointSet {
  explicit DisjointSet(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(std::size_t a, std::size_t b) { parent[find(a)] = find(b); }
  std::vector<std::size_t> parent;
};

using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

void assemble(const LinearNetwork& net, double freq, Matrix& Y, Vector& rhs) {
  const auto n = static_cast<Eigen::Index>(net.node_count() - 1);
  Y.setZero(n, n);
  rhs.setZero(n);
  const std::complex<double> jw(0.0, 2.0 * std::numbers::pi * freq);

  auto add = [&](NodeId row, NodeId col, std::complex<double> y) {
    if (row == ground_node || col == ground_node) return;
    Y(static_cast<Eigen::Index>(row - 1), static_cast<Eigen::Index>(col - 1)) += y;
  };
  auto admittance = [&](NodeId a, NodeId b, std::complex<double> y) {
    add(a, a, y);
    add(b, b, y);
    add(a, b, -y);
    add(b, a, -y);
  };

  for (const auto& e : net.elements()) {
    std::visit(overloaded{
                   [&](const Resistor& r) { admittance(r.a, r.b, 1.0 / r.ohms); },
                   [&](const Capacitor& c) { admittance(c.a, c.b, jw * c.farads); },
                   [&](const Transconductance& g) {
                     add(g.out_p, g.ctrl_p, g.siemens);
                     add(g.out_p, g.ctrl_n, -g.siemens);
                     add(g.out_n, g.ctrl_p, -g.siemens);
                     add(g.out_n, g.ctrl_n, g.siemens);
                   },
                   [&](const CurrentSource& s) {
                     if (s.into != ground_node) rhs(static_cast<Eigen::Index>(s.into - 1)) += s.amps;
                     if (s.from != ground_node) rhs(static_cast<Eigen::Index>(s.from - 1)) -= s.amps;
                   },
               },
               e.kind);
  }
}

}  // namespace

LinearNetwork::LinearNetwork() { names_.push_back("gnd"); }

NodeId LinearNetwork::add_node(std::string name) {
  names_.push_back(std::move(name));
  return names_.size() - 1;
}

void LinearNetwork::add(std::string name, ElementKind kind) {
  elements_.push_back({std::move(name), kind});
}

const Element* LinearNetwork::find(std::string_view name) const {
  for (const auto& e : elements_)
    if (e.name == name) return &e;
  return nullptr;
}

void LinearNetwork::check() const {
  DisjointSet sets(names_.size());
  for (const auto& e : elements_) {
    const auto ts = terminals(e.kind);
    for (auto t : ts)
      if (t >= names_.size())
        throw Error(ErrorCode::invalid_argument, "element " + e.name + " references missing node");
    for (std::size_t i = 1; i < ts.size(); ++i) sets.unite(ts[0], ts[i]);
  }
  for (NodeId n = 1; n < names_.size(); ++n)
    if (sets.find(n) != sets.find(ground_node))
      throw Error(ErrorCode::invalid_argument, "node " + names_[n] + " is not connected to ground");
  if (input_ >= names_.size() || output_ >= names_.size())
    throw Error(ErrorCode::invalid_argument, "ports reference missing nodes");
}

LinearNetwork LinearNetwork::impedance_scaled(double k) const {
  LinearNetwork out = *this;
  for (auto& e : out.elements_) {
    std::visit(overloaded{
                   [k](Resistor& r) { r.ohms *= k; },
                   [k](Capacitor& c) { c.farads /= k; },
                   [k](Transconductance& g) { g.siemens /= k; },
                   [](CurrentSource&) {},
               },
               e.kind);
  }
  return out;
}

AcSolution solve_ac(const LinearNetwork& net, double freq) {
  Matrix Y;
  Vector rhs;
  assemble(net, freq, Y, rhs);

  Eigen::FullPivLU<Matrix> lu(Y);
  if (lu.rank() < Y.rows())
    throw Error(ErrorCode::singular_matrix,
                "nodal admittance matrix is singular at " + std::to_string(freq) + " Hz");
  const Vector v = lu.solve(rhs);

  const double scale = Y.norm() * v.norm() + rhs.norm();
  AcSolution sol;
  sol.relative_residual = scale > 0.0 ? (Y * v - rhs).norm() / scale : 0.0;
  sol.voltages.assign(1, 0.0);
  for (Eigen::Index i = 0; i < v.size(); ++i) sol.voltages.push_back(v(i));
  return sol;
}

ComplexSpectrum ac_transimpedance(const LinearNetwork& net, std::span<const double> freqs,
                                  const AcOptions& options) {
  net.check();
  ComplexSpectrum out;
  out.freqs.assign(freqs.begin(), freqs.end());
  out.values.reserve(freqs.size());
  for (double f : freqs) {
    const auto sol = solve_ac(net, f);
    if (!(sol.relative_residual < options.max_relative_residual))
      throw Error(ErrorCode::singular_matrix,
                  "nodal solve residual " + std::to_string(sol.relative_residual) + " at " +
                      std::to_string(f) + " Hz");
    std::complex<double> z = sol.voltages[net.output()];
    if (auto pole = net.output_pole_hz()) z /= std::complex<double>(1.0, f / *pole);
    out.values.push_back(z);
  }
  return out;
}

}  // namespace homodyne

#pragma once

// Small-signal linear networks solved by nodal analysis in the frequency domain.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "homodyne/trace.hpp"

namespace homodyne {

using NodeId = std::size_t;
inline constexpr NodeId ground_node = 0;

struct Resistor { NodeId a, b; double ohms; };
struct Capacitor { NodeId a, b; double farads; };
// Current gm * (v(ctrl_p) - v(ctrl_n)) flows from `out_p` through the element to `out_n`.
struct Transconductance { NodeId out_p, out_n, ctrl_p, ctrl_n; double siemens; };
// Unit-amplitude AC excitation injected into `into` and drawn from `from`.
struct CurrentSource { NodeId from, into; double amps; };

using ElementKind = std::variant<Resistor, Capacitor, Transconductance, CurrentSource>;

struct Element {
  std::string name;
  ElementKind kind;
};

class LinearNetwork {
 public:
  LinearNetwork();

  NodeId add_node(std::string name);
  void add(std::string name, ElementKind kind);

  void set_ports(NodeId input, NodeId output) { input_ = input; output_ = output; }
  // Behavioural single-pole stage applied to the output (e.g. a unity-gain buffer).
  void set_output_pole(std::optional<double> hz) { output_pole_hz_ = hz; }

  std::size_t node_count() const { return names_.size(); }  // including ground
  const std::vector<std::string>& node_names() const { return names_; }
  const std::vector<Element>& elements() const { return elements_; }
  const Element* find(std::string_view name) const;
  NodeId input() const { return input_; }
  NodeId output() const { return output_; }
  std::optional<double> output_pole_hz() const { return output_pole_hz_; }

  // Throws invalid_argument on dangling node references or disconnected nodes.
  void check() const;

  // Returns a copy with resistances multiplied by k, capacitances divided by k and
  // transconductances divided by k.
  LinearNetwork impedance_scaled(double k) const;

 private:
  std::vector<std::string> names_;
  std::vector<Element> elements_;
  NodeId input_ = ground_node;
  NodeId output_ = ground_node;
  std::optional<double> output_pole_hz_;
};

struct AcOptions {
  double max_relative_residual = 1e-9;
};

// v(output) per unit current injected by the network's current sources, at each
// frequency, times the optional output pole. Throws singular_matrix for degenerate
// networks or when a solve misses the residual bound.
ComplexSpectrum ac_transimpedance(const LinearNetwork& net, std::span<const double> freqs,
                                  const AcOptions& options = {});

// Node voltages for one frequency; exposed for tests that audit KCL.
struct AcSolution {
  std::vector<std::complex<double>> voltages;  // index 0 is ground
  double relative_residual = 0.0;
};
AcSolution solve_ac(const LinearNetwork& net, double freq);

}  // namespace homodyne

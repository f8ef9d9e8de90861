#pragma once

// Central finite-difference verification of analytic gradients.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "pilu/activations.hpp"
#include "pilu/model.hpp"

namespace pilu {

struct GradCheckOptions {
    double step = 1e-5;
    double tolerance = 1e-4;
    /// Relative error is |a - n| / max(|a|, |n|, floor); the floor keeps
    /// entries whose true gradient is ~0 from dividing round-off by ~0.
    double denominator_floor = 1e-6;
    /// Entries probed per parameter tensor (0: all). Tensors with row
    /// labels (activation stores) are always probed in full.
    std::size_t max_entries_per_tensor = 0;
    std::uint64_t seed = 0;
    double l2_lambda = 1e-3;
    bool l2_half = false;
    /// Runs after the analytic backward pass; tests use it to corrupt gradients.
    std::function<void(Model<double>&)> mutate_gradients;
};

struct GradCheckEntry {
    std::string name;
    std::size_t checked = 0;
    /// Probes whose +/- step moved some unit onto another linear piece.
    std::size_t skipped = 0;
    double max_rel_error = 0.0;
    double analytic = 0.0, numeric = 0.0;  // at the worst entry
    bool pass = false;
};

struct GradCheckReport {
    std::vector<GradCheckEntry> entries;
    double tolerance = 0.0;
    bool pass = false;

    std::vector<std::string> failing() const;
    /// Fixed-width table, one line per entry.
    std::string table() const;
};

/// Checks d(loss)/d(parameter) for every registered parameter of a
/// softmax-terminated model, where loss = mean cross-entropy + L2 on
/// regularized tensors, evaluated in eval mode on (x, onehot).
GradCheckReport gradient_check(Model<double>& model, const Tensor<double>& x, const Tensor<double>& onehot,
                               const GradCheckOptions& opts = {});

/// Checks the input and parameter gradients of one activation on a random
/// (1, 3, 3, 2) input with random parameters, using loss = sum(w * f(x)).
/// Inputs are redrawn until every element is at least 1e-3 from a knot.
GradCheckReport activation_gradient_check(ActivationKind kind, SharingScheme scheme, std::uint64_t seed,
                                          double step = 1e-6, double tolerance = 1e-6);

/// A classifier with its activation parameters moved off their initial
/// values, plus a random pixel batch and random labels, all drawn from `seed`.
struct GradCheckProblem {
    Model<double> model;
    Tensor<double> x, onehot;
};

GradCheckProblem make_gradcheck_problem(const ActivationSpec& activation, std::uint64_t seed,
                                        std::size_t batch = 4, std::size_t num_classes = 10);

}  // namespace pilu

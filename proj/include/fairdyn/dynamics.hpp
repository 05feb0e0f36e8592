#pragma once

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

#include <fairdyn/fairsolve.hpp>
#include <fairdyn/popmodel.hpp>

namespace fairdyn {

enum class RetentionKind { OneMinusX, OneMinusXSquared, Table };

// Strictly decreasing retention probability as a function of group loss,
// mapping [0,1] into [0,1]. Inputs are clamped into [0,1] before evaluation.
class RetentionFn {
  public:
    static RetentionFn one_minus_x();
    static RetentionFn one_minus_x_squared();
    // Piecewise-linear retention through (loss, retention) knots; knot losses
    // must start at 0, end at 1, and be strictly increasing.
    static RetentionFn table(std::vector<std::pair<double, double>> knots);

    double operator()(double loss) const;
    RetentionKind kind() const { return kind_; }
    const std::vector<std::pair<double, double>>& knots() const {
        return knots_;
    }
    // Grid check of range and strict monotonicity.
    void validate() const;

  private:
    RetentionFn() = default;
    RetentionKind kind_ = RetentionKind::OneMinusX;
    std::vector<std::pair<double, double>> knots_;
};

enum class DynamicsKind {
    Accuracy,        // N' = N * nu(L) + beta
    ArrivalCoupled,  // N' = (N + beta) * nu(L)
    FnDriven,        // N' = N * nu(FPR) + beta
    Subgroup,        // per-label counts, each with its own subgroup loss
    RandomArrival    // accuracy form with Poisson arrivals
};

const char* to_string(DynamicsKind k);
DynamicsKind dynamics_kind_from_string(const std::string& name);

struct DynamicsModel {
    DynamicsKind kind = DynamicsKind::Accuracy;
    RetentionFn retention = RetentionFn::one_minus_x();
    double beta_a = 0.0;
    double beta_b = 0.0;
    // RandomArrival only.
    std::uint64_t rng_seed = 0;
    double arrival_mean_a = 0.0;
    double arrival_mean_b = 0.0;
};

void validate(const DynamicsModel& model);

// One population update under the model. RandomArrival draws that step's
// arrivals from the caller-owned generator (group a first) and fails without
// one; Subgroup requires per-subgroup counts in the state.
PopulationState step(const DynamicsModel& model, const PopulationState& state,
                     const DecisionPair& pair, const GroupSpec& ga,
                     const GroupSpec& gb, std::mt19937_64* rng = nullptr);

struct FixedPoint {
    double n_a_inf = 0.0;
    double n_b_inf = 0.0;
    double alpha_a_inf = 0.0;
    double loss_inf = 0.0;
};

// Closed-form limit of the dynamics under constant per-group losses
// (geometric recursion; Accuracy and FnDriven kinds only).
FixedPoint fixed_point(const DynamicsModel& model, double loss_a,
                       double loss_b);

}  // namespace fairdyn

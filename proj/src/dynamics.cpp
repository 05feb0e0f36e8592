#include <fairdyn/dynamics.hpp>

#include <algorithm>
#include <cmath>

#include <fairdyn/errors.hpp>

namespace fairdyn {

RetentionFn RetentionFn::one_minus_x() {
    RetentionFn f;
    f.kind_ = RetentionKind::OneMinusX;
    return f;
}

RetentionFn RetentionFn::one_minus_x_squared() {
    RetentionFn f;
    f.kind_ = RetentionKind::OneMinusXSquared;
    return f;
}

RetentionFn RetentionFn::table(std::vector<std::pair<double, double>> knots) {
    if (knots.size() < 2)
        throw StructureError("retention table needs at least two knots");
    if (knots.front().first != 0.0 || knots.back().first != 1.0)
        throw StructureError("retention knots must span losses 0 to 1");
    for (std::size_t i = 0; i < knots.size(); ++i) {
        const auto& [loss, keep] = knots[i];
        if (!(keep >= 0.0 && keep <= 1.0))
            throw StructureError("retention values must lie in [0, 1]");
        if (i > 0 && !(loss > knots[i - 1].first))
            throw StructureError("retention knot losses must increase");
    }
    RetentionFn f;
    f.kind_ = RetentionKind::Table;
    f.knots_ = std::move(knots);
    f.validate();
    return f;
}

double RetentionFn::operator()(double loss) const {
    const double x = std::clamp(loss, 0.0, 1.0);
    switch (kind_) {
        case RetentionKind::OneMinusX:
            return 1.0 - x;
        case RetentionKind::OneMinusXSquared:
            return 1.0 - x * x;
        case RetentionKind::Table: {
            const auto it = std::upper_bound(
                knots_.begin(), knots_.end(), x,
                [](double v, const auto& k) { return v < k.first; });
            if (it == knots_.begin()) return knots_.front().second;
            if (it == knots_.end()) return knots_.back().second;
            const auto& [x1, y1] = *(it - 1);
            const auto& [x2, y2] = *it;
            return y1 + (y2 - y1) * (x - x1) / (x2 - x1);
        }
    }
    throw StructureError("unknown retention kind");
}

void RetentionFn::validate() const {
    double prev = 2.0;
    for (int i = 0; i <= 1000; ++i) {
        const double v = (*this)(i / 1000.0);
        if (!(v >= 0.0 && v <= 1.0))
            throw StructureError("retention leaves [0, 1]");
        if (!(v < prev))
            throw StructureError("retention must be strictly decreasing");
        prev = v;
    }
}

const char* to_string(DynamicsKind k) {
    switch (k) {
        case DynamicsKind::Accuracy: return "accuracy";
        case DynamicsKind::ArrivalCoupled: return "arrival_coupled";
        case DynamicsKind::FnDriven: return "fn_driven";
        case DynamicsKind::Subgroup: return "subgroup";
        case DynamicsKind::RandomArrival: return "random_arrival";
    }
    throw DomainError("unknown dynamics kind");
}

DynamicsKind dynamics_kind_from_string(const std::string& name) {
    if (name == "accuracy") return DynamicsKind::Accuracy;
    if (name == "arrival_coupled") return DynamicsKind::ArrivalCoupled;
    if (name == "fn_driven") return DynamicsKind::FnDriven;
    if (name == "subgroup") return DynamicsKind::Subgroup;
    if (name == "random_arrival") return DynamicsKind::RandomArrival;
    throw DomainError("unknown dynamics kind: " + name);
}

void validate(const DynamicsModel& model) {
    if (!(model.beta_a >= 0.0) || !(model.beta_b >= 0.0))
        throw StructureError("arrival rates must be nonnegative");
    if (model.kind == DynamicsKind::RandomArrival &&
        (!(model.arrival_mean_a >= 0.0) || !(model.arrival_mean_b >= 0.0)))
        throw StructureError("arrival means must be nonnegative");
    model.retention.validate();
}

PopulationState step(const DynamicsModel& model, const PopulationState& state,
                     const DecisionPair& pair, const GroupSpec& ga,
                     const GroupSpec& gb, std::mt19937_64* rng) {
    const RetentionFn& nu = model.retention;
    switch (model.kind) {
        case DynamicsKind::Accuracy: {
            const double na = state.n_a * nu(expected_loss(ga, pair.theta_a)) +
                              model.beta_a;
            const double nb = state.n_b * nu(expected_loss(gb, pair.theta_b)) +
                              model.beta_b;
            return PopulationState(na, nb);
        }
        case DynamicsKind::ArrivalCoupled: {
            const double na = (state.n_a + model.beta_a) *
                              nu(expected_loss(ga, pair.theta_a));
            const double nb = (state.n_b + model.beta_b) *
                              nu(expected_loss(gb, pair.theta_b));
            return PopulationState(na, nb);
        }
        case DynamicsKind::FnDriven: {
            const double na =
                state.n_a * nu(false_positive_rate(ga, pair.theta_a)) +
                model.beta_a;
            const double nb =
                state.n_b * nu(false_positive_rate(gb, pair.theta_b)) +
                model.beta_b;
            return PopulationState(na, nb);
        }
        case DynamicsKind::Subgroup: {
            if (!state.subgroups)
                throw ModelError("subgroup dynamics need per-subgroup counts");
            const auto& s = *state.subgroups;
            std::array<double, 4> next{};
            next[0] = s[0] * nu(subgroup_loss(ga, 0, pair.theta_a)) +
                      ga.g0 * model.beta_a;
            next[1] = s[1] * nu(subgroup_loss(ga, 1, pair.theta_a)) +
                      ga.g1 * model.beta_a;
            next[2] = s[2] * nu(subgroup_loss(gb, 0, pair.theta_b)) +
                      gb.g0 * model.beta_b;
            next[3] = s[3] * nu(subgroup_loss(gb, 1, pair.theta_b)) +
                      gb.g1 * model.beta_b;
            return PopulationState(next[0] + next[1], next[2] + next[3], next);
        }
        case DynamicsKind::RandomArrival: {
            if (rng == nullptr)
                throw ModelError("random arrivals need the trajectory's generator");
            const auto draw = [&](double mean) {
                if (mean <= 0.0) return 0.0;
                std::poisson_distribution<long> p(mean);
                return static_cast<double>(p(*rng));
            };
            const double draw_a = draw(model.arrival_mean_a);
            const double draw_b = draw(model.arrival_mean_b);
            const double na =
                state.n_a * nu(expected_loss(ga, pair.theta_a)) + draw_a;
            const double nb =
                state.n_b * nu(expected_loss(gb, pair.theta_b)) + draw_b;
            return PopulationState(na, nb);
        }
    }
    throw ModelError("unknown dynamics kind");
}

FixedPoint fixed_point(const DynamicsModel& model, double loss_a,
                       double loss_b) {
    if (model.kind != DynamicsKind::Accuracy &&
        model.kind != DynamicsKind::FnDriven)
        throw ModelError("closed-form limit needs additive-arrival dynamics");
    for (double l : {loss_a, loss_b}) {
        if (!(l >= 0.0 && l <= 1.0)) throw DomainError("loss outside [0, 1]");
    }
    const double nu_a = model.retention(loss_a);
    const double nu_b = model.retention(loss_b);
    if (nu_a >= 1.0 || nu_b >= 1.0)
        throw DivergenceError("retention 1 means no attrition and no limit");
    if (model.beta_a <= 0.0 && model.beta_b <= 0.0)
        throw DomainError("at least one arrival rate must be positive");
    FixedPoint fp;
    fp.n_a_inf = model.beta_a / (1.0 - nu_a);
    fp.n_b_inf = model.beta_b / (1.0 - nu_b);
    fp.alpha_a_inf = model.beta_a * (1.0 - nu_b) /
                     (model.beta_a * (1.0 - nu_b) + model.beta_b * (1.0 - nu_a));
    fp.loss_inf = loss_b + (loss_a - loss_b) * fp.alpha_a_inf;
    return fp;
}

}  // namespace fairdyn

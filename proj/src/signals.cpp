#include "qho/signals.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <variant>

namespace qho {

void PulseSpec::validate() const {
    if (!(epsilon > 0.0) || !std::isfinite(epsilon))
        throw std::invalid_argument("PulseSpec.epsilon must be positive and finite");
    if (!std::isfinite(t_start) || !std::isfinite(t_end))
        throw std::invalid_argument("PulseSpec.t_start/t_end must be finite");
    if (!(t_end - t_start > 6.0 / epsilon))
        throw std::invalid_argument("PulseSpec.t_end - t_start must exceed 6/epsilon");
}

PulseSpec pulse_from_midpoints(double mid_rise, double mid_fall, double epsilon) {
    PulseSpec spec{mid_rise - 3.0 / epsilon, mid_fall + 3.0 / epsilon, epsilon};
    spec.validate();
    return spec;
}

double theta(double t, const PulseSpec& spec) {
    const double e = spec.epsilon;
    const double up = std::erf(e * (t - spec.t_start - 3.0 / e));
    const double down = std::erf(-e * (t - spec.t_end + 3.0 / e));
    return 0.25 * (1.0 + up) * (1.0 + down);
}

double theta_derivative(double t, const PulseSpec& spec) {
    const double e = spec.epsilon;
    const double au = e * (t - spec.t_start - 3.0 / e);
    const double ad = -e * (t - spec.t_end + 3.0 / e);
    const double gauss = 2.0 * std::numbers::inv_sqrtpi;
    const double dup = e * gauss * std::exp(-au * au);
    const double ddown = -e * gauss * std::exp(-ad * ad);
    return 0.25 * (dup * (1.0 + std::erf(ad)) + (1.0 + std::erf(au)) * ddown);
}

struct SumTerm {
    double coeff;
    std::shared_ptr<const ScalarSignal::Node> node;
};

struct SumNode {
    double offset;
    std::vector<SumTerm> terms;
};

struct ScalarSignal::Node {
    std::variant<double, PulseSpec, SumNode> data;
};

namespace {

double node_value(const ScalarSignal::Node& n, double t);
double node_derivative(const ScalarSignal::Node& n, double t);

double node_value(const ScalarSignal::Node& n, double t) {
    return std::visit(
        [t](const auto& d) -> double {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, double>) {
                return d;
            } else if constexpr (std::is_same_v<T, PulseSpec>) {
                return theta(t, d);
            } else {
                double v = d.offset;
                for (const auto& term : d.terms) v += term.coeff * node_value(*term.node, t);
                return v;
            }
        },
        n.data);
}

double node_derivative(const ScalarSignal::Node& n, double t) {
    return std::visit(
        [t](const auto& d) -> double {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, double>) {
                return 0.0;
            } else if constexpr (std::is_same_v<T, PulseSpec>) {
                return theta_derivative(t, d);
            } else {
                double v = 0.0;
                for (const auto& term : d.terms) v += term.coeff * node_derivative(*term.node, t);
                return v;
            }
        },
        n.data);
}

void collect_pulses(const ScalarSignal::Node& n, std::vector<PulseSpec>& out) {
    std::visit(
        [&out](const auto& d) {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, PulseSpec>) {
                out.push_back(d);
            } else if constexpr (std::is_same_v<T, SumNode>) {
                for (const auto& term : d.terms) collect_pulses(*term.node, out);
            }
        },
        n.data);
}

} // namespace

ScalarSignal::ScalarSignal() : ScalarSignal(constant(0.0)) {}

ScalarSignal::ScalarSignal(std::shared_ptr<const Node> root) : root_(std::move(root)) {}

ScalarSignal ScalarSignal::constant(double value) {
    return ScalarSignal(std::make_shared<const Node>(Node{value}));
}

ScalarSignal ScalarSignal::pulse(const PulseSpec& spec) {
    spec.validate();
    return ScalarSignal(std::make_shared<const Node>(Node{spec}));
}

ScalarSignal ScalarSignal::scaled_sum(double offset,
                                      std::vector<std::pair<double, ScalarSignal>> terms) {
    SumNode sum{offset, {}};
    sum.terms.reserve(terms.size());
    for (auto& [coeff, sig] : terms) sum.terms.push_back(SumTerm{coeff, sig.root_});
    return ScalarSignal(std::make_shared<const Node>(Node{std::move(sum)}));
}

double ScalarSignal::value(double t) const { return node_value(*root_, t); }

double ScalarSignal::derivative(double t) const { return node_derivative(*root_, t); }

std::vector<PulseSpec> ScalarSignal::pulses() const {
    std::vector<PulseSpec> out;
    collect_pulses(*root_, out);
    return out;
}

std::vector<RampWindow> ScalarSignal::ramp_windows() const {
    std::vector<RampWindow> out;
    for (const PulseSpec& p : pulses()) {
        const double half = 6.0 / p.epsilon;
        // well under the 0.3/epsilon safeguard: the interpolant derivative
        // needs the extra headroom to keep the Ermakov residual below 1e-8
        const double cap = 0.1 / p.epsilon;
        out.push_back(RampWindow{p.t_start - half, p.t_start + half, cap});
        out.push_back(RampWindow{p.t_end - half, p.t_end + half, cap});
    }
    return out;
}

nlohmann::json ScalarSignal::to_json() const {
    return std::visit(
        [](const auto& d) -> nlohmann::json {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, double>) {
                return {{"kind", "constant"}, {"value", d}};
            } else if constexpr (std::is_same_v<T, PulseSpec>) {
                return {{"kind", "pulse"},
                        {"t_start", d.t_start},
                        {"t_end", d.t_end},
                        {"epsilon", d.epsilon}};
            } else {
                nlohmann::json terms = nlohmann::json::array();
                for (const auto& term : d.terms)
                    terms.push_back({{"coeff", term.coeff},
                                     {"signal", ScalarSignal(term.node).to_json()}});
                return {{"kind", "sum"}, {"offset", d.offset}, {"terms", std::move(terms)}};
            }
        },
        root_->data);
}

ScalarSignal ScalarSignal::from_json(const nlohmann::json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "constant") return constant(j.at("value").get<double>());
    if (kind == "pulse") {
        PulseSpec spec{j.at("t_start").get<double>(), j.at("t_end").get<double>(),
                       j.at("epsilon").get<double>()};
        return pulse(spec);
    }
    if (kind == "sum") {
        std::vector<std::pair<double, ScalarSignal>> terms;
        for (const auto& term : j.at("terms"))
            terms.emplace_back(term.at("coeff").get<double>(),
                               from_json(term.at("signal")));
        return scaled_sum(j.at("offset").get<double>(), std::move(terms));
    }
    throw std::invalid_argument("unknown signal kind: " + kind);
}

} // namespace qho

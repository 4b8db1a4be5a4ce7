#ifndef MORSELAND_BUILTINS_HPP
#define MORSELAND_BUILTINS_HPP

#include "morseland/bifurcation.hpp"
#include "morseland/diffusion.hpp"
#include "morseland/hopfield.hpp"

#include <json.hpp>

#include <string>
#include <string_view>
#include <vector>

namespace morseland {

/// Default disc radius per form. The flip family needs room for the attractor
/// it sends separatrices to, so it gets 5.
inline double default_radius(PotentialForm form) { return form == PotentialForm::flip_family ? 5.0 : 3.0; }

namespace detail {

inline void expect_params(PotentialForm form, const std::vector<double>& params, std::size_t n) {
    if (params.size() != n)
        throw ConfigError(std::string(to_string(form)) + " takes " + std::to_string(n) + " params, got " +
                          std::to_string(params.size()));
}

}  // namespace detail

/// Landscape for a builtin form. radius <= 0 selects the default radius;
/// forms that carry their own domain (Hopfield cube, diffusion disc) ignore it.
inline Landscape make_builtin(PotentialForm form, const std::vector<double>& params = {}, int dimension = 2,
                              double radius = 0.0) {
    const double r = radius > 0.0 ? radius : default_radius(form);
    auto needs_plane = [&] {
        if (dimension < 2) throw ConfigError(std::string(to_string(form)) + " needs dimension >= 2");
    };
    switch (form) {
        case PotentialForm::dual_well:
            needs_plane();
            detail::expect_params(form, params, 0);
            return Landscape(builtin::dual_well(dimension), Metric{}, disc(dimension, r));
        case PotentialForm::dual_cusp:
            needs_plane();
            detail::expect_params(form, params, 0);
            return Landscape(builtin::dual_cusp(dimension), Metric{}, disc(dimension, r));
        case PotentialForm::saddle_node_family:
            needs_plane();
            detail::expect_params(form, params, 1);
            return Landscape(builtin::saddle_node_family(params[0], dimension), Metric{}, disc(dimension, r));
        case PotentialForm::flip_family:
            needs_plane();
            detail::expect_params(form, params, 1);
            return Landscape(builtin::flip_family(params[0], dimension), builtin::flip_metric(params[0]),
                             disc(dimension, r));
        case PotentialForm::hopfield_energy: return hopfield_landscape(hopfield_from_params(params));
        case PotentialForm::modern_hopfield_energy: {
            const ModernHopfield m = modern_hopfield_from_params(params);
            return radius > 0.0 ? modern_hopfield_landscape(m).with_radius(radius) : modern_hopfield_landscape(m);
        }
        case PotentialForm::gmm_diffusion: {
            const GmmSpec g = gmm_from_params(dimension, params);
            Landscape land = generation_landscape(g.data, g.schedule, g.t);
            return radius > 0.0 ? land.with_radius(radius) : land;
        }
        case PotentialForm::polynomial:
            return Landscape(make_polynomial_potential(dimension, polynomial_terms_from_params(dimension, params)),
                             Metric{}, disc(dimension, r));
    }
    throw ConfigError("unknown potential form");
}

inline Landscape make_builtin(std::string_view form, const std::vector<double>& params = {}, int dimension = 2,
                              double radius = 0.0) {
    return make_builtin(potential_form_from_string(form), params, dimension, radius);
}

// ---------------------------------------------------------------------------
// JSON landscape documents
// ---------------------------------------------------------------------------

/// {"form", "params", "dimension", "domain_radius", "metric": {"form", "params"}, "tilt"}.
/// Only "form" is required.
inline Landscape landscape_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ConfigError("landscape document must be a JSON object");
    try {
        if (!j.contains("form")) throw ConfigError("landscape document has no \"form\"");
        const std::string form = j.at("form").get<std::string>();
        const std::vector<double> params = j.value("params", std::vector<double>{});
        const int dim = j.value("dimension", 2);
        if (dim < 1 || dim > max_dimension) throw ConfigError("dimension out of range");
        const double radius = j.value("domain_radius", 0.0);
        if (radius < 0.0) throw ConfigError("domain_radius must be positive");
        Landscape land = make_builtin(form, params, dim, radius);
        if (j.contains("metric")) {
            const auto& m = j.at("metric");
            const MetricForm mf = metric_form_from_string(m.at("form").get<std::string>());
            Metric metric{mf, m.value("params", std::vector<double>{})};
            land = Landscape(land.potential(), metric, land.domain());
        }
        if (j.contains("tilt")) {
            const auto t = j.at("tilt").get<std::vector<double>>();
            land = land.tilted(Eigen::Map<const Vec>(t.data(), static_cast<Eigen::Index>(t.size())));
        }
        return land;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("malformed landscape document: ") + e.what());
    }
}

inline nlohmann::ordered_json landscape_to_json(const Landscape& land) {
    nlohmann::ordered_json j;
    j["form"] = std::string(to_string(land.potential().form));
    j["params"] = land.potential().params;
    j["dimension"] = land.dimension();
    j["domain_radius"] = land.domain().radius;
    j["metric"] = {{"form", std::string(to_string(land.metric().form))}, {"params", land.metric().params}};
    if (land.potential().tilt.size())
        j["tilt"] = std::vector<double>(land.potential().tilt.data(),
                                        land.potential().tilt.data() + land.potential().tilt.size());
    return j;
}

// ---------------------------------------------------------------------------
// Named families
// ---------------------------------------------------------------------------

inline ParameterFamily saddle_node_parameter_family(double lo = -1.0, double hi = 1.0) {
    return make_family([](double eta) { return make_builtin(PotentialForm::saddle_node_family, {eta}); }, lo, hi,
                       "saddle-node");
}

inline ParameterFamily flip_parameter_family(double lo = -1.0, double hi = 1.0) {
    return make_family([](double eta) { return make_builtin(PotentialForm::flip_family, {eta}); }, lo, hi, "flip");
}

/// Dual-cusp landscape with an added linear tilt (t1, t2).
inline ParameterFamily dual_cusp_tilt_family(Vec lo, Vec hi) {
    return make_family2(
        [](double a, double b) { return make_builtin(PotentialForm::dual_cusp).tilted(Vec(Eigen::Vector2d(a, b))); },
        std::move(lo), std::move(hi), "dual-cusp-tilt");
}

/// V = x^4/4 - eta2 x^2/2 - eta1 x on the interval [-3, 3].
inline ParameterFamily cusp_unfolding_family(Vec lo, Vec hi) {
    return make_family2(
        [](double e1, double e2) {
            return Landscape(make_polynomial_potential(1, {{{4}, 0.25}, {{2}, -0.5 * e2}, {{1}, -e1}}), Metric{},
                             disc(1, 3.0));
        },
        std::move(lo), std::move(hi), "cusp-unfolding");
}

}  // namespace morseland

#endif

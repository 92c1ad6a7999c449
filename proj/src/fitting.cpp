#include "uniflux/fitting.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include <fmt/format.h>
#include <gsl/gsl_errno.h>
#include <gsl/gsl_fit.h>
#include <gsl/gsl_multimin.h>

#include "uniflux/errors.hpp"
#include "uniflux/parallel.hpp"

namespace uniflux {

namespace {

constexpr double kPenalty = 1e300;
constexpr double kIdentifyStep = 0.1;  // fraction of the bound range
constexpr double kIdentifyTol = 1e-10;

struct Bounded {
    const std::function<double(const std::vector<double>&)>* f;
    std::vector<double> lo, hi;
    int evaluations = 0;
    int max_evaluations = 0;

    std::vector<double> to_x(const gsl_vector* z) const {
        std::vector<double> x(lo.size());
        for (std::size_t i = 0; i < x.size(); ++i)
            x[i] = lo[i] + (hi[i] - lo[i]) * 0.5 * (1.0 + std::sin(gsl_vector_get(z, i)));
        return x;
    }
};

double bounded_eval(const gsl_vector* z, void* ctx) {
    auto* b = static_cast<Bounded*>(ctx);
    ++b->evaluations;
    const double v = (*b->f)(b->to_x(z));
    return std::isfinite(v) ? v : kPenalty;
}

struct RunState {
    std::vector<double> x;
    double f = 0.0;
    int iterations = 0;
    bool converged = false;
};

RunState run_simplex(Bounded& b, const std::vector<double>& x0, const SimplexOptions& opt,
                     std::vector<std::vector<double>>& history) {
    const std::size_t n = x0.size();
    gsl_vector* z = gsl_vector_alloc(n);
    gsl_vector* step = gsl_vector_alloc(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = std::clamp(2.0 * (x0[i] - b.lo[i]) / (b.hi[i] - b.lo[i]) - 1.0, -1.0, 1.0);
        gsl_vector_set(z, i, std::asin(t));
        gsl_vector_set(step, i, opt.initial_step);
    }
    gsl_multimin_function fn{&bounded_eval, n, &b};
    gsl_multimin_fminimizer* s = gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, n);
    gsl_multimin_fminimizer_set(s, &fn, z, step);

    RunState st;
    const int window = static_cast<int>(2 * n + 2);
    std::vector<double> fhist;
    while (b.evaluations < b.max_evaluations) {
        if (gsl_multimin_fminimizer_iterate(s) != GSL_SUCCESS) break;
        ++st.iterations;
        const double f = s->fval;
        fhist.push_back(f);
        history.push_back(b.to_x(s->x));
        const double size = gsl_multimin_fminimizer_size(s);
        const bool flat = static_cast<int>(fhist.size()) > window &&
                          std::abs(fhist[fhist.size() - 1 - window] - f) <= opt.rel_tol * std::abs(f);
        if (f == 0.0 || size < opt.size_tol || (flat && size < 1e-4)) {
            st.converged = true;
            break;
        }
    }
    st.x = b.to_x(s->x);
    st.f = s->fval;
    gsl_multimin_fminimizer_free(s);
    gsl_vector_free(z);
    gsl_vector_free(step);
    return st;
}

void check_identifiable(const std::function<double(const std::vector<double>&)>& f, const std::vector<double>& x,
                        double fx, const std::vector<double>& lo, const std::vector<double>& hi,
                        const std::vector<std::string>& names) {
    for (std::size_t i = 0; i < x.size(); ++i) {
        bool moved = false;
        for (double sgn : {-1.0, 1.0}) {
            std::vector<double> p = x;
            p[i] += sgn * kIdentifyStep * (hi[i] - lo[i]);
            const double fp = f(p);
            if (std::abs(fp - fx) > kIdentifyTol * std::abs(fx)) moved = true;
        }
        if (!moved)
            fail(ErrorKind::UnidentifiableParameters,
                 fmt::format("objective does not respond to parameter '{}'", names[i]));
    }
}

std::vector<FitParam> make_bounds(const std::vector<std::string>& names, const std::vector<std::string>& units,
                                  const std::vector<double>& init, double fraction) {
    if (!(fraction > 0.0 && fraction < 1.0)) fail(ErrorKind::InvalidArgument, "bound fraction must be in (0, 1)");
    std::vector<FitParam> out;
    for (std::size_t i = 0; i < init.size(); ++i)
        out.push_back({names[i], units[i], init[i], init[i] * (1.0 - fraction), init[i] * (1.0 + fraction)});
    return out;
}

}  // namespace

SimplexResult minimize_bounded(const std::function<double(const std::vector<double>&)>& f,
                               const std::vector<double>& x0, const std::vector<double>& lower,
                               const std::vector<double>& upper, const SimplexOptions& options) {
    if (x0.empty() || lower.size() != x0.size() || upper.size() != x0.size())
        fail(ErrorKind::InvalidArgument, "simplex start and bounds must have equal nonzero size");
    for (std::size_t i = 0; i < x0.size(); ++i)
        if (!(lower[i] < upper[i]) || x0[i] < lower[i] || x0[i] > upper[i])
            fail(ErrorKind::InvalidArgument, "simplex start must lie within lower < upper");

    gsl_set_error_handler_off();
    Bounded b{&f, lower, upper, 0, options.max_evaluations};
    SimplexResult r;
    RunState st = run_simplex(b, x0, options, r.history);
    if (options.restart && b.evaluations < b.max_evaluations) {
        const RunState again = run_simplex(b, st.x, options, r.history);
        st.iterations += again.iterations;
        if (again.f <= st.f) {
            st.x = again.x;
            st.f = again.f;
        }
        st.converged = again.converged;
    }
    r.x = st.x;
    r.f = st.f;
    r.iterations = st.iterations;
    r.evaluations = b.evaluations;
    r.converged = st.converged;
    return r;
}

const char* to_string(Transition t) {
    switch (t) {
        case Transition::F01: return "f01";
        case Transition::F02Half: return "f02_half";
        case Transition::F12: return "f12";
    }
    return "unknown";
}

Transition parse_transition(const std::string& s) {
    if (s == "f01") return Transition::F01;
    if (s == "f02_half") return Transition::F02Half;
    if (s == "f12") return Transition::F12;
    fail(ErrorKind::InvalidArgument, fmt::format("unknown transition '{}'", s));
}

const char* to_string(FreeParam p) {
    switch (p) {
        case FreeParam::Ll: return "Ll";
        case FreeParam::Cl: return "Cl";
        case FreeParam::EJ: return "EJ";
    }
    return "unknown";
}

FreeParam parse_free_param(const std::string& s) {
    if (s == "Ll") return FreeParam::Ll;
    if (s == "Cl") return FreeParam::Cl;
    if (s == "EJ") return FreeParam::EJ;
    fail(ErrorKind::InvalidArgument, fmt::format("unknown free parameter '{}' (use Ll, Cl, EJ)", s));
}

double FitResult::value(const std::string& name) const {
    for (const auto& p : params_out)
        if (p.name == name) return p.value;
    fail(ErrorKind::InvalidArgument, fmt::format("fit has no parameter '{}'", name));
}

double model_transition(const QubitPoint& p, Transition t) {
    switch (t) {
        case Transition::F01: return p.spectrum.f01;
        case Transition::F02Half: return 0.5 * (p.spectrum.f01 + p.spectrum.f12);
        case Transition::F12: return p.spectrum.f12;
    }
    return 0.0;
}

namespace {

CircuitParams with_values(CircuitParams p, const std::vector<FreeParam>& free, const std::vector<double>& x) {
    for (std::size_t i = 0; i < free.size(); ++i) {
        switch (free[i]) {
            case FreeParam::Ll: p.ind_per_len_Ll = x[i]; break;
            case FreeParam::Cl: p.cap_per_len_Cl = x[i]; break;
            case FreeParam::EJ: p.josephson_energy_EJ = x[i]; break;
        }
    }
    return p;
}

}  // namespace

FitResult fit_spectrum_model1(const SpectroscopyDataset& data, const CircuitParams& init,
                              const std::vector<FreeParam>& free, const SpectrumFitOptions& options) {
    init.validate();
    if (data.size() < 5) fail(ErrorKind::InsufficientPoints, "spectrum fit needs at least 5 rows");
    if (free.empty()) fail(ErrorKind::InvalidArgument, "no free parameters");
    for (std::size_t i = 0; i < free.size(); ++i)
        for (std::size_t j = i + 1; j < free.size(); ++j)
            if (free[i] == free[j]) fail(ErrorKind::InvalidArgument, "free parameters must be distinct");

    std::vector<double> biases;
    for (const auto& r : data) {
        if (!(r.frequency > 0.0)) fail(ErrorKind::InvalidArgument, "measured frequencies must be > 0");
        if (r.sigma < 0.0) fail(ErrorKind::InvalidArgument, "sigma must be >= 0");
        biases.push_back(r.flux_bias);
    }
    std::sort(biases.begin(), biases.end());
    biases.erase(std::unique(biases.begin(), biases.end()), biases.end());
    if (biases.size() < 2) fail(ErrorKind::InsufficientPoints, "spectrum fit needs at least 2 distinct biases");
    std::map<double, std::size_t> slot;
    for (std::size_t i = 0; i < biases.size(); ++i) slot[biases[i]] = i;

    PointOptions popt = options.point;
    popt.n_states = std::max(popt.n_states, 3);
    popt.diag.compute_elements = false;

    auto model_freqs = [&](const std::vector<double>& x) {
        const CircuitParams p = with_values(init, free, x);
        std::vector<QubitPoint> pts(biases.size());
        parallel_for(biases.size(), options.threads,
                     [&](std::size_t i) { pts[i] = solve_qubit_point(p, {biases[i]}, popt); });
        std::vector<double> f(data.size());
        for (std::size_t i = 0; i < data.size(); ++i)
            f[i] = model_transition(pts[slot.at(data[i].flux_bias)], data[i].transition);
        return f;
    };
    const std::function<double(const std::vector<double>&)> objective = [&](const std::vector<double>& x) {
        try {
            const std::vector<double> f = model_freqs(x);
            double s = 0.0;
            for (std::size_t i = 0; i < data.size(); ++i) {
                const double sig = data[i].sigma > 0.0 ? data[i].sigma : kDefaultSigma;
                const double r = (f[i] - data[i].frequency) / sig;
                s += r * r;
            }
            return s;
        } catch (const Error&) {
            return kPenalty;
        }
    };

    std::vector<std::string> names, units;
    std::vector<double> x0;
    for (FreeParam fp : free) {
        names.push_back(to_string(fp));
        switch (fp) {
            case FreeParam::Ll: units.push_back("H/m"); x0.push_back(init.ind_per_len_Ll); break;
            case FreeParam::Cl: units.push_back("F/m"); x0.push_back(init.cap_per_len_Cl); break;
            case FreeParam::EJ: units.push_back("J"); x0.push_back(init.josephson_energy_EJ); break;
        }
    }
    FitResult out;
    out.params_out = make_bounds(names, units, x0, options.bound_fraction);
    std::vector<double> lo, hi;
    for (const auto& p : out.params_out) {
        lo.push_back(p.lower);
        hi.push_back(p.upper);
    }
    const SimplexResult s = minimize_bounded(objective, x0, lo, hi, options.simplex);
    if (!(s.f < kPenalty)) fail(ErrorKind::NonConvergence, "spectrum fit never reached a valid parameter set");
    check_identifiable(objective, s.x, s.f, lo, hi, names);

    for (std::size_t i = 0; i < s.x.size(); ++i) out.params_out[i].value = s.x[i];
    out.objective = s.f;
    out.n_iterations = s.iterations;
    out.n_evaluations = s.evaluations;
    out.converged = s.converged;
    out.history = s.history;
    const std::vector<double> f = model_freqs(s.x);
    double ss = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) ss += (f[i] - data[i].frequency) * (f[i] - data[i].frequency);
    out.residual_rms = std::sqrt(ss / static_cast<double>(data.size()));
    return out;
}

CircuitParams apply_fit(const CircuitParams& base, const FitResult& fit) {
    CircuitParams p = base;
    for (const auto& fp : fit.params_out) {
        const FreeParam which = parse_free_param(fp.name);
        p = with_values(p, {which}, {fp.value});
    }
    return p;
}

FitResult fit_coupling_from_crossing(const std::vector<CrossingPoint>& data, double init_Cg,
                                     const CircuitParams& params, const ReadoutParams& readout,
                                     const CrossingFitOptions& options) {
    if (data.size() < 3) fail(ErrorKind::InsufficientPoints, "crossing fit needs at least 3 points");
    if (!(init_Cg > 0.0)) fail(ErrorKind::InvalidArgument, "initial coupling capacitance must be > 0");
    ReadoutParams ro = readout;
    ro.coupling_cap_Cg = init_Cg;
    ro.validate(params);

    // The bare qubit does not depend on Cg, so each bias is solved once.
    PointOptions popt = options.crossing.point;
    popt.n_states = std::max(popt.n_states, options.crossing.n_qubit_levels);
    popt.diag.compute_elements = true;
    std::vector<QubitPoint> pts(data.size());
    parallel_for(data.size(), options.threads,
                 [&](std::size_t i) { pts[i] = solve_qubit_point(params, {data[i].flux_bias}, popt); });

    auto branch_residuals = [&](double cg) {
        ReadoutParams r = readout;
        r.coupling_cap_Cg = cg;
        // The approximate coupling only needs Z_tr; a fixed lumped Cr, Lr would conflict with a moving Cg.
        r.resonator_cap_Cr = r.resonator_ind_Lr = 0.0;
        std::vector<double> res(data.size());
        for (std::size_t i = 0; i < data.size(); ++i) {
            const CouplingTable c = coupling_strengths(pts[i].spectrum, pts[i].mode(), r, params);
            const CrossingRow row = dressed_pair(pts[i].spectrum, c, r.omega_r(),
                                                 options.crossing.n_qubit_levels, options.crossing.n_photons);
            const double a = row.lower - data[i].frequency, b = row.upper - data[i].frequency;
            res[i] = std::abs(a) < std::abs(b) ? a : b;
        }
        return res;
    };
    const std::function<double(const std::vector<double>&)> objective = [&](const std::vector<double>& x) {
        try {
            double s = 0.0;
            for (double r : branch_residuals(x[0])) s += (r / kDefaultSigma) * (r / kDefaultSigma);
            return s;
        } catch (const Error&) {
            return kPenalty;
        }
    };

    FitResult out;
    out.params_out = make_bounds({"Cg"}, {"F"}, {init_Cg}, options.bound_fraction);
    const std::vector<double> lo{out.params_out[0].lower}, hi{out.params_out[0].upper};
    const SimplexResult s = minimize_bounded(objective, {init_Cg}, lo, hi, options.simplex);
    if (!(s.f < kPenalty)) fail(ErrorKind::NonConvergence, "crossing fit never reached a valid coupling");
    check_identifiable(objective, s.x, s.f, lo, hi, {"Cg"});

    out.params_out[0].value = s.x[0];
    out.objective = s.f;
    out.n_iterations = s.iterations;
    out.n_evaluations = s.evaluations;
    out.converged = s.converged;
    out.history = s.history;
    double ss = 0.0;
    for (double r : branch_residuals(s.x[0])) ss += r * r;
    out.residual_rms = std::sqrt(ss / static_cast<double>(data.size()));
    return out;
}

FluxNoiseFit fit_flux_noise_density(const std::vector<std::pair<double, double>>& pairs) {
    if (pairs.size() < 3) fail(ErrorKind::InsufficientPoints, "flux-noise fit needs at least 3 pairs");
    const double k = std::sqrt(std::log(2.0));
    std::vector<double> x, y;
    for (const auto& [s, g] : pairs) {
        if (!std::isfinite(s) || !std::isfinite(g)) fail(ErrorKind::InvalidArgument, "non-finite flux-noise data");
        x.push_back(k * std::abs(s));
        y.push_back(g);
    }
    if (std::all_of(x.begin(), x.end(), [&](double v) { return v == x.front(); }))
        fail(ErrorKind::DegenerateDesign, "all slopes are equal");

    gsl_set_error_handler_off();
    double c0 = 0.0, c1 = 0.0, cov00 = 0.0, cov01 = 0.0, cov11 = 0.0, sumsq = 0.0;
    gsl_fit_linear(x.data(), 1, y.data(), 1, x.size(), &c0, &c1, &cov00, &cov01, &cov11, &sumsq);
    FluxNoiseFit f;
    const double n = static_cast<double>(x.size());
    if (c1 < 0.0) {
        f.clamped = true;
        c1 = 0.0;
        c0 = 0.0;
        for (double v : y) c0 += v / n;
        sumsq = 0.0;
        for (double v : y) sumsq += (v - c0) * (v - c0);
        cov11 = 0.0;
        cov00 = sumsq / (n - 1.0) / n;
    }
    f.APhi = c1;
    f.gamma_x = c0;
    f.sigma_APhi = std::sqrt(cov11);
    f.sigma_gamma_x = std::sqrt(cov00);
    f.residual_rms = std::sqrt(sumsq / n);
    return f;
}

}  // namespace uniflux

// cqedwb: batch front end for the circuit-QED workbench.
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <random>

#include <CLI11.hpp>

#include <cqedwb/cqedwb.hpp>

#include "cli_driver.hpp"

using namespace cqedwb;
using namespace cqedwb::cli;

namespace {

std::vector<double> linspace(double a, double b, int n) {
    std::vector<double> v;
    for (int k = 0; k < n; ++k) v.push_back(n == 1 ? a : a + (b - a) * k / (n - 1));
    if (n > 1) v.back() = b;
    return v;
}

// Weight, then support (first qubit most significant), then letters with the first qubit fastest.
std::vector<std::size_t> thesis_order(const std::vector<std::string>& labels) {
    auto key = [](const std::string& l) {
        int weight = 0;
        std::size_t mask = 0, letters = 0, scale = 1;
        for (std::size_t q = 0; q < l.size(); ++q) {
            const bool on = l[q] != 'I';
            weight += on;
            mask = (mask << 1) | (on ? 1u : 0u);
            letters += scale * static_cast<std::size_t>(std::string_view("IXYZ").find(l[q]));
            scale *= 4;
        }
        return std::tuple(weight, mask, letters);
    };
    std::vector<std::size_t> idx(labels.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return key(labels[a]) < key(labels[b]); });
    return idx;
}

std::vector<std::size_t> label_order(const std::vector<std::string>& labels, const std::string& order) {
    if (order == "thesis") return thesis_order(labels);
    std::vector<std::size_t> idx(labels.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    return idx;
}

StateVector named_state(const std::string& name, int n, std::mt19937_64& rng) {
    const Eigen::Index d = Eigen::Index{1} << n;
    StateVector psi = StateVector::Zero(d);
    if (name == "ground") {
        psi(0) = 1;
    } else if (name == "ghz") {
        psi(0) = psi(d - 1) = 1 / std::sqrt(2.0);
    } else if (name == "w") {
        for (int q = 0; q < n; ++q) psi(Eigen::Index{1} << q) = 1 / std::sqrt(static_cast<double>(n));
    } else if (name == "plus") {
        psi.setConstant(1 / std::sqrt(static_cast<double>(d)));
    } else if (name == "bell23") {
        if (n < 2) fail(ErrorKind::InvalidInput, "bell23 needs at least two qubits");
        psi(0) = psi(3) = 1 / std::sqrt(2.0);
    } else {
        std::normal_distribution<double> g;
        for (Eigen::Index k = 0; k < d; ++k) psi(k) = cplx(g(rng), g(rng));
        psi.normalize();
    }
    return psi;
}

TransmonParams transmon_from(const Point& p) {
    const double ej = p.r("ej"), a = p.r("asym");
    TransmonParams t;
    t.ej1_ghz = ej * (1 + a) / 2;
    t.ej2_ghz = ej * (1 - a) / 2;
    t.ec_ghz = p.r("ec");
    t.ng = p.r("ng");
    t.flux_phi0 = p.r("flux");
    t.charge_cutoff = p.n("cutoff");
    return t;
}

std::vector<ParamSpec> transmon_params(std::string flux_default) {
    return {real("ej", "30", "GHz", "total Josephson energy of both junctions"),
            real("ec", "0.35", "GHz", "charging energy"),
            real("asym", "0", "", "junction asymmetry (EJ1-EJ2)/(EJ1+EJ2)"),
            real("ng", "0", "", "offset charge"),
            real("flux", std::move(flux_default), "Phi0", "loop flux"),
            integer("cutoff", 15, 10, 200, "initial charge-basis cutoff")};
}

std::vector<Command> commands() {
    std::vector<Command> cmds;

    {
        auto ps = transmon_params("0");
        ps.push_back(integer("levels", 4, 3, 50, "number of levels"));
        cmds.push_back({"transmon-spectrum", "transmon levels from the charge basis", ps,
                        [](const Point& p) {
                            std::vector<std::string> c;
                            for (int k = 1; k < p.n("levels"); ++k) c.push_back(fmt::format("e{}_ghz", k));
                            for (const char* x : {"f01_ghz", "alpha_ghz", "cutoff_used"}) c.push_back(x);
                            return c;
                        },
                        [](const Point& p) {
                            auto lv = transmon_levels(transmon_from(p), p.n("levels"));
                            PointResult r;
                            Row row;
                            for (std::size_t k = 1; k < lv.levels.size(); ++k) row.emplace_back(lv.levels[k] - lv.levels[0]);
                            const double f01 = lv.levels[1] - lv.levels[0];
                            const double alpha = lv.levels[2] - 2 * lv.levels[1] + lv.levels[0];
                            row.emplace_back(f01);
                            row.emplace_back(alpha);
                            row.emplace_back(static_cast<long long>(lv.cutoff_used));
                            r.rows.push_back(std::move(row));
                            r.scalars = {{"f01_ghz", f01}, {"alpha_ghz", alpha}};
                            return r;
                        }});
    }

    cmds.push_back({"flux-tune", "qubit frequency against loop flux", transmon_params("0:0.5:51"),
                    [](const Point&) {
                        return std::vector<std::string>{"ej_eff_ghz", "f01_formula_ghz", "f01_exact_ghz", "out_of_regime"};
                    },
                    [](const Point& p) {
                        auto fp = f01_vs_flux(transmon_from(p), {p.r("flux")}).front();
                        PointResult r;
                        r.rows.push_back({fp.ej_eff_ghz, fp.f01_formula_ghz, fp.f01_exact_ghz, fp.out_of_regime});
                        r.scalars = {{"f01_exact_ghz", fp.f01_exact_ghz}};
                        if (fp.out_of_regime) r.warnings.push_back("asymptotic formula out of regime at some flux points");
                        return r;
                    }});

    {
        auto ps = transmon_params("0.25");
        ps.push_back(real("a-flux", "1e-5", "Phi0", "flux noise amplitude"));
        cmds.push_back({"tphi", "pure dephasing time from flux noise", ps,
                        [](const Point&) { return std::vector<std::string>{"tphi_s"}; },
                        [](const Point& p) {
                            const double t = tphi_flux_noise(transmon_from(p), {p.r("a-flux")}, p.r("flux"));
                            PointResult r;
                            r.rows.push_back({t});
                            r.scalars = {{"tphi_s", t}};
                            return r;
                        }});
    }

    cmds.push_back({"jc-spectrum", "dressed spectrum of one qubit and a cavity",
                    {real("f01", "6", "GHz", "qubit frequency"), real("alpha", "-0.3", "GHz", "anharmonicity"),
                     integer("qubit-levels", 3, 2, 10, "qubit levels"), real("g", "0.1", "GHz", "coupling"),
                     real("omega-r", "7", "GHz", "cavity frequency"),
                     integer("cavity-levels", 5, 2, 200, "cavity Fock states"),
                     flag("no-rwa", "keep counter-rotating terms"), integer("eigs", 6, 1, 10000, "eigenvalues to list")},
                    [](const Point&) { return std::vector<std::string>{"index", "energy_ghz"}; },
                    [](const Point& p) {
                        SystemSpec s{{anharmonic_qubit(p.r("f01"), p.r("alpha"), p.n("qubit-levels"), p.r("g"))},
                                     {p.r("omega-r"), p.n("cavity-levels")}};
                        const auto ev = eig_hermitian(build_jc_hamiltonian(s, !p.b("no-rwa"))).values;
                        if (p.i("eigs") > ev.size()) fail(ErrorKind::InvalidInput, "more eigenvalues requested than the dimension");
                        PointResult r;
                        for (long long k = 0; k < p.i("eigs"); ++k) r.rows.push_back({k, ev(k)});
                        r.scalars = {{"dim", static_cast<double>(ev.size())}, {"e0_ghz", ev(0)}};
                        if (ev.size() > 1) r.scalars.emplace_back("gap01_ghz", ev(1) - ev(0));
                        return r;
                    }});

    cmds.push_back({"chi", "dispersive shift, perturbative and from the dressed spectrum",
                    {real("f01", "6", "GHz", "qubit frequency"), real("alpha", "-0.3", "GHz", "anharmonicity"),
                     real("g", "0.05", "GHz", "coupling"), real("omega-r", "7", "GHz", "cavity frequency"),
                     integer("qubit-levels", 5, 2, 10, "qubit levels"), integer("cavity-levels", 6, 2, 200, "cavity Fock states")},
                    [](const Point&) { return std::vector<std::string>{"chi_dispersive_ghz", "chi_exact_ghz", "rel_diff"}; },
                    [](const Point& p) {
                        const double f01 = p.r("f01"), alpha = p.r("alpha"), g = p.r("g"), wr = p.r("omega-r");
                        const double cd = chi_dispersive(g, f01 - wr, -alpha);
                        SystemSpec s{{anharmonic_qubit(f01, alpha, p.n("qubit-levels"), g)}, {wr, p.n("cavity-levels")}};
                        const double ce = chi_exact(s);
                        const double rel = std::abs(cd - ce) / std::abs(ce);
                        PointResult r;
                        r.rows.push_back({cd, ce, rel});
                        r.scalars = {{"chi_dispersive_ghz", cd}, {"chi_exact_ghz", ce}, {"rel_diff", rel}};
                        return r;
                    }});

    cmds.push_back({"zz", "static ZZ coupling of two qubits sharing a cavity",
                    {real("f1", "6", "GHz", "qubit 1 frequency"), real("f2", "5.9", "GHz", "qubit 2 frequency"),
                     real("alpha", "-0.3", "GHz", "anharmonicity of both qubits"), real("g", "0.1", "GHz", "coupling of both qubits"),
                     real("omega-r", "9", "GHz", "cavity frequency"), integer("qubit-levels", 3, 2, 6, "levels per qubit"),
                     integer("cavity-levels", 4, 2, 40, "cavity Fock states")},
                    [](const Point&) { return std::vector<std::string>{"xi_ghz", "zeta_pert_ghz", "zeta_exact_ghz"}; },
                    [](const Point& p) {
                        const double f1 = p.r("f1"), f2 = p.r("f2"), a = p.r("alpha"), g = p.r("g"), wr = p.r("omega-r");
                        const double xi = zz_xi(g, g, f1 - wr, f2 - wr, f2 - (f1 + a), f1 - (f2 + a));
                        const int nq = p.n("qubit-levels");
                        SystemSpec s{{anharmonic_qubit(f1, a, nq, g), anharmonic_qubit(f2, a, nq, g)}, {wr, p.n("cavity-levels")}};
                        const double ze = zeta_exact(s);
                        PointResult r;
                        r.rows.push_back({xi, zeta_from_xi(xi), ze});
                        r.scalars = {{"xi_ghz", xi}, {"zeta_pert_ghz", zeta_from_xi(xi)}, {"zeta_exact_ghz", ze}};
                        return r;
                    }});

    cmds.push_back({"crossing", "conditional phase from a brief excursion through an avoided crossing",
                    {real("g", "0.05", "GHz", "coupling at the crossing"), real("delta", "0", "GHz", "detuning from the crossing")},
                    [](const Point&) {
                        return std::vector<std::string>{"rephasing_time_ns", "return_probability", "phase_rad", "phase_simulated_rad"};
                    },
                    [](const Point& p) {
                        CrossingModel m{p.r("g"), p.r("delta")};
                        const double t = crossing_rephasing_time(m);
                        const double pr = crossing_return_probability(m, t);
                        const double ph = crossing_conditional_phase(m), sim = crossing_conditional_phase_simulated(m);
                        PointResult r;
                        r.rows.push_back({t, pr, ph, sim});
                        r.scalars = {{"rephasing_time_ns", t}, {"phase_rad", ph}, {"phase_simulated_rad", sim}};
                        return r;
                    }});

    cmds.push_back({"flux-coupling", "flux threaded by a bias-line segment into a rectangular loop",
                    {real("seg-len", "500um", "m", "segment length"), real("dist", "400um", "m", "segment to loop distance"),
                     real("width", "100um", "m", "loop width along the segment"), real("height", "100um", "m", "loop height"),
                     real("altitude", "0", "m", "vertical offset of the loop plane"), real("offset", "0", "m", "lateral loop offset"),
                     real("current", "1mA", "A", "line current"), real("gap", "1mm", "m", "ground-plate gap for screening"),
                     real("target", "1", "Phi0", "flux for the required-current column")},
                    [](const Point&) {
                        return std::vector<std::string>{"flux_phi0", "screening_g", "screened_flux_phi0", "required_current_a"};
                    },
                    [](const Point& p) {
                        FblGeometry g{p.r("seg-len"), p.r("dist"), p.r("width"), p.r("height"),
                                      p.r("altitude"), p.r("offset"), p.r("current"), p.r("gap")};
                        if (g.altitude_A_m != 0 && g.offset_O_m != 0)
                            fail(ErrorKind::Unsupported, "altitude and offset cannot both be nonzero");
                        double phi = g.altitude_A_m != 0 ? flux_g_altitude(g) : g.offset_O_m != 0 ? flux_h_offset(g) : flux_f(g);
                        phi /= constants::phi0;
                        const double G = screening_G(g.dist_D_m + g.height_H_m / 2, g.plate_gap_w_m);
                        const double need = p.r("target") * g.current_I_A / (phi * G);
                        PointResult r;
                        r.rows.push_back({phi, G, phi * G, need});
                        r.scalars = {{"flux_phi0", phi}, {"screening_g", G}, {"screened_flux_phi0", phi * G}, {"required_current_a", need}};
                        return r;
                    }});

    cmds.push_back({"screening", "image-sum screening factor against the cosh fit",
                    {real("ratio", "0.1:10:41:log", "", "distance over plate gap d/w")},
                    [](const Point&) { return std::vector<std::string>{"g_sum", "g_fit", "fit_over_sum", "terms"}; },
                    [](const Point& p) {
                        const double d = p.r("ratio");
                        const auto s = screening_sum(d, 1.0);
                        const double fit = screening_G(d, 1.0, ScreeningMethod::fit);
                        PointResult r;
                        r.rows.push_back({s.value, fit, fit / s.value, static_cast<long long>(s.terms)});
                        r.scalars = {{"g_sum", s.value}, {"g_fit", fit}, {"fit_over_sum", fit / s.value}};
                        return r;
                    }});

    cmds.push_back({"fbl-t1", "qubit lifetime limited by the flux bias line",
                    {real("cc", "0.25fF", "F", "line to island coupling"), real("csigma", "40fF", "F", "qubit capacitance"),
                     real("ls", "0.5nH", "H", "line return inductance"), real("cg", "0", "F", "filter shunt capacitance"),
                     real("cs", "0", "F", "filter cross capacitance"), real("lf", "0", "H", "filter series inductance"),
                     real("z0", "50", "ohm", "line impedance"), real("freq", "9", "GHz", "qubit frequency"),
                     flag("filtered", "include the on-chip filter")},
                    [](const Point&) {
                        return std::vector<std::string>{"rey_common_s", "rey_diff_s", "t1_common_s", "t1_diff_s"};
                    },
                    [](const Point& p) {
                        FblCircuit c{p.r("cc"), p.r("csigma"), p.r("ls"), p.r("cg"), p.r("cs"), p.r("lf"), p.r("z0")};
                        const double w = constants::two_pi * p.r("freq") * 1e9;
                        const auto y = p.b("filtered") ? fbl_filtered_Y(c, w) : fbl_unfiltered_Y(c, w);
                        const auto tc = t1_from_admittance(c.csigma_F, y.reY_common);
                        const auto td = t1_from_admittance(c.csigma_F, y.reY_diff);
                        PointResult r;
                        r.rows.push_back({y.reY_common, y.reY_diff, tc.t1_s, td.t1_s});
                        r.scalars = {{"t1_common_s", tc.t1_s}, {"t1_diff_s", td.t1_s}};
                        if (tc.infinite || td.infinite) r.warnings.push_back("InfiniteLifetime: a mode sees no dissipation");
                        return r;
                    }});

    cmds.push_back({"allxy", "AllXY sequence outcomes under pulse errors",
                    {real("power-db", "0", "dB", "pulse power error"), real("detuning", "0", "", "detuning error epsilon"),
                     real("skew", "0", "rad", "quadrature skew"), real("imbalance", "0", "", "quadrature amplitude imbalance")},
                    [](const Point&) { return std::vector<std::string>{"index", "sequence", "ideal", "z", "deviation"}; },
                    [](const Point& p) {
                        const auto res = allxy_simulate({p.r("power-db"), p.r("detuning"), p.r("skew"), p.r("imbalance")});
                        const auto fit = allxy_syndrome_fit(res);
                        PointResult r;
                        double worst = 0;
                        for (std::size_t k = 0; k < res.z.size(); ++k) {
                            const double dev = res.z[k] - res.ideal[k];
                            worst = std::max(worst, std::abs(dev));
                            r.rows.push_back({static_cast<long long>(k + 1), res.labels[k], res.ideal[k], res.z[k], dev});
                        }
                        r.scalars = {{"power_fit", fit.power}, {"detuning_fit", fit.detuning},
                                     {"fit_residual", fit.residual}, {"max_abs_deviation", worst}};
                        return r;
                    }});

    cmds.push_back({"tomo-reconstruct", "joint-readout state tomography",
                    {integer("qubits", 3, 1, 3, "number of qubits"),
                     text("input", "label,voltage CSV; simulated from --state when absent"),
                     choice("state", {"ghz", "ground", "w", "plus", "bell23", "random"}, "state to simulate"),
                     text("beta", "comma-separated readout coefficients, default uniform"),
                     fixed(real("noise", "0", "", "Gaussian voltage noise")), integer("seed", 1, 0, 1LL << 62, "noise and random-state seed"),
                     real("offset", "0", "", "voltage offset to subtract"), flag("fit-offset", "fit the offset instead"),
                     flag("physical", "add the nearest physical state"), choice("order", {"lex", "thesis"}, "Pauli row order")},
                    [](const Point& p) {
                        std::vector<std::string> c{"index", "pauli", "value"};
                        if (p.b("physical")) c.push_back("physical");
                        return c;
                    },
                    [](const Point& p) {
                        const int n = p.n("qubits");
                        const std::size_t nb = std::size_t{1} << n;
                        MeasurementModel m{n, std::vector<double>(nb, 1.0 / static_cast<double>(nb))};
                        if (!p.s("beta").empty()) {
                            m.beta.clear();
                            for (const auto& part : split(p.s("beta"), ',')) m.beta.push_back(parse_quantity(real("beta", "", "", ""), part));
                        }
                        std::mt19937_64 rng(static_cast<std::uint64_t>(p.i("seed")));
                        std::vector<double> v;
                        std::optional<StateVector> truth;
                        if (!p.s("input").empty()) {
                            std::ifstream in(p.s("input"));
                            if (!in) throw UsageError(fmt::format("--input: cannot open '{}'", p.s("input")));
                            v = read_tomo_csv(in, n);
                        } else {
                            truth = named_state(p.s("state"), n, rng);
                            v = simulate_tomo_voltages(projector(*truth), m);
                        }
                        if (p.r("noise") > 0) {
                            std::normal_distribution<double> g(0.0, p.r("noise"));
                            for (auto& x : v) x += g(rng);
                        }
                        const double off = p.b("fit-offset") ? fit_voltage_offset(v, m) : p.r("offset");
                        const auto res = reconstruct_state(v, m, off);
                        const auto labels = pauli_labels(n);
                        PointResult r;
                        std::vector<double> phys;
                        if (p.b("physical")) phys = pauli_expectations(physicality_project(res.rho), n).values;
                        for (auto k : label_order(labels, p.s("order"))) {
                            Row row{static_cast<long long>(k), labels[k], res.paulis.values[k]};
                            if (p.b("physical")) row.emplace_back(phys[k]);
                            r.rows.push_back(std::move(row));
                        }
                        r.scalars = {{"offset", off}, {"condition", res.condition}, {"min_eigenvalue", res.min_eigenvalue},
                                     {"purity", purity_entropy(res.rho).purity}};
                        if (truth) {
                            r.scalars.emplace_back("fidelity", truth->dot(res.rho * *truth).real());
                            const auto ref = pauli_expectations(projector(*truth), n).values;
                            double dev = 0;
                            for (std::size_t k = 0; k < ref.size(); ++k) dev = std::max(dev, std::abs(ref[k] - res.paulis.values[k]));
                            r.scalars.emplace_back("max_pauli_error", dev);
                        }
                        if (res.min_eigenvalue < -1e-9) r.warnings.push_back("reconstructed state has a negative eigenvalue");
                        return r;
                    }});

    cmds.push_back({"process-tomo", "chi matrix of a gate followed by single-qubit noise",
                    {choice("gate", {"identity", "x", "h", "cnot", "cz", "ccphase", "toffoli"}, "ideal gate"),
                     choice("channel", {"none", "dephasing", "amplitude_damping", "depolarizing"}, "noise after the gate"),
                     real("p", "0", "", "noise strength per qubit"), choice("order", {"lex", "thesis"}, "Pauli order")},
                    [](const Point&) { return std::vector<std::string>{"m", "n", "re", "im"}; },
                    [](const Point& p) {
                        ComplexMatrix u;
                        const auto& gate = p.s("gate");
                        if (gate == "identity") u = pauli('I');
                        else if (gate == "x") u = pauli('X');
                        else if (gate == "h") u = (pauli('X') + pauli('Z')) / std::sqrt(2.0);
                        else if (gate == "cnot") u = cnot_matrix();
                        else if (gate == "cz") u = build_phase_gate(phase_on_state("11"));
                        else if (gate == "ccphase") u = build_phase_gate(phase_on_state("111"));
                        else u = toffoli_matrix();
                        const int n = qubit_count(u.rows());
                        std::vector<KrausChannel> noise;
                        if (p.s("channel") != "none")
                            for (int q = 0; q < n; ++q) noise.push_back(embed(make_channel(parse_channel_kind(p.s("channel")), p.r("p")), q, n));
                        const auto chi = chi_of_channel(
                            [&](const DensityMatrix& rho) {
                                DensityMatrix out = u * rho * u.adjoint();
                                for (const auto& ch : noise) out = ch.apply(out);
                                return out;
                            },
                            n);
                        const auto labels = pauli_labels(n, true);
                        const auto order = label_order(labels, p.s("order"));
                        PointResult r;
                        for (auto a : order)
                            for (auto b : order) {
                                const cplx c = chi(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
                                r.rows.push_back({labels[a], labels[b], c.real(), c.imag()});
                            }
                        r.scalars = {{"process_fidelity", process_fidelity(chi, unitary_chi(u))}, {"chi_trace", chi.trace().real()}};
                        return r;
                    }});

    cmds.push_back({"qec-sweep", "logical fidelity of the three-qubit repetition code",
                    {choice("kind", {"bit", "phase"}, "code"), choice("model", {"coherent", "incoherent"}, "error model"),
                     fixed(real("pmax", "1", "", "largest flip probability")), integer("points", 41, 4, 100000, "grid points")},
                    [](const Point&) { return std::vector<std::string>{"p", "fidelity", "cubic_fit"}; },
                    [](const Point& p) {
                        const double pmax = p.r("pmax");
                        if (pmax < 0 || pmax > 1) fail(ErrorKind::InvalidProbability, "pmax must lie in [0, 1]");
                        const auto kind = parse_code_kind(p.s("kind"));
                        const auto model = p.s("model") == "coherent" ? ErrorModel::coherent : ErrorModel::incoherent;
                        const auto grid = linspace(0, pmax, p.n("points"));
                        std::vector<double> fid(grid.size());
                        parallel_for(grid.size(), p.jobs(), [&](std::size_t k) {
                            fid[k] = logical_process_fidelity(repetition_code_circuit(kind, error_slot(kind, grid[k], model)));
                        });
                        const auto c = cubic_fit(grid, fid);
                        PointResult r;
                        double worst = 0;
                        for (std::size_t k = 0; k < grid.size(); ++k) {
                            const double x = grid[k], fit = c[0] + x * (c[1] + x * (c[2] + x * c[3]));
                            worst = std::max(worst, std::abs(fit - fid[k]));
                            r.rows.push_back({x, fid[k], fit});
                        }
                        r.scalars = {{"c0", c[0]}, {"c1", c[1]}, {"c2", c[2]}, {"c3", c[3]}, {"max_fit_residual", worst}};
                        return r;
                    }});

    cmds.push_back({"witnesses", "Mermin and CHSH witnesses of three-qubit states",
                    {choice("state", {"ghz-phi", "ghz", "w", "ground", "plus"}, "state"),
                     real("phi", "0", "rad", "phase of the ghz-phi family"),
                     real("p", "0", "", "depolarizing strength on every qubit")},
                    [](const Point&) {
                        return std::vector<std::string>{"m_s1", "m_s2", "m_p1", "m_p2", "chsh", "ghz_fidelity", "ghz_phi_rad", "violation"};
                    },
                    [](const Point& p) {
                        std::mt19937_64 rng(0);
                        const auto& st = p.s("state");
                        const StateVector psi = st == "ghz-phi" ? ghz_phi_state(p.r("phi")) : named_state(st, 3, rng);
                        DensityMatrix rho = projector(psi);
                        if (p.r("p") > 0)
                            for (int q = 0; q < 3; ++q) rho = embed(make_channel(ChannelKind::depolarizing, p.r("p")), q, 3).apply(rho);
                        const auto w = witnesses(rho);
                        const bool viol = std::max(std::abs(w.m_s1), std::abs(w.m_s2)) > 2;
                        PointResult r;
                        r.rows.push_back({w.m_s1, w.m_s2, w.m_p1, w.m_p2, w.chsh, w.ghz_fidelity, w.ghz_phi, viol});
                        r.scalars = {{"m_s1", w.m_s1}, {"m_s2", w.m_s2}, {"m_p1", w.m_p1}, {"m_p2", w.m_p2},
                                     {"chsh", w.chsh}, {"ghz_fidelity", w.ghz_fidelity}};
                        return r;
                    }});

    cmds.push_back({"kerr-q", "Husimi Q function of a Kerr-evolved coherent state",
                    {real("beta", "1.5", "", "coherent amplitude (real)"), real("kerr", "1MHz", "GHz", "Kerr constant"),
                     real("time", "0", "ns", "evolution time"), integer("truncation", 40, 4, 400, "Fock states"),
                     integer("grid", 121, 2, 1001, "grid points per axis"), fixed(real("alpha-max", "6", "", "grid half width")),
                     choice("frame", {"number-squared", "normal-ordered"}, "Kerr Hamiltonian form"),
                     integer("cat", 0, 0, 64, "if nonzero, use the q-component cat instead of Kerr evolution")},
                    [](const Point&) { return std::vector<std::string>{"re_alpha", "im_alpha", "q"}; },
                    [](const Point& p) {
                        const int n = p.n("truncation");
                        const double beta = p.r("beta"), k = p.r("kerr");
                        PointResult r;
                        if (!truncation_ok(beta, n)) r.warnings.push_back("TruncationWarning: |beta|^2 exceeds truncation/4");
                        const StateVector coh = coherent_state(beta, n);
                        const StateVector psi =
                            p.n("cat") > 0 ? cat_state(p.n("cat"), beta, n)
                                           : kerr_evolve(coh, k, p.r("time"),
                                                         p.s("frame") == "number-squared" ? KerrFrame::number_squared : KerrFrame::normal_ordered);
                        const QGrid q = q_function(psi, QGridSpec{p.n("grid"), p.r("alpha-max")});
                        for (Eigen::Index iy = 0; iy < q.values.rows(); ++iy)
                            for (Eigen::Index ix = 0; ix < q.values.cols(); ++ix)
                                r.rows.push_back({q.axis[static_cast<std::size_t>(ix)], q.axis[static_cast<std::size_t>(iy)], q.values(iy, ix)});
                        const auto c = q.centroid();
                        r.scalars = {{"q_max", q.values.maxCoeff()}, {"q_integral", q.integral()},
                                     {"centroid_re", c.real()}, {"centroid_im", c.imag()},
                                     {"overlap_initial", std::norm(coh.dot(psi))}};
                        if (k != 0) r.scalars.emplace_back("revival_time_ns", kerr_revival_time(k));
                        return r;
                    }});

    cmds.push_back({"readout-snr", "dispersive readout pointer states and integrated SNR",
                    {real("n-bar", "10", "", "mean photon number"), real("freq", "8", "GHz", "cavity frequency"),
                     real("t1", "3us", "s", "qubit lifetime"), real("kappa-in", "2.5MHz", "GHz", "input coupling"),
                     real("kappa-out", "2.5MHz", "GHz", "output coupling"), real("chi", "1MHz", "GHz", "dispersive shift"),
                     real("tn", "10", "K", "amplifier noise temperature"), real("eps", "0.01", "", "drive amplitude"),
                     real("detuning", "0", "GHz", "drive detuning")},
                    [](const Point&) {
                        return std::vector<std::string>{"snr", "distinguishability", "alpha_plus_re", "alpha_plus_im",
                                                        "alpha_minus_re", "alpha_minus_im"};
                    },
                    [](const Point& p) {
                        ReadoutParams rp{p.r("eps"), p.r("detuning"), p.r("chi"), p.r("kappa-in"), p.r("kappa-out"),
                                         p.r("t1"), p.r("n-bar"), p.r("tn"), p.r("freq")};
                        const double snr = measurement_snr(rp), dist = distinguishability(rp);
                        const auto ap = dispersive_alpha(rp, 1), am = dispersive_alpha(rp, -1);
                        PointResult r;
                        r.rows.push_back({snr, dist, ap.real(), ap.imag(), am.real(), am.imag()});
                        r.scalars = {{"snr", snr}, {"distinguishability", dist}};
                        return r;
                    }});

    cmds.push_back({"bright-state", "semiclassical cavity response under strong drive",
                    {real("g", "0.1", "GHz", "coupling"), real("delta", "1", "GHz", "qubit-cavity detuning"),
                     real("kappa", "1MHz", "GHz", "cavity linewidth"), real("omega-r", "8", "GHz", "cavity frequency"),
                     integer("sigma-z", 1, -1, 1, "qubit state, +1 or -1"), real("xi", "0.01", "GHz", "drive strength"),
                     real("drive", "8", "GHz", "drive frequency")},
                    [](const Point&) { return std::vector<std::string>{"root", "a2", "stable", "chi_ghz"}; },
                    [](const Point& p) {
                        BrightStateParams b{p.r("g"), p.r("delta"), p.r("kappa"), p.r("omega-r"), p.n("sigma-z")};
                        const auto roots = bright_state_solve(b, p.r("xi"), p.r("drive"));
                        PointResult r;
                        double top = 0;
                        for (std::size_t k = 0; k < roots.size(); ++k) {
                            r.rows.push_back({static_cast<long long>(k), roots[k].a2, roots[k].stable, chi_of_amplitude(b, roots[k].a2)});
                            top = std::max(top, roots[k].a2);
                        }
                        r.scalars = {{"roots", static_cast<double>(roots.size())}, {"a2_max", top}};
                        return r;
                    }});

    return cmds;
}

int parse_jobs(const std::string& raw, const char* what) {
    long long v = 0;
    try {
        v = parse_int("jobs", raw);
    } catch (const UsageError&) {
        throw UsageError(fmt::format("{}: '{}' is not a positive integer", what, raw));
    }
    if (v < 1 || v > 1024) throw UsageError(fmt::format("{}: '{}' is not in [1, 1024]", what, raw));
    return static_cast<int>(v);
}

void write_file(const std::string& path, const std::function<void(std::ostream&)>& fn) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw UsageError(fmt::format("cannot write '{}'", path));
    fn(out);
    if (!out) throw UsageError(fmt::format("failed writing '{}'", path));
}

} // namespace

int main(int argc, char** argv) {
    const auto cmds = commands();
    CLI::App app{"cqedwb: circuit-QED design and analysis calculators"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    std::string config_path, prefix, jobs_raw;
    std::map<std::string, std::map<std::string, std::string>> raw;
    std::map<std::string, std::map<std::string, bool>> flags;
    std::map<std::string, CLI::App*> subs;
    for (const auto& c : cmds) {
        auto* sub = app.add_subcommand(c.name, c.help);
        subs[c.name] = sub;
        sub->add_option("--config", config_path, "JSON file of parameter values")->multi_option_policy(CLI::MultiOptionPolicy::Throw);
        sub->add_option("-o,--output", prefix, "write PREFIX.csv and PREFIX.json")->multi_option_policy(CLI::MultiOptionPolicy::Throw);
        sub->add_option("--jobs", jobs_raw, "worker threads for sweeps (default $CQEDWB_JOBS or 1)")
            ->multi_option_policy(CLI::MultiOptionPolicy::Throw);
        for (const auto& p : c.params) {
            std::string help = p.help;
            if (!p.unit.empty()) help += fmt::format(" [{}]", p.unit);
            if (!p.def.empty() && p.kind != Kind::flag) help += fmt::format(" (default {})", p.def);
            if (p.kind == Kind::choice) help += fmt::format(" {{{}}}", fmt::join(p.choices, ","));
            if (p.kind == Kind::flag)
                sub->add_flag("--" + p.name, flags[c.name][p.name], help)->multi_option_policy(CLI::MultiOptionPolicy::Throw);
            else
                sub->add_option("--" + p.name, raw[c.name][p.name], help)->multi_option_policy(CLI::MultiOptionPolicy::Throw);
        }
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        std::cerr << "UsageError: " << e.what() << "\n";
        return 2;
    }

    const Command* cmd = nullptr;
    for (const auto& c : cmds)
        if (subs[c.name]->parsed()) cmd = &c;

    RunOutput result;
    try {
        const char* env = std::getenv("CQEDWB_JOBS");
        int jobs = env && *env ? parse_jobs(env, "CQEDWB_JOBS") : 1;
        if (!jobs_raw.empty()) jobs = parse_jobs(jobs_raw, "--jobs");

        std::map<std::string, std::string> given;
        auto* sub = subs[cmd->name];
        for (const auto& p : cmd->params) {
            if (sub->get_option("--" + p.name)->count() == 0) continue;
            given[p.name] = p.kind == Kind::flag ? (flags[cmd->name][p.name] ? "true" : "false") : raw[cmd->name][p.name];
        }
        const json cfg = config_path.empty() ? json::object() : load_config(config_path);
        const auto vals = resolve(*cmd, cfg, given);
        result = run_command(*cmd, vals, jobs);
    } catch (const UsageError& e) {
        std::cerr << "UsageError: " << e.what() << "\n";
        return 2;
    }

    try {
        if (!prefix.empty()) {
            if (result.ok) {
                result.summary["table"]["path"] = prefix + ".csv";
                write_file(prefix + ".csv", [&](std::ostream& os) { write_csv(os, result.table); });
            }
            write_file(prefix + ".json", [&](std::ostream& os) { os << result.summary.dump(2) << "\n"; });
        } else {
            if (result.ok) write_csv(std::cout, result.table);
            std::cerr << result.summary.dump(2) << "\n";
        }
    } catch (const UsageError& e) {
        std::cerr << "UsageError: " << e.what() << "\n";
        return 2;
    }
    if (!result.ok) std::cerr << result.summary["error"]["message"].get<std::string>() << "\n";
    return result.ok ? 0 : 1;
}

// Command-line front end: computes Brumer-Stark p-unit data for real quadratic
// fields (conjugates, minimal polynomials, zeta tables, measures, and the
// derivative identity check), with a persistent zeta value cache and JSON
// output on stdout. Logs go to stderr.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <iostream>

#include "bsu/groupring.hpp"
#include "bsu/measure.hpp"
#include "bsu/recognize.hpp"

using nlohmann::ordered_json;

namespace {

struct RunConfig {
    long D = 0;
    long p = 0;
    long ell = 0;
    int precision = 100;
    int max_level = 6;
    unsigned max_moment = 120;
    int oracle_level = 0;
    int gross_m = 3;
    std::string cache_path;
    std::string format = "json";
    bool branch_minus = false;
    bool q_other_root = false;
    bool smooth_direct = false;

    bsu::MeasureConventions conventions() const {
        return bsu::MeasureConventions{q_other_root, !smooth_direct};
    }
    int work_precision(const std::vector<bsu::Int>& ords) const {
        long mx = 0;
        for (const auto& z : ords) mx = std::max(mx, z.abs().to_long());
        return precision + 2 * static_cast<int>(mx) + 16;
    }
};

std::unique_ptr<bsu::ZetaCache> open_cache(const RunConfig& cfg) {
    std::string path = cfg.cache_path;
    if (path.empty()) {
        if (const char* env = std::getenv("BSU_CACHE_PATH")) path = env;
    }
    if (path.empty()) return std::make_unique<bsu::ZetaCache>();  // in-memory
    return std::make_unique<bsu::ZetaCache>(path);
}

ordered_json coeff_json(const bsu::RecognizedCoeff& rc, const bsu::QuadField& F, const bsu::Int& p) {
    ordered_json j;
    j["a"] = rc.a.str();
    j["b"] = rc.b.str();
    j["k"] = rc.k;
    return j;
}

int cmd_compute(const RunConfig& cfg) {
    auto cache = open_cache(cfg);
    bsu::set_max_congruence_level(cfg.max_level);
    bsu::QuadField F = bsu::make_field(bsu::Int(cfg.D));
    if (!bsu::is_inert(F, bsu::Int(cfg.p)))
        throw bsu::not_inert_error("p is split in F; the formula requires an inert prime");
    bsu::Ideal avoid = F.principal_ideal(bsu::QuadElt{bsu::Rat(cfg.p * cfg.ell), bsu::Rat(0)});
    bsu::NarrowClassGroup G = bsu::narrow_class_group(F, avoid);

    // orders first (cheap), to size the working precision
    std::vector<bsu::Int> ords;
    for (long i = 0; i < G.order; ++i) {
        bsu::MeasureHandle h =
            bsu::make_measure(F, G, i, bsu::Int(cfg.p), bsu::Int(cfg.ell), cfg.conventions(), cache.get());
        ords.push_back(bsu::zeta0(h));
    }
    int work = cfg.work_precision(ords);
    bsu::PadicCtx ctx = bsu::PadicCtx::create(bsu::Int(cfg.p), work, F.D, cfg.branch_minus ? -1 : +1);
    bsu::IntegralOptions opt;
    opt.target_abs = cfg.precision + 6;
    opt.max_moment = cfg.max_moment;
    bsu::ConjugateSet conj = bsu::all_conjugates(F, G, bsu::Int(cfg.p), bsu::Int(cfg.ell), ctx,
                                                 cfg.conventions(), cache.get(), opt);
    int max_k = 3 * cfg.precision;
    bsu::MinPolyResult mp = bsu::minimal_polynomial(conj.values, F, max_k);

    ordered_json out;
    out["schema"] = 1;
    out["D"] = cfg.D;
    out["p"] = cfg.p;
    out["ell"] = cfg.ell;
    out["precision"] = cfg.precision;
    out["class_number"] = G.order;
    ordered_json structure = ordered_json::array();
    for (long s : G.structure) structure.push_back(s);
    out["narrow_class_structure"] = structure;
    ordered_json ordj = ordered_json::array();
    for (const auto& z : ords) ordj.push_back(z.str());
    out["ords"] = ordj;
    ordered_json conjj = ordered_json::array();
    for (long i = 0; i < G.order; ++i) {
        ordered_json c;
        c["class_index"] = i;
        c["zeta0"] = ords[static_cast<size_t>(i)].str();
        const bsu::PadicElt& v = conj.values[static_cast<size_t>(i)];
        c["value"] = {{"val", v.val()}, {"c0", v.c0().str()}, {"c1", v.c1().str()}};
        c["precision"] = v.abs_prec();
        conjj.push_back(c);
    }
    out["conjugates"] = conjj;
    ordered_json poly;
    poly["degree"] = mp.degree;
    ordered_json coefs = ordered_json::array();
    ordered_json display = ordered_json::array();
    for (const auto& rc : mp.coeffs) {
        coefs.push_back(coeff_json(rc, F, bsu::Int(cfg.p)));
        display.push_back(rc.display(F, bsu::Int(cfg.p)));
    }
    poly["coeffs"] = coefs;
    poly["display"] = display;
    poly["palindromic"] = mp.palindromic;
    poly["precision_used"] = mp.precision_used;
    poly["headroom"] = mp.headroom;
    out["minimal_polynomial"] = poly;
    std::cout << out.dump(2) << "\n";
    return 0;
}

int cmd_zeta(const RunConfig& cfg) {
    auto cache = open_cache(cfg);
    bsu::set_max_congruence_level(cfg.max_level);
    bsu::QuadField F = bsu::make_field(bsu::Int(cfg.D));
    if (!bsu::is_inert(F, bsu::Int(cfg.p)))
        throw bsu::not_inert_error("p is split in F; the formula requires an inert prime");
    bsu::Ideal avoid = F.principal_ideal(bsu::QuadElt{bsu::Rat(cfg.p * cfg.ell), bsu::Rat(0)});
    bsu::NarrowClassGroup G = bsu::narrow_class_group(F, avoid);
    ordered_json out;
    out["schema"] = 1;
    out["D"] = cfg.D;
    out["p"] = cfg.p;
    out["ell"] = cfg.ell;
    ordered_json vals = ordered_json::array();
    for (long i = 0; i < G.order; ++i) {
        bsu::MeasureHandle h =
            bsu::make_measure(F, G, i, bsu::Int(cfg.p), bsu::Int(cfg.ell), cfg.conventions(), cache.get());
        ordered_json v;
        v["class_index"] = i;
        v["zeta0"] = bsu::zeta0(h).str();
        vals.push_back(v);
    }
    out["values"] = vals;
    out["zeta_evaluations"] = bsu::zeta_evaluations().load();
    out["cone_point_visits"] = bsu::cone_point_visits().load();
    std::cout << out.dump(2) << "\n";
    return 0;
}

int cmd_measure(const RunConfig& cfg, long class_index, int level) {
    auto cache = open_cache(cfg);
    bsu::set_max_congruence_level(cfg.max_level);
    bsu::QuadField F = bsu::make_field(bsu::Int(cfg.D));
    bsu::Ideal avoid = F.principal_ideal(bsu::QuadElt{bsu::Rat(cfg.p * cfg.ell), bsu::Rat(0)});
    bsu::NarrowClassGroup G = bsu::narrow_class_group(F, avoid);
    bsu::MeasureHandle h = bsu::make_measure(F, G, class_index, bsu::Int(cfg.p), bsu::Int(cfg.ell),
                                             cfg.conventions(), cache.get());
    ordered_json out;
    out["schema"] = 1;
    out["D"] = cfg.D;
    out["p"] = cfg.p;
    out["ell"] = cfg.ell;
    out["class_index"] = class_index;
    out["level"] = level;
    ordered_json vals = ordered_json::array();
    bsu::measure_values_bulk(h, level, [&](const bsu::Int& rx, const bsu::Int& ry, const bsu::Rat& nu) {
        ordered_json v;
        v["r"] = rx.str() + "," + ry.str();
        v["nu"] = nu.str();
        vals.push_back(v);
    });
    out["values"] = vals;
    std::cout << out.dump(2) << "\n";
    return 0;
}

int cmd_gross_check(const RunConfig& cfg) {
    auto cache = open_cache(cfg);
    bsu::set_max_congruence_level(std::max(cfg.max_level, cfg.gross_m + 1));
    bsu::QuadField F = bsu::make_field(bsu::Int(cfg.D));
    bsu::Ideal avoid = F.principal_ideal(bsu::QuadElt{bsu::Rat(cfg.p * cfg.ell), bsu::Rat(0)});
    bsu::NarrowClassGroup G = bsu::narrow_class_group(F, avoid);
    std::vector<bsu::Int> ords;
    for (long i = 0; i < G.order; ++i) {
        bsu::MeasureHandle h =
            bsu::make_measure(F, G, i, bsu::Int(cfg.p), bsu::Int(cfg.ell), cfg.conventions(), cache.get());
        ords.push_back(bsu::zeta0(h));
    }
    int work = cfg.work_precision(ords);
    bsu::PadicCtx ctx = bsu::PadicCtx::create(bsu::Int(cfg.p), work, F.D, cfg.branch_minus ? -1 : +1);
    bsu::IntegralOptions opt;
    opt.target_abs = cfg.precision + 6;
    opt.max_moment = cfg.max_moment;
    bsu::ConjugateSet conj = bsu::all_conjugates(F, G, bsu::Int(cfg.p), bsu::Int(cfg.ell), ctx,
                                                 cfg.conventions(), cache.get(), opt);
    bsu::GrossStarkReport rep = bsu::gross_stark_residual(F, G, bsu::Int(cfg.p), bsu::Int(cfg.ell),
                                                          cfg.gross_m, conj, ctx, cfg.conventions(),
                                                          cache.get());
    bsu::ThetaDerivative td = bsu::theta_derivative(F, G, bsu::Int(cfg.p), bsu::Int(cfg.ell),
                                                    cfg.gross_m, cfg.conventions(), cache.get());
    ordered_json out;
    out["schema"] = 1;
    out["D"] = cfg.D;
    out["p"] = cfg.p;
    out["ell"] = cfg.ell;
    out["m"] = rep.m;
    ordered_json tdj;
    for (long i = 0; i < G.order; ++i)
        tdj[std::to_string(i)] = td.coeffs[static_cast<size_t>(i)].str();
    out["theta_derivative"] = tdj;
    out["theta_modulus"] = td.modulus.str();
    ordered_json rows = ordered_json::array();
    for (const auto& r : rep.rows) {
        ordered_json rj;
        rj["char"] = r.char_index;
        rj["residual_valuation"] = r.residual_val;
        rj["theta_component_nonzero"] = r.theta_nonzero;
        rows.push_back(rj);
    }
    out["characters"] = rows;
    out["min_residual_valuation"] = rep.min_residual_val;
    std::cout << out.dump(2) << "\n";
    return 0;
}

int cmd_selftest() {
    using namespace bsu;
    // quick invariants: direct values and roundtrips
    if (!(bernoulli_poly(1, Rat(0)) == Rat(-1, 2))) return 1;
    if (!(bernoulli_poly(2, Rat(0)) == Rat(1, 6))) return 1;
    if (!(bernoulli_poly(2, Rat(1, 2)) == Rat(-1, 12))) return 1;
    QuadField F5 = make_field(Int(5));
    if (!(F5.eps_plus == QuadElt{Rat(1), Rat(1)})) return 1;  // (3+sqrt5)/2 = 1 + omega
    QuadField F = make_field(Int(221));
    if (!is_inert(F, Int(3))) return 1;
    PadicCtx C = PadicCtx::create(Int(3), 24, Int(221));
    PadicElt x = PadicElt::from_pair(C, Rat(2), Rat(5));
    PadicElt w = teichmuller(x);
    if (!agree(w.pow(C.p * C.p - Int(1)), PadicElt::from_int(C, Int(1)), 24)) return 1;
    PadicElt y = PadicElt::from_pair(C, Rat(3), Rat(9));
    if (!agree(exp_p(log_p(PadicElt::from_int(C, Int(1)) + y)),
               PadicElt::from_int(C, Int(1)) + y, 22))
        return 1;
    std::cerr << "selftest: ok\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Brumer-Stark p-unit computations for real quadratic fields"};
    app.require_subcommand(1);
    RunConfig cfg;

    auto add_common = [&](CLI::App* sub, bool needs_ell = true) {
        sub->add_option("-D,--discriminant", cfg.D, "fundamental discriminant")->required();
        sub->add_option("-p,--prime", cfg.p, "odd inert prime")->required();
        if (needs_ell)
            sub->add_option("-l,--ell", cfg.ell, "smoothing prime (degree-1 prime above it)")
                ->required();
        sub->add_option("-M,--precision", cfg.precision, "p-adic digits of precision");
        sub->add_option("--max-level", cfg.max_level, "congruence level bound");
        sub->add_option("--max-moment", cfg.max_moment, "moment order bound");
        sub->add_option("--cache", cfg.cache_path, "zeta cache file (or BSU_CACHE_PATH)");
        sub->add_option("--format", cfg.format, "output format: json|table");
        sub->add_flag("--other-branch", cfg.branch_minus, "use the other square root of D");
        sub->add_flag("--other-q", cfg.q_other_root, "use the conjugate smoothing prime");
        sub->add_flag("--smooth-direct", cfg.smooth_direct,
                      "smooth by the direct divisor orientation");
    };

    auto* compute = app.add_subcommand("compute", "conjugates and the minimal polynomial");
    add_common(compute);
    auto* zeta = app.add_subcommand("zeta", "smoothed partial zeta values at 0");
    add_common(zeta);
    auto* measure = app.add_subcommand("measure", "measure values on residue classes");
    add_common(measure);
    long class_index = 0;
    int level = 1;
    measure->add_option("--class-index", class_index, "narrow class index");
    measure->add_option("--level", level, "congruence level");
    auto* gross = app.add_subcommand("gross-check", "rank-1 derivative identity residuals");
    add_common(gross);
    gross->add_option("-m,--gross-level", cfg.gross_m, "derivative approximation level");
    auto* selftest = app.add_subcommand("selftest", "run quick built-in invariants");

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand(compute)) return cmd_compute(cfg);
        if (app.got_subcommand(zeta)) return cmd_zeta(cfg);
        if (app.got_subcommand(measure)) return cmd_measure(cfg, class_index, level);
        if (app.got_subcommand(gross)) return cmd_gross_check(cfg);
        if (app.got_subcommand(selftest)) return cmd_selftest();
    } catch (const bsu::error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return static_cast<int>(e.code);
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

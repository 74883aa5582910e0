// Command-line front end. Exit codes: 0 success or all cases passed,
// 1 a failed check or runtime error, 2 usage error.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "cvgme/criteria.hpp"
#include "cvgme/io.hpp"
#include "cvgme/linalg.hpp"
#include "cvgme/optimize.hpp"
#include "cvgme/render.hpp"
#include "cvgme/reproduce.hpp"
#include "cvgme/states.hpp"
#include "cvgme/trees.hpp"
#include "cvgme/witness.hpp"

using namespace cvgme;
using io::json;

namespace {

struct Output {
    std::string path;

    void write(const std::string& text) const {
        if (path.empty() || path == "-") {
            std::cout << text;
            return;
        }
        std::ofstream out(path);
        if (!out) throw error(errc::parse, "cannot write '" + path + "'");
        out << text;
    }
};

Criterion parse_criterion(const std::string& s) {
    if (s == "product") return Criterion::product;
    if (s == "sum") return Criterion::sum;
    throw error(errc::parse, "criterion must be 'product' or 'sum'");
}

// --cm accepts a JSON file or "fixture:<key>".
CovarianceMatrix load_cm(const std::string& src) {
    if (src.rfind("fixture:", 0) == 0) return fixture_cm(src.substr(8));
    return io::cm_from_json(io::read_json(src));
}

// --tree accepts a fixture key or an edge-list file.
LabeledTree load_tree(const std::string& src) {
    for (const auto& k : fixture_tree_keys())
        if (k == src) return fixture_tree(k);
    return {parse_tree(io::read_text(src))};
}

struct OptimizerFlags {
    OptimizerConfig cfg;

    void attach(CLI::App* app) {
        app->add_option("--box", cfg.box, "coefficient bound b, search in [-b, b]")->capture_default_str();
        app->add_option("--restarts", cfg.restarts, "independent Nelder-Mead restarts")->capture_default_str();
        app->add_option("--iters", cfg.max_iters, "iterations per restart")->capture_default_str();
        app->add_option("--seed", cfg.seed, "master seed")->capture_default_str();
        app->add_option("--tol", cfg.tol, "simplex value spread for convergence")->capture_default_str();
        app->add_option("--threads", cfg.threads, "worker threads, 0 for all cores")->capture_default_str();
        app->add_flag("--witness-floor", cfg.witness_floor, "keep diagonal coefficients positive");
    }
};

std::string csv_number(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Minimal-marginal GME criteria for Gaussian CMs"};
    app.require_subcommand(1);
    Output out;
    app.add_option("-o,--output", out.path, "output file (default stdout)");
    int status = 0;

    // state
    auto* st = app.add_subcommand("state", "emit a factory or fixture CM as JSON");
    std::string kind = "ghz", key;
    double r = 0.0, db = 0.0, eta = 1.0;
    int ghz_modes = 3;
    st->add_option("--kind", kind, "ghz | ghz4 | tmsv | test-bisep | split-squeezed | fixture")->capture_default_str();
    auto* r_opt = st->add_option("--r", r, "squeezing parameter r >= 0");
    auto* db_opt = st->add_option("--dB", db, "squeezing in dB, 10 log10(e^{-2r}); r = 0.65 is -5.65 dB");
    r_opt->excludes(db_opt);
    st->add_option("--key", key, "fixture key for --kind fixture (gamma1, gamma2, ..., gamma7)");
    st->add_option("--modes", ghz_modes, "modes for --kind ghz")->capture_default_str();
    st->add_option("--loss", eta, "apply a pure-loss channel with this transmissivity")->capture_default_str();
    st->callback([&] {
        if (*db_opt) r = squeezing_from_db(db);
        CovarianceMatrix cm = kind == "fixture" ? fixture_cm(key)
                              : kind == "ghz"   ? ghz_cm(r, ghz_modes)
                                                : make_state(kind, r);
        if (eta != 1.0) cm = lossy_channel(cm, eta);
        json j = io::to_json(cm);
        j["physical"] = is_physical(cm);
        if (kind == "fixture" && !fixture_cm_note(key).empty()) j["note"] = fixture_cm_note(key);
        out.write(j.dump(2) + "\n");
    });

    // evaluate
    auto* ev = app.add_subcommand("evaluate", "evaluate both criteria at fixed coefficients");
    std::string cm_src, params_src;
    ev->add_option("--cm", cm_src, "CM JSON file or fixture:<key>")->required();
    ev->add_option("--params", params_src, "CholeskyParams JSON file or fixture:<key>")->required();
    ev->callback([&] {
        const CholeskyParams p = params_src.rfind("fixture:", 0) == 0 ? fixture_params(params_src.substr(8))
                                                                      : io::params_from_json(io::read_json(params_src));
        out.write(io::to_json(evaluate(load_cm(cm_src), p)).dump(2) + "\n");
    });

    // detect
    auto* de = app.add_subcommand("detect", "minimise D_P or D_S over the coefficients");
    std::string tree_src = "3", crit = "sum";
    OptimizerFlags dflags;
    de->add_option("--cm", cm_src, "CM JSON file or fixture:<key>")->required();
    de->add_option("--tree", tree_src, "fixture key or edge-list file")->capture_default_str();
    de->add_option("--criterion", crit, "product | sum")->capture_default_str();
    dflags.attach(de);
    de->callback([&] {
        const auto res = minimize_gap(load_cm(cm_src), load_tree(tree_src), parse_criterion(crit), dflags.cfg);
        out.write(io::to_json(res).dump(2) + "\n");
    });

    // scan
    auto* sc = app.add_subcommand("scan", "minimised gap versus squeezing; CSV columns r,best_value,detected");
    std::string factory = "ghz";
    double r_min = 0.0, r_max = 2.0, r_step = 0.05;
    OptimizerFlags sflags;
    sc->add_option("--state", factory, "ghz | ghz4 | tmsv | test-bisep | split-squeezed")->capture_default_str();
    sc->add_option("--tree", tree_src, "fixture key or edge-list file")->capture_default_str();
    sc->add_option("--criterion", crit, "product | sum")->capture_default_str();
    sc->add_option("--r-min", r_min)->capture_default_str();
    sc->add_option("--r-max", r_max)->capture_default_str();
    sc->add_option("--r-step", r_step)->capture_default_str();
    sflags.attach(sc);
    sc->callback([&] {
        if (!(r_step > 0.0)) throw error(errc::parse, "--r-step must be positive");
        std::vector<double> grid;
        for (int i = 0; r_min + i * r_step <= r_max + 1e-12; ++i) grid.push_back(r_min + i * r_step);
        const auto pts = scan_squeezing(factory, load_tree(tree_src), parse_criterion(crit), grid, sflags.cfg);
        std::string csv = "# cvgme scan v1\nr,best_value,detected\n";
        for (const auto& p : pts) csv += csv_number(p.r) + "," + csv_number(p.best_value) + "," + (p.detected ? "1" : "0") + "\n";
        out.write(csv);
    });

    // loss-threshold
    auto* lt = app.add_subcommand("loss-threshold",
                                  "smallest detected transmissivity; CSV columns probe,eta,best_value,detected");
    double eta_tol = 1e-3;
    OptimizerFlags lflags;
    lt->add_option("--cm", cm_src, "CM JSON file or fixture:<key>")->required();
    lt->add_option("--tree", tree_src, "fixture key or edge-list file")->capture_default_str();
    lt->add_option("--criterion", crit, "product | sum")->capture_default_str();
    lt->add_option("--eta-tol", eta_tol, "bisection tolerance")->capture_default_str();
    lflags.attach(lt);
    lt->callback([&] {
        const auto th = threshold_transmissivity(load_cm(cm_src), load_tree(tree_src), parse_criterion(crit),
                                                 lflags.cfg, eta_tol);
        std::string csv = "# cvgme loss-threshold v1\nprobe,eta,best_value,detected\n";
        for (std::size_t i = 0; i < th.probes.size(); ++i)
            csv += std::to_string(i) + "," + csv_number(th.probes[i].eta) + "," + csv_number(th.probes[i].best_value) +
                   "," + (th.probes[i].detected ? "1" : "0") + "\n";
        csv += "# eta_min," + csv_number(th.eta_min) + "\n";
        out.write(csv);
    });

    // witness
    auto* wi = app.add_subcommand("witness", "trace-form witnesses");
    wi->require_subcommand(1);
    auto* wb = wi->add_subcommand("build", "params JSON -> normalised witness JSON");
    std::string fixture_key, witness_src;
    auto* wb_params = wb->add_option("--params", params_src, "CholeskyParams JSON file");
    auto* wb_fix = wb->add_option("--fixture", fixture_key, "tree key of an embedded witness (3, 4a, ..., 6f)");
    wb_params->excludes(wb_fix);
    wb->callback([&] {
        json j;
        if (!fixture_key.empty()) {
            const auto f = fixture_witness(fixture_key);
            j = io::to_json(f.witness);
            j["printed_divisor"] = f.printed_divisor;
        } else if (!params_src.empty()) {
            j = io::to_json(witness_from_params(io::params_from_json(io::read_json(params_src))));
        } else {
            throw error(errc::parse, "give --params or --fixture");
        }
        out.write(j.dump(2) + "\n");
    });
    auto* wd = wi->add_subcommand("diagonalize", "witness JSON -> symplectic eigenvalues and synthesised CM");
    wd->add_option("--witness", witness_src, "witness JSON file")->required();
    wd->callback([&] {
        const auto w = io::witness_from_json(io::read_json(witness_src));
        const auto nf = williamson(w.full());
        json j{{"nu", std::vector<double>(nf.nu.data(), nf.nu.data() + nf.nu.size())},
               {"trace_zw", 2.0 * nf.nu.sum()},
               {"symplectic", io::matrix_to_json(nf.s)}};
        try {
            const auto cm = state_from_witness(w);
            j["cm"] = io::to_json(cm);
            j["trace"] = detects(cm, w).trace;
        } catch (const infeasible_error& e) {
            j["cm"] = nullptr;
            j["error"] = e.what();
            status = 1;
        }
        out.write(j.dump(2) + "\n");
    });
    auto* wt = wi->add_subcommand("detect", "CM + witness -> Tr[gamma Z] and verdict");
    wt->add_option("--cm", cm_src, "CM JSON file or fixture:<key>")->required();
    wt->add_option("--witness", witness_src, "witness JSON file")->required();
    wt->callback([&] {
        const auto t = detects(load_cm(cm_src), io::witness_from_json(io::read_json(witness_src)));
        out.write(json{{"trace", t.trace}, {"detected", t.detected}}.dump(2) + "\n");
    });

    // tree
    auto* tr = app.add_subcommand("tree", "tree utilities");
    tr->require_subcommand(1);
    auto* te = tr->add_subcommand("enumerate", "one labelled representative per isomorphism class");
    int order = 4;
    te->add_option("--order", order, "number of vertices, 2..12")->required();
    te->callback([&] {
        json arr = json::array();
        for (const auto& t : enumerate_trees(order)) {
            const auto lab = reverse_level_order_label(t);
            arr.push_back({{"code", canonical_code(t)}, {"edges", io::edges_to_json(lab.tree)}});
        }
        out.write(arr.dump(2) + "\n");
    });
    auto* tl = tr->add_subcommand("label", "reverse level order labelling of an edge-list tree");
    std::string tree_file;
    int root = 0;
    tl->add_option("file", tree_file, "edge-list file, one 'u v' pair per line ('-' for stdin)")->required();
    tl->add_option("--root", root, "centre vertex or centre-edge endpoint to use as root");
    tl->callback([&] {
        const Tree t = parse_tree(io::read_text(tree_file));
        const auto lab = root ? reverse_level_order_label(t, root) : reverse_level_order_label(t);
        out.write(format_tree(lab.tree));
    });
    auto* tv = tr->add_subcommand("validate", "single-nonzero column check of a labelled tree");
    tv->add_option("tree", tree_file, "fixture key or edge-list file")->required();
    tv->callback([&] {
        const auto chk = validate_labeling(load_tree(tree_file));
        out.write(json{{"valid", chk.ok}, {"failing_column", chk.failing_column}}.dump() + "\n");
        if (!chk.ok) status = 1;
    });

    // criterion-print
    auto* cp = app.add_subcommand("criterion-print", "render the variance terms and every K^(k)");
    std::string format = "text";
    cp->add_option("--tree", tree_src, "fixture key or edge-list file")->capture_default_str();
    cp->add_option("--format", format, "text | latex")->capture_default_str()->check(CLI::IsMember({"text", "latex"}));
    cp->callback([&] {
        out.write(criterion_print(load_tree(tree_src), format == "latex" ? RenderFormat::latex : RenderFormat::text));
    });

    // reproduce
    auto* rp = app.add_subcommand("reproduce", "run manifest cases and compare against pinned values");
    std::string which = "all";
    bool parallel = false, list = false;
    rp->add_option("case", which, "case id, id prefix ending in '/', criterion number, or 'all'")->capture_default_str();
    rp->add_flag("--parallel", parallel, "run cases concurrently");
    rp->add_flag("--list", list, "list case ids and exit");
    rp->callback([&] {
        if (list) {
            for (const auto& c : repro::manifest()) std::cout << c.criterion << "  " << c.id << "\n";
            return;
        }
        const auto sel = repro::select(which);
        std::string report;
        for (const auto& res : repro::run_selection(sel, {}, parallel)) {
            report += repro::format_line(res) + "\n";
            if (!res.pass) status = 1;
        }
        out.write(report);
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return (e.code() == errc::parse || e.code() == errc::lookup) ? 2 : 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return status;
}

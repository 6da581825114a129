// ctwist - scattering spectra, twist plots and reflectionless-null
// predictions for polyadic Cantor superlattice potentials.

#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ctwist/cantor.hpp"
#include "ctwist/config.hpp"
#include "ctwist/io.hpp"
#include "ctwist/nulls.hpp"
#include "ctwist/sweep.hpp"
#include "ctwist/tmm.hpp"

namespace {

using ctwist::RunConfig;

struct NumberArg {
    double value = 0;
    std::optional<ctwist::Rational> exact;
};

NumberArg parse_number_arg(const std::string& text, const char* name) {
    if (auto rat = ctwist::Rational::parse(text))
        return {rat->to_double(), rat};
    try {
        std::size_t pos = 0;
        const double v = std::stod(text, &pos);
        if (pos != text.size()) throw std::invalid_argument("trailing characters");
        return {v, ctwist::Rational::from_double(v)};
    } catch (const std::exception&) {
        throw ctwist::ParseError(std::string("flag --") + name + ": cannot parse '" + text +
                                 "' as a number or rational");
    }
}

RunConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ctwist::IoError("cannot open config file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return ctwist::parse_config(buf.str());
}

void write_file(const std::string& path, bool binary,
                const std::function<void(std::ostream&)>& writer) {
    std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
    if (!out) throw ctwist::IoError("cannot open '" + path + "' for writing");
    writer(out);
    out.flush();
    if (!out) throw ctwist::IoError("write to '" + path + "' failed");
}

// Shared geometry/energy flags; config file values are the baseline and any
// flag given on the command line overrides them.
struct CommonOptions {
    std::string config_path;
    int copies = 0;
    std::string gamma_text;
    std::string eps_text;
    int stage = 1;
    double phi_v = 0;

    CLI::Option* config_opt = nullptr;
    CLI::Option* copies_opt = nullptr;
    CLI::Option* gamma_opt = nullptr;
    CLI::Option* eps_opt = nullptr;
    CLI::Option* stage_opt = nullptr;
    CLI::Option* phi_v_opt = nullptr;

    void attach(CLI::App* cmd, bool with_eps, bool with_phi_v) {
        config_opt = cmd->add_option("--config", config_path, "JSON run configuration file");
        copies_opt = cmd->add_option("--N", copies, "number of self-similar copies (>= 3)");
        gamma_opt = cmd->add_option("--gamma", gamma_text,
                                    "scale factor, decimal or rational like 1/7");
        if (with_eps)
            eps_opt = cmd->add_option("--eps", eps_text,
                                      "lacunarity parameter, decimal or rational");
        stage_opt = cmd->add_option("--stage", stage, "pre-fractal stage S (>= 0)");
        if (with_phi_v)
            phi_v_opt = cmd->add_option("--phiv", phi_v, "dimensionless well depth phi_V");
    }

    // Resolve config + flags into a validated RunConfig.
    RunConfig resolve() const {
        std::optional<RunConfig> cfg;
        if (config_opt->count() > 0) cfg = load_config_file(config_path);

        int n = cfg ? cfg->params.copies : 0;
        NumberArg gamma{cfg ? cfg->params.gamma : 0.0, cfg ? cfg->params.gamma_exact : std::nullopt};
        NumberArg eps{cfg ? cfg->params.eps : 0.0, cfg ? cfg->params.eps_exact : std::nullopt};
        int s = cfg ? cfg->params.stage : stage;

        if (copies_opt->count() > 0) n = copies;
        if (gamma_opt->count() > 0) gamma = parse_number_arg(gamma_text, "gamma");
        if (eps_opt && eps_opt->count() > 0) eps = parse_number_arg(eps_text, "eps");
        if (stage_opt->count() > 0) s = stage;
        if (n == 0) throw ctwist::ValidationError("missing --N (or a config file)");
        if (gamma_opt->count() == 0 && !cfg)
            throw ctwist::ValidationError("missing --gamma (or a config file)");

        RunConfig out = cfg ? *cfg : RunConfig{};
        out.params = ctwist::validate_params(n, gamma.value, eps.value, s, gamma.exact, eps.exact);
        if (eps_opt && eps_opt->count() > 0) out.eps_sweep = false;
        if (phi_v_opt && phi_v_opt->count() > 0) out.phi_v = phi_v;
        if (out.phi_v < 0) throw ctwist::ValidationError("phi_v must be >= 0");
        if (!cfg) out.phi_max = ctwist::default_phi_max(out.phi_v);
        return out;
    }
};

void emit_outputs(const RunConfig& cfg, const std::vector<std::string>& out_paths,
                  const std::function<void(std::ostream&, ctwist::OutputFormat)>& writer) {
    std::vector<ctwist::OutputSpec> outs = cfg.outputs;
    for (const auto& path : out_paths)
        outs.push_back({ctwist::format_from_path(path), path});
    for (const auto& spec : outs)
        write_file(spec.path, spec.format == ctwist::OutputFormat::Pgm,
                   [&](std::ostream& os) { writer(os, spec.format); });
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"polyadic Cantor superlattice scattering toolkit"};
    app.require_subcommand(1);
    app.add_flag("--seedless",
                 "accepted for compatibility; runs are deterministic unconditionally");

    // --- geometry ---------------------------------------------------------
    auto* geometry = app.add_subcommand("geometry", "emit the layer stack of a pre-fractal");
    CommonOptions geo_opts;
    geo_opts.attach(geometry, true, false);
    bool geo_json = false;
    std::vector<std::string> geo_out;
    geometry->add_flag("--json", geo_json, "print JSON instead of CSV");
    geometry->add_option("--out", geo_out, "output file (.csv or .json); repeatable");

    // --- scatter ----------------------------------------------------------
    auto* scatter_cmd = app.add_subcommand("scatter", "reflection/transmission at one energy");
    CommonOptions sc_opts;
    sc_opts.attach(scatter_cmd, true, true);
    double sc_phi = 0;
    auto* sc_phi_opt = scatter_cmd->add_option("--phi", sc_phi, "normalized energy phi > 0");
    bool sc_json = false;
    std::vector<std::string> sc_out;
    scatter_cmd->add_flag("--json", sc_json, "print a JSON record with the matrix entries");
    scatter_cmd->add_option("--out", sc_out, "output file (.csv or .json); repeatable");

    // --- twist ------------------------------------------------------------
    auto* twist_cmd = app.add_subcommand("twist", "reflection grid over (phi, eps)");
    CommonOptions tw_opts;
    tw_opts.attach(twist_cmd, false, true);
    double tw_phi_min = 0, tw_phi_max = 0, tw_floor = 0;
    std::size_t tw_width = 0, tw_height = 0;
    unsigned tw_threads = 0;
    bool tw_flip = false;
    auto* tw_phi_min_opt = twist_cmd->add_option("--phi-min", tw_phi_min, "lowest phi (> 0)");
    auto* tw_phi_max_opt = twist_cmd->add_option("--phi-max", tw_phi_max, "highest phi");
    auto* tw_width_opt = twist_cmd->add_option("--width", tw_width, "phi samples (>= 2)");
    auto* tw_height_opt = twist_cmd->add_option("--height", tw_height, "eps samples (>= 2)");
    auto* tw_floor_opt = twist_cmd->add_option("--floor-db", tw_floor,
                                               "dB display floor (< 0, default -60)");
    twist_cmd->add_option("--threads", tw_threads, "worker threads (0 = auto)");
    twist_cmd->add_flag("--flip", tw_flip, "place the eps = 0 row at the top of the raster");
    std::vector<std::string> tw_out;
    twist_cmd->add_option("--out", tw_out, "output file (.csv, .pgm or .json); repeatable");

    // --- nulls ------------------------------------------------------------
    auto* nulls_cmd = app.add_subcommand("nulls", "analytical null curves over lacunarity");
    CommonOptions nl_opts;
    nl_opts.attach(nulls_cmd, false, true);
    std::size_t nl_samples = 200;
    double nl_phi_max = 0;
    nulls_cmd->add_option("--eps-samples", nl_samples, "lacunarity samples (>= 2, default 200)");
    auto* nl_phi_max_opt = nulls_cmd->add_option("--phi-max", nl_phi_max, "highest phi");
    bool nl_json = false;
    std::vector<std::string> nl_out;
    nulls_cmd->add_flag("--json", nl_json, "print JSON instead of CSV");
    nulls_cmd->add_option("--out", nl_out, "output file (.csv or .json); repeatable");

    // --- verify -----------------------------------------------------------
    auto* verify_cmd = app.add_subcommand("verify",
                                          "check predicted nulls against the numerical minima");
    CommonOptions vf_opts;
    vf_opts.attach(verify_cmd, false, true);
    std::size_t vf_samples = 3;
    double vf_window = 0.15, vf_phi_max = 0;
    verify_cmd->add_option("--eps-samples", vf_samples, "lacunarity samples (default 3)");
    verify_cmd->add_option("--window", vf_window, "half-width of the phi search window");
    auto* vf_phi_max_opt = verify_cmd->add_option("--phi-max", vf_phi_max, "highest phi");
    std::vector<std::string> vf_out;
    verify_cmd->add_option("--out", vf_out, "output file (.csv); repeatable");

    // --- dimension --------------------------------------------------------
    auto* dim_cmd = app.add_subcommand("dimension", "similarity dimension ln N / ln(1/gamma)");
    CommonOptions dm_opts;
    dm_opts.attach(dim_cmd, false, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (*geometry) {
            const RunConfig cfg = geo_opts.resolve();
            const ctwist::LayerStack stack = ctwist::build_stage(cfg.params);
            auto writer = [&](std::ostream& os, ctwist::OutputFormat fmt) {
                if (fmt == ctwist::OutputFormat::Json)
                    os << ctwist::geometry_json(stack).dump(2) << '\n';
                else if (fmt == ctwist::OutputFormat::Csv)
                    ctwist::write_geometry_csv(os, stack);
                else
                    throw ctwist::ValidationError("geometry cannot be written as PGM");
            };
            writer(std::cout,
                   geo_json ? ctwist::OutputFormat::Json : ctwist::OutputFormat::Csv);
            emit_outputs(cfg, geo_out, writer);
        } else if (*scatter_cmd) {
            if (sc_phi_opt->count() == 0) throw ctwist::ValidationError("missing --phi");
            const RunConfig cfg = sc_opts.resolve();
            const ctwist::LayerStack stack = ctwist::build_stage(cfg.params);
            const auto point = ctwist::energy_point(cfg.params, sc_phi, cfg.phi_v);
            const auto result = ctwist::scatter(stack, point);
            auto writer = [&](std::ostream& os, ctwist::OutputFormat fmt) {
                if (fmt == ctwist::OutputFormat::Json)
                    os << ctwist::scatter_json(cfg.params, cfg.phi_v, sc_phi, result).dump(2)
                       << '\n';
                else if (fmt == ctwist::OutputFormat::Csv)
                    ctwist::write_scatter_csv(os, sc_phi, result);
                else
                    throw ctwist::ValidationError("scatter cannot be written as PGM");
            };
            writer(std::cout, sc_json ? ctwist::OutputFormat::Json : ctwist::OutputFormat::Csv);
            emit_outputs(cfg, sc_out, writer);
        } else if (*twist_cmd) {
            RunConfig cfg = tw_opts.resolve();
            if (tw_phi_min_opt->count() > 0) cfg.phi_min = tw_phi_min;
            if (tw_phi_max_opt->count() > 0) cfg.phi_max = tw_phi_max;
            if (tw_width_opt->count() > 0) cfg.width = tw_width;
            if (tw_height_opt->count() > 0) cfg.height = tw_height;
            if (tw_floor_opt->count() > 0) cfg.floor_db = tw_floor;
            if (!(cfg.floor_db < 0)) throw ctwist::ValidationError("floor_db must be < 0");
            const ctwist::TwistGrid grid = ctwist::twist(cfg.params, cfg.phi_v, cfg.phi_min,
                                                         cfg.phi_max, cfg.width, cfg.height,
                                                         tw_threads);
            std::vector<ctwist::OutputSpec> outs = cfg.outputs;
            for (const auto& path : tw_out) outs.push_back({ctwist::format_from_path(path), path});
            if (outs.empty()) {
                ctwist::write_twist_csv(std::cout, grid);
            }
            for (const auto& spec : outs) {
                if (spec.format == ctwist::OutputFormat::Csv) {
                    write_file(spec.path, false,
                               [&](std::ostream& os) { ctwist::write_twist_csv(os, grid); });
                } else if (spec.format == ctwist::OutputFormat::Json) {
                    write_file(spec.path, false, [&](std::ostream& os) {
                        os << ctwist::twist_meta_json(grid, cfg.floor_db).dump(2) << '\n';
                    });
                } else {
                    write_file(spec.path, true, [&](std::ostream& os) {
                        ctwist::write_twist_pgm(os, grid, cfg.floor_db, tw_flip);
                    });
                    // metadata sidecar accompanies every raster
                    write_file(spec.path + ".json", false, [&](std::ostream& os) {
                        os << ctwist::twist_meta_json(grid, cfg.floor_db).dump(2) << '\n';
                    });
                }
            }
        } else if (*nulls_cmd) {
            const RunConfig cfg = nl_opts.resolve();
            const double phi_max =
                nl_phi_max_opt->count() > 0 ? nl_phi_max : cfg.phi_max;
            if (nl_samples < 2) throw ctwist::ValidationError("--eps-samples must be >= 2");
            const auto bounds = ctwist::epsilon_bounds(cfg.params.copies, cfg.params.gamma);
            if (!std::isfinite(bounds.eps_max))
                throw ctwist::ValidationError(
                    "eps_max is unbounded for N = 3; a lacunarity sweep is undefined");
            std::vector<double> samples(nl_samples);
            for (std::size_t k = 0; k < nl_samples; ++k)
                samples[k] = bounds.eps_max * static_cast<double>(k) /
                             static_cast<double>(nl_samples - 1);
            const auto curves = ctwist::null_curves(cfg.params, cfg.phi_v, samples, phi_max);
            auto writer = [&](std::ostream& os, ctwist::OutputFormat fmt) {
                if (fmt == ctwist::OutputFormat::Json)
                    os << ctwist::nulls_json(curves).dump(2) << '\n';
                else if (fmt == ctwist::OutputFormat::Csv)
                    ctwist::write_nulls_csv(os, curves);
                else
                    throw ctwist::ValidationError("nulls cannot be written as PGM");
            };
            writer(std::cout, nl_json ? ctwist::OutputFormat::Json : ctwist::OutputFormat::Csv);
            emit_outputs(cfg, nl_out, writer);
        } else if (*verify_cmd) {
            const RunConfig cfg = vf_opts.resolve();
            const double phi_max =
                vf_phi_max_opt->count() > 0 ? vf_phi_max : cfg.phi_max;
            if (vf_samples < 2) throw ctwist::ValidationError("--eps-samples must be >= 2");
            const auto bounds = ctwist::epsilon_bounds(cfg.params.copies, cfg.params.gamma);
            if (!std::isfinite(bounds.eps_max))
                throw ctwist::ValidationError(
                    "eps_max is unbounded for N = 3; a lacunarity sweep is undefined");
            std::vector<double> samples(vf_samples);
            for (std::size_t k = 0; k < vf_samples; ++k)
                samples[k] = bounds.eps_max * static_cast<double>(k) /
                             static_cast<double>(vf_samples - 1);
            const auto curves = ctwist::null_curves(cfg.params, cfg.phi_v, samples, phi_max);
            std::vector<ctwist::NullPrediction> preds;
            for (const auto& curve : curves)
                for (const auto& pt : curve.points)
                    if (pt.phi - vf_window > 0 && pt.phi + vf_window <= phi_max)
                        preds.push_back({curve.family, curve.i, curve.j, pt.eps, pt.phi,
                                         pt.low_energy});
            const auto rows = ctwist::verify_nulls(cfg.params, cfg.phi_v, preds, vf_window, 201,
                                                   phi_max);
            auto writer = [&](std::ostream& os, ctwist::OutputFormat fmt) {
                if (fmt != ctwist::OutputFormat::Csv)
                    throw ctwist::ValidationError("verify writes CSV only");
                ctwist::write_verify_csv(os, rows);
            };
            writer(std::cout, ctwist::OutputFormat::Csv);
            emit_outputs(cfg, vf_out, writer);
        } else if (*dim_cmd) {
            const RunConfig cfg = dm_opts.resolve();
            std::cout << ctwist::format_double(ctwist::similarity_dimension(cfg.params)) << '\n';
        }
    } catch (const ctwist::IoError& e) {
        std::cerr << "ctwist: I/O error: " << e.what() << '\n';
        return 2;
    } catch (const ctwist::Error& e) {
        std::cerr << "ctwist: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "ctwist: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

#include "dispersia/cli.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <ostream>

#include "dispersia/decay.hpp"
#include "dispersia/dispersion.hpp"
#include "dispersia/errors.hpp"
#include "dispersia/io.hpp"
#include "dispersia/log.hpp"
#include "dispersia/modal.hpp"

namespace dispersia {

namespace fs = std::filesystem;

namespace {

struct Options {
  std::string config;
  std::string out;
  unsigned threads = 0;
  std::string window;
  std::string trace;
};

struct Context {
  std::ostream& out;
  std::ostream& err;
};

void emit(const Context& ctx, const Options& opt, const std::string& content) {
  if (opt.out.empty()) ctx.out << content;
  else write_file_atomic(opt.out, content);
}

Json read_config(const Options& opt) {
  if (opt.config.empty()) throw ConfigError("config", "--config is required");
  return load_json(opt.config, "config");
}

fs::path config_dir(const Options& opt) { return fs::path(opt.config).parent_path(); }

void require_closed_form(const MediumSpec& m) {
  for (const Kernel* k : {&m.nuE, &m.nuH})
    if (std::holds_alternative<SampledKernel>(*k))
      throw Unsupported("sampled kernels have no finite memory closure; use closed-form exp_poly kernels");
}

int cmd_analyze(const Context& ctx, const Options& opt) {
  const AnalyzeConfig cfg = parse_analyze(read_config(opt), config_dir(opt));
  const ClassKCertificate cE = certify_class_K(cfg.medium.nuE);
  const ClassKCertificate cH = certify_class_K(cfg.medium.nuH);
  const PassivityReport r = analyze(cfg.medium.nuE, cfg.medium.nuH, cfg.scan);
  emit(ctx, opt, report_to_json(r, cE, cH).dump(2) + "\n");
  if (!r.passive) {
    ctx.err << "medium is not passive";
    if (!r.witnesses.empty()) ctx.err << " (Re(i omega L nu) < 0 at omega = " << r.witnesses.front() << ")";
    ctx.err << "\n";
    return exit_not_passive;
  }
  return exit_ok;
}

int cmd_simulate(const Context& ctx, const Options& opt) {
  SimulateConfig cfg = parse_simulate(read_config(opt), config_dir(opt));
  if (opt.threads > 0) cfg.run.threads = opt.threads;
  require_closed_form(cfg.medium);
  certify_class_K(cfg.medium.nuE);
  certify_class_K(cfg.medium.nuH);
  log_info("simulate: %zu modes, dt = %g, T = %g", cfg.modes.size(), cfg.run.dt, cfg.run.T);
  const EnergyTrace trace = run_multimode(cfg.medium, cfg.modes, cfg.run);
  emit(ctx, opt, format_trace(trace));
  return exit_ok;
}

int cmd_spectrum(const Context& ctx, const Options& opt) {
  const SpectrumConfig cfg = parse_spectrum(read_config(opt), config_dir(opt));
  require_closed_form(cfg.medium);
  certify_class_K(cfg.medium.nuE);
  certify_class_K(cfg.medium.nuH);
  std::vector<Spectrum> spectra;
  spectra.reserve(cfg.ks.size());
  for (double k : cfg.ks) spectra.push_back(spectral_abscissa(build_mode(cfg.medium, k)));
  emit(ctx, opt, format_spectrum(cfg.ks, spectra));
  return exit_ok;
}

int cmd_fit(const Context& ctx, const Options& opt) {
  FitConfig cfg;
  if (!opt.config.empty()) cfg = parse_fit(read_config(opt), config_dir(opt));
  if (!opt.trace.empty()) cfg.trace = opt.trace;
  if (cfg.trace.empty()) throw ConfigError("trace", "a trace path is required");
  if (!opt.window.empty()) cfg.window = parse_window(opt.window);
  const EnergyTrace trace = read_trace(fs::path(cfg.trace));
  const DecayReport r = fit_decay(trace, cfg.window);
  emit(ctx, opt, report_to_json(r).dump(2) + "\n");
  if (r.kind == DecayKind::inconclusive) {
    ctx.err << "fit inconclusive: " << r.reason << "\n";
    return exit_inconclusive;
  }
  return exit_ok;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Passivity analysis and modal simulation of dispersive cavity media", "dispersia"};
  app.require_subcommand(1);
  Options opt;

  auto* analyze_cmd = app.add_subcommand("analyze", "Certify kernels and report passivity and the decay exponent");
  auto* simulate_cmd = app.add_subcommand("simulate", "Integrate cavity modes and write the energy trace");
  auto* spectrum_cmd = app.add_subcommand("spectrum", "Tabulate the spectral abscissa over wavenumbers");
  auto* fit_cmd = app.add_subcommand("fit", "Classify the decay of an energy trace");

  for (auto* sub : {analyze_cmd, simulate_cmd, spectrum_cmd}) sub->add_option("--config", opt.config, "JSON config")->required();
  fit_cmd->add_option("--config", opt.config, "JSON config with 'trace' and 'window'");
  for (auto* sub : {analyze_cmd, simulate_cmd, spectrum_cmd, fit_cmd})
    sub->add_option("--out", opt.out, "Output path (default: standard output)");
  simulate_cmd->add_option("--threads", opt.threads, "Worker threads for mode integration")->check(CLI::Range(1u, 1024u));
  fit_cmd->add_option("trace", opt.trace, "Trace file (t,energy,history_norm)");
  fit_cmd->add_option("--window", opt.window, "Fit window 'start,end' (default: [T/5, T])");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return exit_ok;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return exit_ok;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return exit_config;
  }

  const Context ctx{out, err};
  try {
    if (analyze_cmd->parsed()) return cmd_analyze(ctx, opt);
    if (simulate_cmd->parsed()) return cmd_simulate(ctx, opt);
    if (spectrum_cmd->parsed()) return cmd_spectrum(ctx, opt);
    return cmd_fit(ctx, opt);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return exit_config;
  } catch (const CertificationFailure& e) {
    err << "certification failed: " << e.what() << " (t = " << e.violating_t() << ")\n";
    return exit_certification;
  } catch (const NotInClassK& e) {
    err << "certification failed: " << e.what() << "\n";
    return exit_certification;
  } catch (const Unsupported& e) {
    err << "unsupported: " << e.what() << "\n";
    return exit_unsupported;
  } catch (const UnusableTrace& e) {
    err << "unusable trace: " << e.what() << "\n";
    return exit_config;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return exit_config;
  }
}

}  // namespace dispersia

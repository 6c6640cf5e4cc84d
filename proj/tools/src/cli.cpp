#include "cli.hpp"

#include "demo.hpp"

#include "salflow/conditioning.hpp"
#include "salflow/dynsal.hpp"
#include "salflow/eval.hpp"
#include "salflow/io.hpp"
#include "salflow/saliency.hpp"
#include "salflow/solver.hpp"
#include "salflow/synth.hpp"
#include "salflow/version.hpp"

#include <CLI11.hpp>
#include <omp.h>

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <ostream>
#include <sstream>

namespace salflow::cli {

namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// Everything a command line can set; CLI11 binds to these fields.
struct Options {
  SolverConfig solver;
  std::string scheme = to_string(SolverConfig{}.scheme);
  std::string faces = to_string(SolverConfig{}.faces);
  SaliencyProvider provider;
  std::string provider_kind = "spectral";
  std::string layout = "gray+saliency";
  std::string input;
  std::string output;
  std::string manifest;
  std::string config;
  std::string log;
  int threads = 0;  // 0 = runtime default
  bool two_frame = false;

  // synth
  std::string spec_file;
  long long seed = -1;
  // dynsal
  std::string preview;
  // eval
  std::vector<std::string> models;
  std::string fixations;
  double rate = 25.0;
  int video_frames = 0;
  std::vector<int> frames;
  std::string curves;
  std::string summary;
  std::string flow;
  std::string truth;
  // condstats
  double threshold = 1000.0;
};

// Manifest sections collected while a command runs.
struct Manifest {
  std::vector<std::pair<std::string, std::string>> inputs, outputs;
  std::vector<std::pair<std::string, double>> timings;
  std::vector<LevelLog> levels;
  std::vector<std::string> notes;
};

void add_solver_options(CLI::App* app, Options& o) {
  SolverConfig& c = o.solver;
  app->add_option("--alpha", c.alpha, "Regularization weight");
  app->add_option("--lambda", c.lambda, "Temporal weight inside the space-time gradient");
  app->add_option("--tau", c.tau, "Fixed-point step size");
  app->add_option("--xi", c.xi, "Contrast weight floor");
  app->add_option("--epsilon", c.epsilon, "Penalizer smoothing constant");
  app->add_option("--tol", c.tol, "Relative change stopping tolerance");
  app->add_option("--levels", c.levels, "Pyramid depth");
  app->add_option("--scale", c.scale, "Per-level downsampling factor");
  app->add_option("--max-iterations", c.max_iterations, "Iteration cap per level");
  app->add_option("--median-radius", c.median_radius, "Median filter radius (2 = 5x5)");
  app->add_option("--presmooth-sigma", c.presmooth_sigma, "Gaussian presmoothing, 0 disables");
  app->add_option("--temporal-window", c.temporal_window,
                  "Frames solved jointly, 0 = whole sequence");
  app->add_option("--intensity-scale", c.intensity_scale, "Code value of intensity 1.0");
  app->add_option("--scheme", o.scheme, "Diffusion update")
      ->check(CLI::IsMember({"explicit", "center-implicit"}));
  app->add_option("--faces", o.faces, "Face diffusivity")
      ->check(CLI::IsMember({"face", "average"}));
}

void add_saliency_options(CLI::App* app, Options& o) {
  app->add_option("--provider", o.provider_kind, "Static saliency source")
      ->check(CLI::IsMember({"spectral", "external"}));
  app->add_option("--saliency-sigma", o.provider.smoothing_sigma,
                  "Smoothing of the spectral residual map (working pixels)");
  app->add_option("--working-width", o.provider.working_width,
                  "Width at which the spectral residual is computed");
}

void add_common_options(CLI::App* app, Options& o) {
  app->option_defaults()->always_capture_default();
  app->add_option("--threads", o.threads, "OpenMP threads, 0 = default")->check(CLI::NonNegativeNumber);
  app->add_option("--manifest", o.manifest, "Run manifest path (default: next to the output)");
  app->add_option("--config", o.config, "key=value configuration file; flags override it");
}

void finalize_solver(Options& o) {
  o.solver.scheme = parse_diffusion_scheme(o.scheme);
  o.solver.faces = parse_face_diffusivity(o.faces);
  o.solver.validate();
}

void finalize_provider(Options& o, bool layout_has_saliency, bool provider_given) {
  o.provider.kind = parse_provider_kind(o.provider_kind);
  if (provider_given && !layout_has_saliency)
    throw ValidationError("--provider conflicts with layout '" + o.layout +
                          "' (no saliency channel)");
  if (o.provider.kind == SaliencyProvider::Kind::kExternalFiles) o.provider.external_pattern = o.input;
}

fs::path default_manifest(const std::string& output, const std::string& command) {
  fs::path p(output);
  fs::path dir = p.has_extension() || p.string().find('%') != std::string::npos ? p.parent_path() : p;
  if (dir.empty()) dir = ".";
  return dir / ("manifest_" + command + ".txt");
}

void write_manifest(const std::string& command, const CLI::App* app, const Options& o,
                    const Manifest& m, const std::string& primary_output) {
  std::ostringstream s;
  s.precision(12);
  s << "# salflow " << kVersion << " run manifest\ncommand = " << command << '\n';
  s << "threads = " << (o.threads > 0 ? o.threads : omp_get_max_threads()) << '\n';
  s << "\n[configuration]\n" << app->config_to_str(true, false);
  if (command == "flow" || command == "demo-occlusion") {
    const SolverConfig& c = o.solver;
    s << "\n[solver]\nalpha = " << c.alpha << "\nlambda = " << c.lambda << "\ntau = " << c.tau
      << "\nxi = " << c.xi << "\nepsilon = " << c.epsilon << "\ntol = " << c.tol
      << "\nlevels = " << c.levels << "\nscale = " << c.scale
      << "\nmax_iterations = " << c.max_iterations << "\nmedian_radius = " << c.median_radius
      << "\npresmooth_sigma = " << c.presmooth_sigma
      << "\ntemporal_window = " << (o.two_frame ? 2 : c.temporal_window)
      << "\nintensity_scale = " << c.intensity_scale << "\nscheme = " << to_string(c.scheme)
      << "\nfaces = " << to_string(c.faces) << '\n';
  }
  s << "\n[inputs]\n";
  for (const auto& [k, v] : m.inputs) s << k << " = " << v << '\n';
  s << "\n[outputs]\n";
  for (const auto& [k, v] : m.outputs) s << k << " = " << v << '\n';
  s << "\n[timings_s]\n";
  for (const auto& [k, v] : m.timings) s << k << " = " << v << '\n';
  if (!m.levels.empty()) {
    s << "\n[convergence]\n# window,level,width,height,iterations,change_u1,change_u2,converged\n";
    for (const LevelLog& l : m.levels)
      s << l.window << ',' << l.level << ',' << l.width << ',' << l.height << ',' << l.iterations
        << ',' << l.change_u1 << ',' << l.change_u2 << ',' << (l.converged ? 1 : 0) << '\n';
  }
  for (const std::string& n : m.notes) s << "# " << n << '\n';
  const fs::path path = o.manifest.empty() ? default_manifest(primary_output, command) : fs::path(o.manifest);
  write_text(path, s.str());
}

std::string convergence_csv(const std::vector<LevelLog>& log) {
  std::ostringstream s;
  s.precision(10);
  s << "window,level,width,height,iterations,change_u1,change_u2,converged\n";
  for (const LevelLog& l : log)
    s << l.window << ',' << l.level << ',' << l.width << ',' << l.height << ',' << l.iterations
      << ',' << l.change_u1 << ',' << l.change_u2 << ',' << (l.converged ? 1 : 0) << '\n';
  return s.str();
}

/// Image sequence for the layout: saliency layouts get the channel from the
/// provider (computed or read from sidecars).
ComplementedSequence load_input(const Options& o) {
  const Layout layout = parse_layout(o.layout);
  if (!has_saliency(layout)) return load_sequence(o.input, layout);
  if (o.provider.kind == SaliencyProvider::Kind::kExternalFiles) return load_sequence(o.input, layout);
  const ComplementedSequence images = load_sequence(o.input, image_layout(layout));
  return complement(images, compute_sequence_saliency(images, o.provider));
}

Plane load_any_map(const fs::path& path) {
  if (path.extension() == ".salf") return load_map(path);
  std::vector<Plane> planes = read_raster(path);
  if (planes.size() == 1) return planes.front();
  return gray_of(Frame{std::move(planes)}, 3);
}

std::vector<Plane> load_maps(const std::string& pattern) {
  std::vector<Plane> maps;
  for (int index : list_indices(pattern)) maps.push_back(load_any_map(format_index(pattern, index)));
  return maps;
}

// ---- commands ----------------------------------------------------------------

int run_synth(Options& o, Manifest& m, std::ostream& out) {
  const auto t0 = Clock::now();
  SceneSpec spec = parse_scene_spec(read_text(o.spec_file));
  if (o.seed >= 0) spec.seed = static_cast<std::uint64_t>(o.seed);
  spec.validate();
  const RenderedScene scene = render(spec);
  const fs::path dir(o.output);
  const std::string frames = (dir / "frame_%04d.png").string();
  const std::string truth = (dir / "truth_%04d.flo").string();
  save_sequence(scene.sequence, frames);
  save_flow_field(scene.truth, truth);
  for (std::size_t t = 0; t < scene.visible.size(); ++t) {
    write_raster(format_index((dir / "visible_%04d.png").string(), static_cast<int>(t)),
                 {scene.visible[t]});
    write_raster(format_index((dir / "hidden_%04d.png").string(), static_cast<int>(t)),
                 {scene.hidden_mask[t]});
  }
  save_fixations(scene.fixations, dir / "fixations.csv");
  write_text(dir / "scene.txt", format_scene_spec(spec));
  m.inputs.emplace_back("spec", o.spec_file);
  m.outputs = {{"frames", frames},
               {"truth", truth},
               {"visible", (dir / "visible_%04d.png").string()},
               {"hidden", (dir / "hidden_%04d.png").string()},
               {"fixations", (dir / "fixations.csv").string()},
               {"scene", (dir / "scene.txt").string()}};
  m.timings.emplace_back("render", seconds_since(t0));
  out << "wrote " << spec.frames << " frames to " << dir.string() << '\n';
  return kExitOk;
}

int run_saliency(Options& o, Manifest& m, std::ostream& out) {
  const Layout layout = parse_layout(o.layout);
  if (has_saliency(layout))
    throw ValidationError("saliency takes an image layout (gray or color), got '" + o.layout + "'");
  if (o.provider.kind != SaliencyProvider::Kind::kSpectralResidual)
    throw ValidationError("the saliency command computes maps; use the spectral provider");
  const auto t0 = Clock::now();
  const ComplementedSequence seq = load_sequence(o.input, layout);
  const std::vector<SaliencyMap> maps = compute_sequence_saliency(seq, o.provider);
  const std::vector<int> indices = list_indices(o.input);
  for (std::size_t t = 0; t < maps.size(); ++t) {
    const fs::path path = o.output.empty()
                              ? saliency_sidecar(format_index(o.input, indices[t]))
                              : fs::path(format_index(o.output, indices[t]));
    write_raster(path, {maps[t].values}, 16);
  }
  m.inputs.emplace_back("frames", o.input);
  m.outputs.emplace_back("maps", o.output.empty() ? "<frame sidecars>" : o.output);
  m.timings.emplace_back("saliency", seconds_since(t0));
  out << "wrote " << maps.size() << " saliency maps\n";
  return kExitOk;
}

int run_complement(Options& o, Manifest& m, std::ostream& out) {
  const Layout layout = parse_layout(o.layout);
  if (has_saliency(layout))
    throw ValidationError("complement takes an image layout (gray or color), got '" + o.layout + "'");
  const auto t0 = Clock::now();
  const ComplementedSequence seq = load_sequence(o.input, layout);
  std::vector<SaliencyMap> maps;
  if (o.provider.kind == SaliencyProvider::Kind::kExternalFiles) {
    for (int t = 0; t < seq.frame_count(); ++t)
      maps.push_back(compute_static_saliency(seq.frame(t), seq.image_channel_count(), o.provider,
                                             list_indices(o.input)[static_cast<std::size_t>(t)]));
  } else {
    maps = compute_sequence_saliency(seq, o.provider);
  }
  save_sequence(complement(seq, maps), o.output);
  m.inputs.emplace_back("frames", o.input);
  m.outputs.emplace_back("sequence", o.output);
  m.timings.emplace_back("complement", seconds_since(t0));
  out << "wrote " << seq.frame_count() << " complemented frames\n";
  return kExitOk;
}

int run_flow(Options& o, Manifest& m, std::ostream& out) {
  const auto t0 = Clock::now();
  const ComplementedSequence seq = load_input(o);
  const double load_s = seconds_since(t0);
  const auto t1 = Clock::now();
  const SolveResult result = o.two_frame ? two_frame_baseline(seq, o.solver) : solve_sequence(seq, o.solver);
  const double solve_s = seconds_since(t1);
  save_flow_field(result.flow, o.output);
  const fs::path log = o.log.empty() ? fs::path(o.output).parent_path() / "convergence.csv" : fs::path(o.log);
  write_text(log, convergence_csv(result.log));
  m.inputs.emplace_back("frames", o.input);
  m.outputs = {{"flow", o.output}, {"convergence", log.string()}};
  m.timings = {{"load", load_s}, {"solve", solve_s}};
  m.levels = result.log;
  out << "solved " << result.flow.time_samples() << " transitions in " << solve_s << " s\n";
  return kExitOk;
}

int run_dynsal(Options& o, Manifest& m, std::ostream& out) {
  const auto t0 = Clock::now();
  const FlowField flow = load_flow_field(o.input);
  const DynamicSaliencySequence dyn = magnitude(flow);
  for (int t = 0; t < dyn.size(); ++t) {
    const auto st = static_cast<std::size_t>(t);
    save_map(dyn.raw[st].values, format_index(o.output, t));
    if (!o.preview.empty()) write_raster(format_index(o.preview, t), {dyn.normalized[st].values});
  }
  m.inputs.emplace_back("flow", o.input);
  m.outputs.emplace_back("maps", o.output);
  if (!o.preview.empty()) m.outputs.emplace_back("preview", o.preview);
  m.timings.emplace_back("dynsal", seconds_since(t0));
  out << "wrote " << dyn.size() << " dynamic saliency maps\n";
  return kExitOk;
}

int run_eval(Options& o, Manifest& m, std::ostream& out) {
  const auto t0 = Clock::now();
  std::vector<ModelMaps> models;
  for (const std::string& spec : o.models) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == spec.size())
      throw ValidationError("--model expects NAME=PATTERN, got '" + spec + "'");
    models.push_back({spec.substr(0, eq), load_maps(spec.substr(eq + 1))});
    if (models.back().maps.empty()) throw IoError("no maps for model " + models.back().name);
    m.inputs.emplace_back("model." + models.back().name, spec.substr(eq + 1));
  }
  const Plane& first = models.front().maps.front();
  // Dynamic maps cover the T - 1 transitions of a T-frame video, so by
  // default fixations may reach one frame past the last map.
  int frames = o.video_frames;
  if (frames == 0) {
    for (const ModelMaps& mm : models)
      frames = std::max(frames, static_cast<int>(mm.maps.size()) + 1);
  }
  const FixationMatrix fix = rasterize_fixations(load_fixations(o.fixations), o.rate, first.width(),
                                                 first.height(), frames);
  m.inputs.emplace_back("fixations", o.fixations);
  const std::vector<ScoreCurve> curves = score_models(models, fix, o.frames);

  std::ostringstream summary;
  summary.precision(10);
  for (const ScoreCurve& c : curves)
    summary << c.model << ".mean_auc = " << c.mean_auc << '\n'
            << c.model << ".mean_nss = " << c.mean_nss << '\n'
            << c.model << ".skipped_frames = " << c.skipped << '\n';
  if (!o.flow.empty() || !o.truth.empty()) {
    if (o.flow.empty() || o.truth.empty())
      throw ValidationError("angular error needs both --flow and --truth");
    const FlowField flow = load_flow_field(o.flow);
    const FlowField truth = load_flow_field(o.truth);
    const AngularErrorReport aae = average_angular_error(flow, truth, truth.valid);
    summary << "aae_deg = " << aae.mean << "\naae_valid_pixels = " << aae.valid_pixels << '\n';
    m.inputs.emplace_back("flow", o.flow);
    m.inputs.emplace_back("truth", o.truth);
  }
  const std::string curves_path =
      o.curves.empty() ? (fs::path(o.output) / "curves.csv").string() : o.curves;
  const std::string summary_path =
      o.summary.empty() ? (fs::path(o.output) / "summary.txt").string() : o.summary;
  write_text(curves_path, format_score_curves(curves));
  write_text(summary_path, summary.str());
  m.outputs = {{"curves", curves_path}, {"summary", summary_path}};
  m.timings.emplace_back("eval", seconds_since(t0));
  out << summary.str();
  return kExitOk;
}

int run_condstats(Options& o, Manifest& m, std::ostream& out) {
  const auto t0 = Clock::now();
  const ComplementedSequence seq = load_input(o);
  std::ostringstream csv;
  csv.precision(10);
  csv << "frame,fraction_below\n";
  double sum = 0.0;
  for (int t = 0; t < seq.frame_count(); ++t) {
    const ConditionReport r = condition_map(jacobian(seq.frame(t)), o.threshold);
    csv << t << ',' << r.fraction_below << '\n';
    sum += r.fraction_below;
  }
  const double mean = seq.frame_count() ? sum / seq.frame_count() : 0.0;
  const std::string path = (fs::path(o.output) / "condstats.csv").string();
  write_text(path, csv.str());
  m.inputs.emplace_back("frames", o.input);
  m.outputs.emplace_back("condstats", path);
  m.timings.emplace_back("condstats", seconds_since(t0));
  out << "layout = " << o.layout << "\nthreshold = " << o.threshold
      << "\nmean_fraction_below_percent = " << mean << '\n';
  return kExitOk;
}

int run_demo(Options& o, Manifest& m, std::ostream& out) {
  const auto t0 = Clock::now();
  SceneSpec spec = occlusion_scene(static_cast<std::uint64_t>(o.seed < 0 ? 1 : o.seed));
  if (!o.spec_file.empty()) spec = parse_scene_spec(read_text(o.spec_file));
  spec.validate();
  const OcclusionComparison r = compare_occlusion(spec, o.solver, o.provider);
  const fs::path dir(o.output);
  const std::string report = format_occlusion_report(spec, o.solver, r);
  write_text(dir / "report.txt", report);
  write_text(dir / "scene.txt", format_scene_spec(spec));
  save_flow_field(r.spatiotemporal.flow, (dir / "spatiotemporal_%04d.flo").string());
  save_flow_field(r.two_frame.flow, (dir / "two_frame_%04d.flo").string());
  m.outputs = {{"report", (dir / "report.txt").string()},
               {"scene", (dir / "scene.txt").string()},
               {"spatiotemporal_flow", (dir / "spatiotemporal_%04d.flo").string()},
               {"two_frame_flow", (dir / "two_frame_%04d.flo").string()}};
  m.levels = r.spatiotemporal.log;
  m.timings.emplace_back("demo", seconds_since(t0));
  out << report;
  const bool ok = r.magnitude_holds() && r.ordering_holds() && r.auc_holds();
  return ok ? kExitOk : kExitAssertion;
}

struct Command {
  CLI::App* app;
  std::function<int(Options&, Manifest&, std::ostream&)> run;
  bool solver = false;
  bool saliency_layout = false;  // layout/provider consistency applies
};

// Splices the key=value lines of a --config file into the argument list as
// --key=value, skipping keys that are also given on the command line.
std::vector<std::string> expand_config(const std::vector<std::string>& args) {
  std::vector<std::string> out;
  std::vector<std::string> given;
  std::string config;
  for (std::size_t i = 0; i < args.size(); ++i) {
    const std::string& a = args[i];
    if (a == "--config" && i + 1 < args.size()) config = args[i + 1];
    else if (a.rfind("--config=", 0) == 0) config = a.substr(9);
    if (a.rfind("--", 0) == 0) given.push_back(a.substr(2, a.find('=') == std::string::npos ? std::string::npos : a.find('=') - 2));
  }
  if (config.empty() || args.empty()) return args;
  std::istringstream in(read_text(config));
  std::vector<std::string> extra;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto trim = [](std::string t) {
      const auto b = t.find_first_not_of(" \t\r");
      const auto e = t.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : t.substr(b, e - b + 1);
    };
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ValidationError(config + ":" + std::to_string(number) + ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
    std::replace(key.begin(), key.end(), '_', '-');
    if (key == "config") throw ValidationError(config + ": nested config files are not supported");
    if (std::find(given.begin(), given.end(), key) != given.end()) continue;
    extra.push_back("--" + key + "=" + value);
  }
  out.push_back(args.front());
  out.insert(out.end(), extra.begin(), extra.end());
  out.insert(out.end(), args.begin() + 1, args.end());
  return out;
}

int report_error(std::ostream& err, const char* category, const std::string& what, int code) {
  err << category << " error: " << what << '\n';
  return code;
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::map<std::string, std::unique_ptr<Options>> options;
  const auto fresh = [&](const std::string& name) -> Options& {
    return *(options[name] = std::make_unique<Options>());
  };
  CLI::App app{"Dynamic saliency from saliency-complemented spatio-temporal optical flow",
               "salflow"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));
  std::map<std::string, Command> commands;

  {
    Options& o = fresh("synth");
    CLI::App* c = app.add_subcommand("synth", "Render a synthetic scene with ground truth");
    add_common_options(c, o);
    c->add_option("--spec", o.spec_file, "Scene spec (key=value)")->required();
    c->add_option("--out", o.output, "Output directory")->required();
    c->add_option("--seed", o.seed, "Override the spec seed");
    commands["synth"] = {c, run_synth};
  }
  {
    Options& o = fresh("saliency");
    CLI::App* c = app.add_subcommand("saliency", "Compute static saliency maps");
    add_common_options(c, o);
    add_saliency_options(c, o);
    c->add_option("--input", o.input, "Frame pattern, e.g. frames/frame_%04d.png")->required();
    o.layout = "gray";
    c->add_option("--layout", o.layout, "Image layout")->check(CLI::IsMember({"gray", "color"}));
    c->add_option("--output", o.output, "Map pattern (default: frame sidecars)");
    commands["saliency"] = {c, run_saliency};
  }
  {
    Options& o = fresh("complement");
    CLI::App* c = app.add_subcommand("complement", "Attach a saliency channel to a sequence");
    add_common_options(c, o);
    add_saliency_options(c, o);
    c->add_option("--input", o.input, "Frame pattern")->required();
    o.layout = "gray";
    c->add_option("--layout", o.layout, "Image layout")->check(CLI::IsMember({"gray", "color"}));
    c->add_option("--output", o.output, "Output frame pattern")->required();
    commands["complement"] = {c, run_complement};
  }
  const auto layouts = CLI::IsMember({"gray", "gray+saliency", "color", "color+saliency"});
  {
    Options& o = fresh("flow");
    CLI::App* c = app.add_subcommand("flow", "Spatio-temporal optical flow of a sequence");
    add_common_options(c, o);
    add_saliency_options(c, o);
    add_solver_options(c, o);
    c->add_option("--input", o.input, "Frame pattern")->required();
    c->add_option("--layout", o.layout, "Channel layout")->check(layouts);
    c->add_option("--output", o.output, "Flow pattern, e.g. out/flow_%04d.flo")->required();
    c->add_option("--log", o.log, "Convergence CSV (default: next to the flow)");
    c->add_flag("--two-frame", o.two_frame, "Two-frame baseline (temporal window 2)");
    commands["flow"] = {c, run_flow, true, true};
  }
  {
    Options& o = fresh("dynsal");
    CLI::App* c = app.add_subcommand("dynsal", "Dynamic saliency (flow magnitude) maps");
    add_common_options(c, o);
    c->add_option("--flow", o.input, "Flow pattern")->required();
    c->add_option("--output", o.output, "Map pattern (.salf float maps)")->required();
    c->add_option("--preview", o.preview, "Optional PNG pattern of normalized maps");
    commands["dynsal"] = {c, run_dynsal};
  }
  {
    Options& o = fresh("eval");
    CLI::App* c = app.add_subcommand("eval", "Score saliency maps against fixations");
    add_common_options(c, o);
    c->add_option("--model", o.models, "NAME=PATTERN of per-frame maps (.salf or raster)")
        ->required();
    c->add_option("--fixations", o.fixations, "Fixation CSV")->required();
    c->add_option("--rate", o.rate, "Frame rate in Hz")->check(CLI::PositiveNumber);
    c->add_option("--frames", o.frames, "Frame indices to score (default: all)");
    c->add_option("--video-frames", o.video_frames,
                  "Frames the fixations are mapped onto (default: map count + 1)")
        ->check(CLI::NonNegativeNumber);
    c->add_option("--out", o.output, "Output directory")->required();
    c->add_option("--curves", o.curves, "Per-frame CSV (default: OUT/curves.csv)");
    c->add_option("--summary", o.summary, "Summary key=value file (default: OUT/summary.txt)");
    c->add_option("--flow", o.flow, "Estimated flow pattern for angular error");
    c->add_option("--truth", o.truth, "Ground-truth flow pattern for angular error");
    commands["eval"] = {c, run_eval};
  }
  {
    Options& o = fresh("condstats");
    CLI::App* c = app.add_subcommand("condstats", "Jacobian condition number statistics");
    add_common_options(c, o);
    add_saliency_options(c, o);
    c->add_option("--input", o.input, "Frame pattern")->required();
    c->add_option("--layout", o.layout, "Channel layout")->check(layouts);
    c->add_option("--threshold", o.threshold, "Condition number threshold")->check(CLI::PositiveNumber);
    c->add_option("--out", o.output, "Output directory")->required();
    commands["condstats"] = {c, run_condstats, false, true};
  }
  {
    Options& o = fresh("demo-occlusion");
    CLI::App* c = app.add_subcommand("demo-occlusion",
                                     "Paired spatio-temporal vs two-frame occlusion comparison");
    add_common_options(c, o);
    add_saliency_options(c, o);
    o.solver.lambda = 10.0;
    add_solver_options(c, o);
    c->add_option("--seed", o.seed, "Scene seed (default 1)");
    c->add_option("--spec", o.spec_file, "Scene spec replacing the built-in occluder scene");
    o.output = "demo_occlusion";
    c->add_option("--out", o.output, "Output directory");
    commands["demo-occlusion"] = {c, run_demo, true};
  }

  try {
    const std::vector<std::string> expanded = expand_config(args);
    std::vector<std::string> reversed(expanded.rbegin(), expanded.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    const auto* sub = app.get_subcommands().empty() ? &app : app.get_subcommands().front();
    out << sub->help();
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << '\n';
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    return report_error(err, "validation", e.what(), kExitValidation);
  } catch (const ValidationError& e) {
    return report_error(err, "validation", e.what(), kExitValidation);
  } catch (const IoError& e) {
    return report_error(err, "io", e.what(), kExitIo);
  }

  CLI::App* sub = app.get_subcommands().front();
  Command& cmd = commands.at(sub->get_name());
  Options& o = *options.at(sub->get_name());
  Manifest manifest;
  // Failed runs still leave a manifest behind, with the error recorded.
  const auto fail = [&](const char* category, const char* what, int code) {
    manifest.notes.push_back(std::string(category) + " error: " + what);
    try {
      write_manifest(sub->get_name(), sub, o, manifest, o.output.empty() ? o.input : o.output);
    } catch (const std::exception&) {
    }
    return report_error(err, category, what, code);
  };
  try {
    if (o.threads > 0) omp_set_num_threads(o.threads);
    if (cmd.solver) finalize_solver(o);
    const bool provider_given = sub->get_option_no_throw("--provider") &&
                                sub->get_option("--provider")->count() > 0;
    const bool saliency_layout =
        cmd.saliency_layout ? has_saliency(parse_layout(o.layout)) : true;
    if (sub->get_option_no_throw("--provider")) finalize_provider(o, saliency_layout, provider_given);
    const int status = cmd.run(o, manifest, out);
    if (status == kExitAssertion) manifest.notes.push_back("ordering assertions failed");
    write_manifest(sub->get_name(), sub, o, manifest, o.output.empty() ? o.input : o.output);
    return status;
  } catch (const ValidationError& e) {
    return fail("validation", e.what(), kExitValidation);
  } catch (const IoError& e) {
    return fail("io", e.what(), kExitIo);
  } catch (const NumericalError& e) {
    return fail("numerical", e.what(), kExitNumerical);
  } catch (const std::exception& e) {
    return fail("validation", e.what(), kExitValidation);
  }
}

}  // namespace salflow::cli

// Copyright 2026 The faceflow Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Command line front end for the faceflow shared library. Talks to the
// library exclusively through its public C API.

#include "faceflow/faceflow.h"

#include <CLI11.hpp>

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

namespace {

// Thrown after a failed library call; carries the process exit code.
struct Fail {
  int code;
};

int exit_code_for(ff_status st) {
  switch (st) {
    case FF_OK:
      return 0;
    case FF_ERROR_IO:
      return 2;
    case FF_ERROR_FORMAT:
      return 3;
    case FF_ERROR_OPTIMIZATION:
      return 4;
    default:
      return 1;
  }
}

void check(ff_status st) {
  if (st == FF_OK) return;
  std::fprintf(stderr, "error: %s\n", ff_last_error());
  throw Fail{exit_code_for(st)};
}

using BasisPtr = std::unique_ptr<ff_basis, void (*)(ff_basis*)>;
using ParamsPtr = std::unique_ptr<ff_params, void (*)(ff_params*)>;
using FlowPtr = std::unique_ptr<ff_flow, void (*)(ff_flow*)>;
using ReportPtr = std::unique_ptr<ff_fit_report, void (*)(ff_fit_report*)>;

BasisPtr load_basis(const std::string& path) {
  ff_basis* b = nullptr;
  check(ff_basis_load(path.c_str(), &b));
  return BasisPtr(b, &ff_basis_free);
}

ParamsPtr load_params(const std::string& path) {
  ff_params* p = nullptr;
  check(ff_params_load(path.c_str(), &p));
  return ParamsPtr(p, &ff_params_free);
}

struct Args {
  std::string model;
  std::string src;
  std::string dst;
  std::string out;
  int steps = 8;
  std::vector<uint32_t> size = {128, 128};
  double theta = 0.0;
  double std_dev = 0.1;
  uint64_t seed = 7;
  int max_iters = 0; // 0 keeps the library default
  std::string warm;
  bool viz = false;
  uint32_t vertices = 400;
  uint32_t id_dim = 8;
  uint32_t exp_dim = 6;
};

int run_synth(const Args& a) {
  std::error_code ec;
  std::filesystem::create_directories(a.out, ec);
  if (ec) {
    std::fprintf(stderr, "error: cannot create directory %s\n", a.out.c_str());
    return 2;
  }
  ff_basis* b = nullptr;
  check(ff_basis_synthetic(a.vertices, a.id_dim, a.exp_dim, a.seed, &b));
  BasisPtr basis(b, &ff_basis_free);

  ff_params* ps = nullptr;
  check(ff_params_random(basis.get(), a.seed, &ps));
  ParamsPtr src(ps, &ff_params_free);
  ff_params* pt = nullptr;
  check(ff_params_random(basis.get(), a.seed + 1, &pt));
  ParamsPtr dst(pt, &ff_params_free);

  const std::filesystem::path dir(a.out);
  check(ff_basis_save(basis.get(), (dir / "basis.f3b").string().c_str()));
  check(ff_params_save(src.get(), (dir / "params_src.json").string().c_str()));
  check(ff_params_save(dst.get(), (dir / "params_dst.json").string().c_str()));
  check(ff_export_landmarks(basis.get(), src.get(),
                            (dir / "landmarks_src.json").string().c_str()));
  return 0;
}

int run_fit(const Args& a) {
  BasisPtr basis = load_basis(a.model);
  ParamsPtr warm(nullptr, &ff_params_free);
  if (!a.warm.empty()) warm = load_params(a.warm);

  ff_fit_options options;
  ff_fit_options_init(&options);
  if (a.max_iters > 0) options.max_iterations = a.max_iters;

  ff_fit_report* r = nullptr;
  check(ff_fit(basis.get(), a.src.c_str(), &options, warm.get(), &r));
  ReportPtr report(r, &ff_fit_report_free);

  check(ff_params_save(ff_fit_report_params(report.get()), a.out.c_str()));
  std::filesystem::path report_path(a.out);
  report_path.replace_extension();
  report_path += ".report.json";
  check(ff_fit_report_save(report.get(), report_path.string().c_str()));

  std::printf("iterations=%d final_loss=%.9g landmark_error_px=%.9g\n",
              ff_fit_report_iterations(report.get()),
              ff_fit_report_final_loss(report.get()),
              ff_fit_report_landmark_error(report.get()));
  return 0;
}

int run_interp(const Args& a) {
  if (a.steps < 2) {
    std::fprintf(stderr, "error: --steps must be at least 2\n");
    return 1;
  }
  ParamsPtr src = load_params(a.src);
  ParamsPtr dst = load_params(a.dst);
  std::error_code ec;
  std::filesystem::create_directories(a.out, ec);
  if (ec) {
    std::fprintf(stderr, "error: cannot create directory %s\n", a.out.c_str());
    return 2;
  }
  for (int k = 0; k < a.steps; ++k) {
    const double theta =
        1.0 - static_cast<double>(k) / static_cast<double>(a.steps - 1);
    ff_params* p = nullptr;
    check(ff_params_interpolate(src.get(), dst.get(), theta, &p));
    ParamsPtr frame(p, &ff_params_free);
    char name[32];
    std::snprintf(name, sizeof(name), "params_%03d.json", k);
    const std::filesystem::path path = std::filesystem::path(a.out) / name;
    check(ff_params_save(frame.get(), path.string().c_str()));
  }
  return 0;
}

int run_flow(const Args& a) {
  BasisPtr basis = load_basis(a.model);
  ParamsPtr src = load_params(a.src);
  ParamsPtr dst = load_params(a.dst);

  ff_params* mid = nullptr;
  check(ff_params_interpolate(src.get(), dst.get(), a.theta, &mid));
  ParamsPtr intermediate(mid, &ff_params_free);

  ff_flow* f = nullptr;
  check(ff_flow_rasterize(basis.get(), src.get(), intermediate.get(), a.size[0],
                          a.size[1], &f));
  FlowPtr flow(f, &ff_flow_free);
  check(ff_flow_save(flow.get(), a.out.c_str()));
  std::filesystem::path viz(a.out);
  viz.replace_extension(".ppm");
  check(ff_flow_save_visualization(flow.get(), viz.string().c_str()));
  return 0;
}

int run_animate(const Args& a) {
  BasisPtr basis = load_basis(a.model);
  ParamsPtr src = load_params(a.src);
  ParamsPtr dst = load_params(a.dst);
  check(ff_flow_sequence_save(basis.get(), src.get(), dst.get(),
                              static_cast<uint32_t>(a.steps), a.size[0],
                              a.size[1], a.out.c_str(), a.viz ? 1 : 0));
  return 0;
}

int run_render(const Args& a) {
  BasisPtr basis = load_basis(a.model);
  ParamsPtr params = load_params(a.src);
  check(ff_export_obj(basis.get(), params.get(), a.out.c_str()));
  return 0;
}

int run_metrics(const Args& a) {
  ff_metrics m;
  check(ff_image_metrics(a.src.c_str(), a.dst.c_str(), &m));
  if (!a.out.empty()) check(ff_metrics_save(&m, a.out.c_str()));
  std::printf("mae=%.9g mse=%.9g psnr_db=%.9g ssim=%.9g\n", m.mae, m.mse,
              m.psnr_db, m.ssim);
  return 0;
}

int run_perturb(const Args& a) {
  ParamsPtr src = load_params(a.src);
  ff_params* p = nullptr;
  check(ff_params_perturb(src.get(), a.std_dev, a.seed, &p));
  ParamsPtr noisy(p, &ff_params_free);
  check(ff_params_save(noisy.get(), a.out.c_str()));
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app("faceflow: morphable face model fitting and facial flow");
  app.require_subcommand(1);
  app.footer(
      "Exit codes: 0 success, 1 bad arguments or other failure,\n"
      "2 missing or unreadable file, 3 malformed file, 4 failed optimization.");

  Args a;

  CLI::App* synth =
      app.add_subcommand("synth", "Generate a seeded synthetic model bundle");
  synth->add_option("--out", a.out, "Output directory")->required();
  synth->add_option("--seed", a.seed, "Generator seed");
  synth->add_option("--vertices", a.vertices, "Vertex count");
  synth->add_option("--id-dim", a.id_dim, "Identity basis size");
  synth->add_option("--exp-dim", a.exp_dim, "Expression basis size");

  CLI::App* fit =
      app.add_subcommand("fit", "Fit model parameters to 2D landmarks");
  fit->add_option("--model", a.model, "Basis file (.f3b)")->required();
  fit->add_option("--src", a.src, "Landmarks file (.json)")->required();
  fit->add_option("--out", a.out, "Fitted parameters file (.json)")->required();
  fit->add_option("--max-iters", a.max_iters, "Iteration budget override");
  fit->add_option("--warm", a.warm,
                  "Ground truth parameters for the warm-up objective");

  CLI::App* interp = app.add_subcommand(
      "interp", "Write interpolated parameter sets from src to dst");
  interp->add_option("--src", a.src, "Start parameters (.json)")->required();
  interp->add_option("--dst", a.dst, "End parameters (.json)")->required();
  interp->add_option("--steps", a.steps, "Number of frames, at least 2");
  interp->add_option("--out", a.out, "Output directory")->required();

  CLI::App* flow = app.add_subcommand(
      "flow", "Rasterize the flow from src toward dst at one theta");
  flow->add_option("--model", a.model, "Basis file (.f3b)")->required();
  flow->add_option("--src", a.src, "Source parameters (.json)")->required();
  flow->add_option("--dst", a.dst, "Target parameters (.json)")->required();
  flow->add_option("--theta", a.theta,
                   "Interpolation coefficient in [0, 1]; 0 is full motion");
  flow->add_option("--size", a.size, "Frame size: width height")->expected(2);
  flow->add_option("--out", a.out,
                   "Output flow file (.f3f); a .ppm visualization is written "
                   "next to it")
      ->required();

  CLI::App* animate = app.add_subcommand(
      "animate", "Write the flow sequence from src to dst");
  animate->add_option("--model", a.model, "Basis file (.f3b)")->required();
  animate->add_option("--src", a.src, "Source parameters (.json)")->required();
  animate->add_option("--dst", a.dst, "Target parameters (.json)")->required();
  animate->add_option("--steps", a.steps, "Number of frames, at least 2");
  animate->add_option("--size", a.size, "Frame size: width height")->expected(2);
  animate->add_option("--out", a.out, "Output directory")->required();
  animate->add_flag("--viz", a.viz, "Also write PPM visualizations");

  CLI::App* render =
      app.add_subcommand("render", "Export the reconstructed mesh as OBJ text");
  render->add_option("--model", a.model, "Basis file (.f3b)")->required();
  render->add_option("--src", a.src, "Parameters file (.json)")->required();
  render->add_option("--out", a.out, "Output mesh (.obj)")->required();

  CLI::App* metrics =
      app.add_subcommand("metrics", "Score two PPM images against each other");
  metrics->add_option("--src", a.src, "First image (.ppm)")->required();
  metrics->add_option("--dst", a.dst, "Second image (.ppm)")->required();
  metrics->add_option("--out", a.out, "Optional metrics file (.json)");

  CLI::App* perturb = app.add_subcommand(
      "perturb", "Add seeded Gaussian noise to shape coefficients");
  perturb->add_option("--src", a.src, "Input parameters (.json)")->required();
  perturb->add_option("--std", a.std_dev, "Noise standard deviation");
  perturb->add_option("--seed", a.seed, "Generator seed");
  perturb->add_option("--out", a.out, "Output parameters (.json)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (app.got_subcommand(synth)) return run_synth(a);
    if (app.got_subcommand(fit)) return run_fit(a);
    if (app.got_subcommand(interp)) return run_interp(a);
    if (app.got_subcommand(flow)) return run_flow(a);
    if (app.got_subcommand(animate)) return run_animate(a);
    if (app.got_subcommand(render)) return run_render(a);
    if (app.got_subcommand(metrics)) return run_metrics(a);
    if (app.got_subcommand(perturb)) return run_perturb(a);
  } catch (const Fail& f) {
    return f.code;
  }
  return 1;
}

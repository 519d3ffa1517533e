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

#include "core/errors.hpp"
#include "core/flow.hpp"
#include "core/synthetic.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>

namespace {

using faceflow::FacialFlow;
using faceflow::FlowSequence;
using faceflow::ModelParams;
using faceflow::MorphableBasis;
using faceflow::PointCloud;

bool same_flow(const FacialFlow& a, const FacialFlow& b) {
  return a.width == b.width && a.height == b.height && a.data == b.data &&
         a.coverage == b.coverage;
}

} // namespace

TEST_CASE("interpolate_params returns the endpoints bit exactly") {
  const MorphableBasis basis = faceflow::synthetic_basis(100, 4, 3, 1);
  const ModelParams p_s = faceflow::random_params(basis, 2);
  const ModelParams p_t = faceflow::random_params(basis, 3);
  const ModelParams at_one = faceflow::interpolate_params(p_s, p_t, 1.0);
  const ModelParams at_zero = faceflow::interpolate_params(p_s, p_t, 0.0);
  CHECK(at_one.alpha_id == p_s.alpha_id);
  CHECK(at_one.alpha_exp == p_s.alpha_exp);
  CHECK(at_one.rotation == p_s.rotation);
  CHECK(at_one.translation == p_s.translation);
  CHECK(at_one.scale == p_s.scale);
  CHECK(at_zero.alpha_id == p_t.alpha_id);
  CHECK(at_zero.alpha_exp == p_t.alpha_exp);
  CHECK(at_zero.rotation == p_t.rotation);
  CHECK(at_zero.translation == p_t.translation);
  CHECK(at_zero.scale == p_t.scale);
}

TEST_CASE("interpolate_params averages scalars at the midpoint") {
  ModelParams p_s = ModelParams::zeros(2, 2);
  ModelParams p_t = ModelParams::zeros(2, 2);
  p_s.scale = 1.0;
  p_t.scale = 3.0;
  CHECK(faceflow::interpolate_params(p_s, p_t, 0.5).scale == 2.0);
}

TEST_CASE("interpolate_params is componentwise linear") {
  const MorphableBasis basis = faceflow::synthetic_basis(100, 4, 3, 4);
  const ModelParams p_s = faceflow::random_params(basis, 5);
  const ModelParams p_t = faceflow::random_params(basis, 6);
  const double theta = 0.3;
  const ModelParams mid = faceflow::interpolate_params(p_s, p_t, theta);
  const Eigen::VectorXd expected =
      theta * p_s.alpha_id + (1.0 - theta) * p_t.alpha_id;
  CHECK((mid.alpha_id - expected).cwiseAbs().maxCoeff() == 0.0);
  CHECK(mid.scale == theta * p_s.scale + (1.0 - theta) * p_t.scale);
}

TEST_CASE("interpolate_params of equal endpoints returns the same params") {
  const MorphableBasis basis = faceflow::synthetic_basis(100, 4, 3, 7);
  const ModelParams p = faceflow::random_params(basis, 8);
  for (const double theta : {0.0, 0.25, 0.5, 0.75, 1.0}) {
    const ModelParams out = faceflow::interpolate_params(p, p, theta);
    CHECK((out.alpha_id - p.alpha_id).cwiseAbs().maxCoeff() < 1e-15);
    CHECK(out.scale == doctest::Approx(p.scale).epsilon(1e-15));
  }
}

TEST_CASE("interpolate_params rejects invalid arguments") {
  const ModelParams a = ModelParams::zeros(2, 2);
  const ModelParams b = ModelParams::zeros(3, 2);
  CHECK_THROWS_AS(faceflow::interpolate_params(a, a, 1.5),
                  faceflow::RangeError);
  CHECK_THROWS_AS(faceflow::interpolate_params(a, a, -0.1),
                  faceflow::RangeError);
  CHECK_THROWS_AS(faceflow::interpolate_params(a, b, 0.5),
                  faceflow::ShapeError);
}

TEST_CASE("motion subtracts the intermediate cloud from the source") {
  PointCloud x_s(2, 3);
  x_s << 1, 2, 3, 4, 5, 6;
  SUBCASE("identical clouds give zeros") {
    CHECK(faceflow::motion(x_s, x_s).cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("uniform shift gives the negated shift") {
    PointCloud x_m = x_s;
    x_m.col(0).array() += 1.0;
    const PointCloud d = faceflow::motion(x_s, x_m);
    for (int i = 0; i < 2; ++i) {
      CHECK(d(i, 0) == -1.0);
      CHECK(d(i, 1) == 0.0);
      CHECK(d(i, 2) == 0.0);
    }
  }
  SUBCASE("random clouds match elementwise subtraction") {
    PointCloud x_m(2, 3);
    x_m << 0.5, -1, 2, 7, 0, -3;
    const PointCloud d = faceflow::motion(x_s, x_m);
    for (int i = 0; i < 2; ++i)
      for (int c = 0; c < 3; ++c) CHECK(d(i, c) == x_s(i, c) - x_m(i, c));
  }
  SUBCASE("count mismatch is rejected") {
    const PointCloud x_m(3, 3);
    CHECK_THROWS_AS(faceflow::motion(x_s, x_m), faceflow::ShapeError);
  }
}

TEST_CASE("rasterize_flow with equal params is zero over the footprint") {
  const MorphableBasis basis = faceflow::synthetic_basis(200, 4, 3, 9);
  const ModelParams p = faceflow::random_params(basis, 10);
  const FacialFlow flow = faceflow::rasterize_flow(basis, p, p, 64, 64);
  flow.validate();
  bool any_covered = false;
  for (int y = 0; y < 64; ++y) {
    for (int x = 0; x < 64; ++x) {
      any_covered = any_covered || flow.covered(x, y);
      for (int c = 0; c < 3; ++c) CHECK(flow.at(x, y, c) == 0.0f);
    }
  }
  CHECK(any_covered);
}

TEST_CASE("rasterize_flow keeps the deeper vertex on a collision") {
  // Two vertices project to the same pixel with depths 5 and 2; doubling the
  // scale in the intermediate params gives each a distinct motion.
  MorphableBasis basis = faceflow::synthetic_basis(70, 1, 1, 11);
  basis.mean_shape[0] = 3.0;
  basis.mean_shape[1] = 4.0;
  basis.mean_shape[2] = 5.0;
  basis.mean_shape[3] = 3.2;
  basis.mean_shape[4] = 4.2;
  basis.mean_shape[5] = 2.0;
  // Push every other vertex far outside the frame.
  for (int i = 2; i < 70; ++i) basis.mean_shape[3 * i] = 1e6;

  ModelParams p_s = ModelParams::zeros(1, 1);
  ModelParams p_m = ModelParams::zeros(1, 1);
  p_m.scale = 2.0;

  const FacialFlow flow = faceflow::rasterize_flow(basis, p_s, p_m, 8, 8);
  const int px = 3;
  const int py = 7 - 4;
  REQUIRE(flow.covered(px, py));
  CHECK(flow.at(px, py, 0) == doctest::Approx(-3.0));
  CHECK(flow.at(px, py, 2) == doctest::Approx(-5.0));

  // The same scene with a z tie keeps the smaller vertex index.
  basis.mean_shape[5] = 5.0;
  const FacialFlow tied = faceflow::rasterize_flow(basis, p_s, p_m, 8, 8);
  REQUIRE(tied.covered(px, py));
  CHECK(tied.at(px, py, 0) == doctest::Approx(-3.0));
}

TEST_CASE("rasterize_flow matches the exhaustive per pixel oracle") {
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    const MorphableBasis basis = faceflow::synthetic_basis(200, 4, 3, seed);
    ModelParams p_s = faceflow::random_params(basis, seed + 60);
    ModelParams p_m = faceflow::random_params(basis, seed + 70);
    // Shrink onto a 32 x 32 frame.
    p_s.scale *= 0.25;
    p_s.translation *= 0.25;
    p_m.scale *= 0.25;
    p_m.translation *= 0.25;
    const FacialFlow fast = faceflow::rasterize_flow(basis, p_s, p_m, 32, 32);
    const FacialFlow slow = oracles::rasterize_by_scanning(basis, p_s, p_m, 32, 32);
    CHECK(same_flow(fast, slow));
  }
}

TEST_CASE("rasterize_flow rejects an empty frame") {
  const MorphableBasis basis = faceflow::synthetic_basis(100, 4, 3, 12);
  const ModelParams p = ModelParams::zeros(4, 3);
  CHECK_THROWS_AS(faceflow::rasterize_flow(basis, p, p, 0, 32),
                  faceflow::RangeError);
}

TEST_CASE("flow_sequence walks theta from one to zero") {
  const MorphableBasis basis = faceflow::synthetic_basis(200, 4, 3, 13);
  const ModelParams p_s = faceflow::random_params(basis, 14);
  const ModelParams p_t = faceflow::random_params(basis, 15);

  SUBCASE("five frames hit the uniform grid") {
    const FlowSequence seq =
        faceflow::flow_sequence(basis, p_s, p_t, 5, 32, 32);
    seq.validate();
    REQUIRE(seq.thetas.size() == 5);
    CHECK(seq.thetas[0] == 1.0);
    CHECK(seq.thetas[1] == 0.75);
    CHECK(seq.thetas[2] == 0.5);
    CHECK(seq.thetas[3] == 0.25);
    CHECK(seq.thetas[4] == 0.0);
  }

  SUBCASE("two frames are the zero flow and the full flow") {
    const FlowSequence seq =
        faceflow::flow_sequence(basis, p_s, p_t, 2, 32, 32);
    REQUIRE(seq.frames.size() == 2);
    for (const float v : seq.frames[0].data) CHECK(v == 0.0f);
    const FacialFlow full = faceflow::rasterize_flow(basis, p_s, p_t, 32, 32);
    CHECK(same_flow(seq.frames[1], full));
  }

  SUBCASE("frame count below two is rejected") {
    CHECK_THROWS_AS(faceflow::flow_sequence(basis, p_s, p_t, 1, 32, 32),
                    faceflow::RangeError);
  }
}

TEST_CASE("fixed pose motion is linear in one minus theta") {
  const MorphableBasis basis = faceflow::synthetic_basis(150, 4, 3, 16);
  const ModelParams p_s = faceflow::random_params(basis, 17);
  ModelParams p_t = faceflow::random_params(basis, 18);
  p_t.rotation = p_s.rotation;
  p_t.translation = p_s.translation;
  p_t.scale = p_s.scale;

  const PointCloud source = faceflow::reconstruct(basis, p_s);
  const PointCloud full = faceflow::motion(
      source, faceflow::reconstruct(basis, faceflow::interpolate_params(
                                               p_s, p_t, 0.0)));
  for (const double theta : {0.25, 0.5, 0.75}) {
    const PointCloud part = faceflow::motion(
        source, faceflow::reconstruct(basis, faceflow::interpolate_params(
                                                 p_s, p_t, theta)));
    const PointCloud expected = (1.0 - theta) * full;
    const double scale = full.cwiseAbs().maxCoeff();
    CHECK((part - expected).cwiseAbs().maxCoeff() < 1e-10 * scale);
  }
}

TEST_CASE("substitute_params moves expression and pose selectively") {
  const MorphableBasis basis = faceflow::synthetic_basis(100, 4, 3, 19);
  const ModelParams source = faceflow::random_params(basis, 20);
  const ModelParams driver = faceflow::random_params(basis, 21);

  SUBCASE("no flags keeps the source") {
    const ModelParams out =
        faceflow::substitute_params(source, driver, false, false);
    CHECK(out.alpha_id == source.alpha_id);
    CHECK(out.alpha_exp == source.alpha_exp);
    CHECK(out.rotation == source.rotation);
    CHECK(out.translation == source.translation);
    CHECK(out.scale == source.scale);
  }
  SUBCASE("expression flag takes only the driver expression") {
    const ModelParams out =
        faceflow::substitute_params(source, driver, true, false);
    CHECK(out.alpha_exp == driver.alpha_exp);
    CHECK(out.alpha_id == source.alpha_id);
    CHECK(out.rotation == source.rotation);
    CHECK(out.translation == source.translation);
    CHECK(out.scale == source.scale);
  }
  SUBCASE("both flags keep identity and placement") {
    const ModelParams out =
        faceflow::substitute_params(source, driver, true, true);
    CHECK(out.alpha_exp == driver.alpha_exp);
    CHECK(out.rotation == driver.rotation);
    CHECK(out.alpha_id == source.alpha_id);
    CHECK(out.translation == source.translation);
    CHECK(out.scale == source.scale);
  }
  SUBCASE("dimension mismatch is rejected") {
    const ModelParams bad = ModelParams::zeros(5, 3);
    CHECK_THROWS_AS(faceflow::substitute_params(source, bad, true, true),
                    faceflow::ShapeError);
  }
}

TEST_CASE("perturb_params adds seeded noise to the coefficients only") {
  const MorphableBasis basis = faceflow::synthetic_basis(100, 4, 3, 22);
  const ModelParams params = faceflow::random_params(basis, 23);

  SUBCASE("zero std returns the input") {
    const ModelParams out = faceflow::perturb_params(params, 0.0, 99);
    CHECK(out.alpha_id == params.alpha_id);
    CHECK(out.alpha_exp == params.alpha_exp);
  }
  SUBCASE("fixed seed is deterministic") {
    const ModelParams a = faceflow::perturb_params(params, 0.1, 5);
    const ModelParams b = faceflow::perturb_params(params, 0.1, 5);
    CHECK(a.alpha_id == b.alpha_id);
    CHECK(a.alpha_exp == b.alpha_exp);
  }
  SUBCASE("transform fields stay untouched") {
    const ModelParams out = faceflow::perturb_params(params, 0.5, 6);
    CHECK(out.rotation == params.rotation);
    CHECK(out.translation == params.translation);
    CHECK(out.scale == params.scale);
    CHECK(out.alpha_id != params.alpha_id);
  }
  SUBCASE("sample std over many draws is close to the target") {
    const ModelParams wide = ModelParams::zeros(10000, 0);
    const ModelParams out = faceflow::perturb_params(wide, 0.1, 7);
    const double mean = out.alpha_id.mean();
    const double var =
        (out.alpha_id.array() - mean).square().sum() / (10000 - 1);
    CHECK(std::sqrt(var) == doctest::Approx(0.1).epsilon(0.05));
  }
  SUBCASE("negative std is rejected") {
    CHECK_THROWS_AS(faceflow::perturb_params(params, -0.1, 0),
                    faceflow::InvalidParameterError);
  }
}

TEST_CASE("flow rasterization is deterministic") {
  const MorphableBasis basis = faceflow::synthetic_basis(200, 4, 3, 24);
  const ModelParams p_s = faceflow::random_params(basis, 25);
  const ModelParams p_m = faceflow::random_params(basis, 26);
  const FacialFlow a = faceflow::rasterize_flow(basis, p_s, p_m, 48, 40);
  const FacialFlow b = faceflow::rasterize_flow(basis, p_s, p_m, 48, 40);
  CHECK(same_flow(a, b));
}

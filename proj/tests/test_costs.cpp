#include "support.hpp"
#include "topotraj/costs.hpp"
#include "topotraj/scenario.hpp"
#include "topotraj/solver.hpp"

#include <doctest.h>

using namespace topotraj;
using namespace topotraj::testing;

namespace {

// Central differences of a per-trajectory scalar over every coefficient and duration.
template <typename F>
double worstCoeffError(const Trajectory& t, const CoeffGradient& g, F value, double h = 1e-6) {
    double worst = 0.0;
    double scale = 1e-8;
    for (int i = 0; i < t.pieceCount(); ++i) {
        for (int k = 0; k < 13; ++k) {
            auto at = [&](double d) {
                std::vector<PieceCoeffs> pieces = t.pieces();
                std::vector<double> durs = t.durations();
                if (k < 12) {
                    pieces[i](k / 2, k % 2) += d;
                } else {
                    durs[i] += d;
                }
                return value(Trajectory(pieces, durs));
            };
            const double fd = (at(h) - at(-h)) / (2 * h);
            const double an = k < 12 ? g.coeffs[i](k / 2, k % 2) : g.durations(i);
            worst = std::max(worst, std::abs(fd - an));
            scale = std::max(scale, std::abs(fd));
        }
    }
    return worst / scale;
}

Scenario twoVehicles(Interaction eta) {
    return parseScenario(std::string(R"(
name: pair
vehicles:
  - {id: a, start: [1, 5], goal: [9, 5.5]}
  - {id: b, start: [9, 5], goal: [1, 4.5]}
interactions:
  - {pair: [a, b], eta: )") + (eta == Interaction::Clockwise ? "cw" : eta == Interaction::None ? "none" : "ccw") +
                         "}\n");
}

}  // namespace

TEST_CASE("effort cost") {
    const Trajectory unit = mincoSolve({Vec2(0, 0)}, {Vec2(1, 0)}, {}, {1.0});
    CHECK(effortCost(unit).value == doctest::Approx(720.0).epsilon(1e-12));
    PieceCoeffs quad = PieceCoeffs::Zero();
    quad.row(2) << 1.0, -2.0;
    CHECK(effortCost(Trajectory({quad}, {3.0})).value == 0.0);

    std::mt19937_64 rng(30);
    const Trajectory t = randomTrajectory(rng, 3);
    const SingleCost c = effortCost(t);
    CHECK(worstCoeffError(t, c.grad, [](const Trajectory& x) { return effortCost(x).value; }) < 1e-5);
}

TEST_CASE("time cost") {
    Eigen::VectorXd g;
    CHECK(timeCost({1, 2, 3}, 100.0, &g) == 600.0);
    CHECK(g.isApprox(Eigen::Vector3d(100, 100, 100)));
    CHECK(timeCost({1, 2, 3}, 0.0) == 0.0);
}

TEST_CASE("kinodynamic penalty") {
    CHECK(kinodynamicPenalty(Trajectory::stationary(Vec2(1, 1), 2.0), 3.0, 2.0).value == 0.0);
    CHECK(kinodynamicPenalty(linearTrajectory(Vec2(0, 0), Vec2(2, 0), 3.0), 3.0, 2.0).value == 0.0);
    // Constant 4 m/s: every node contributes (16 - 9)^3, the weights sum to the duration.
    const SingleCost fast = kinodynamicPenalty(linearTrajectory(Vec2(0, 0), Vec2(0, 4), 2.5), 3.0, 2.0);
    CHECK(fast.value == doctest::Approx(343.0 * 2.5).epsilon(1e-12));

    std::mt19937_64 rng(31);
    for (int rep = 0; rep < 5; ++rep) {
        const Trajectory t = randomTrajectory(rng, 3);
        const SingleCost c = kinodynamicPenalty(t, 1.0, 0.5);
        CHECK(c.value > 0.0);
        CHECK(worstCoeffError(t, c.grad, [](const Trajectory& x) { return kinodynamicPenalty(x, 1.0, 0.5).value; }) <
              1e-5);
    }
}

TEST_CASE("collision penalty") {
    const double d = 1.2;
    const Trajectory p = Trajectory::stationary(Vec2(0, 0), 2.0);
    const Trajectory q = Trajectory::stationary(Vec2(d / 2, 0), 2.0);
    const double per_node = std::pow(d * d - d * d / 4, 3);
    CHECK(collisionPenalty(p, q, d).value == doctest::Approx(2.0 * per_node).epsilon(1e-12));
    const Trajectory far = Trajectory::stationary(Vec2(5, 0), 2.0);
    CHECK(collisionPenalty(p, far, d).value == 0.0);
    CHECK(collisionSampleCount(1.0) == 64);
    CHECK(collisionSampleCount(3.0) == 96);

    const Trajectory a = mincoSolve({Vec2(0, 0)}, {Vec2(4, 0)}, {Vec2(2, 0.2)}, {1.5, 1.6});
    const Trajectory b = mincoSolve({Vec2(4, 0.3)}, {Vec2(0, 0.1)}, {Vec2(2, 0.1)}, {1.4, 1.3});
    const PairCost ab = collisionPenalty(a, b, d);
    const PairCost ba = collisionPenalty(b, a, d);
    CHECK(ab.value > 0.0);
    CHECK(ab.value == doctest::Approx(ba.value).epsilon(1e-14));
    CHECK((ab.grad_a.coeffs[0] - ba.grad_b.coeffs[0]).norm() < 1e-12);
    CHECK(worstCoeffError(a, ab.grad_a, [&](const Trajectory& x) { return collisionPenalty(x, b, d).value; }) < 1e-5);
    CHECK(worstCoeffError(b, ab.grad_b, [&](const Trajectory& x) { return collisionPenalty(a, x, d).value; }) < 1e-5);
}

TEST_CASE("topology penalty branches") {
    // a(t) = (t, 0), b(t) = (5 - t, 1): M = +2 at the key point.
    const Trajectory a = linearTrajectory(Vec2(0, 0), Vec2(1, 0), 5.0);
    const Trajectory b = linearTrajectory(Vec2(5, 1), Vec2(-1, 0), 5.0);
    const KeyPointSolution sol = closestApproach(a, b, {0.0, 5.0});
    const KeyPointSensitivity sens = keypointSensitivities(sol, a, b);
    CHECK(topologyPenalty(sol, sens, Interaction::Counterclockwise, a, b).value == 0.0);
    CHECK(topologyPenalty(sol, sens, Interaction::None, a, b).value == 0.0);
    CHECK(topologyPenalty(sol, sens, Interaction::Clockwise, a, b).value == doctest::Approx(2.0));
    CHECK(topologyPenalty(sol, sens, Interaction::Clockwise, a, b, 0.0, HingeShape::Cubic).value ==
          doctest::Approx(8.0));
    const PairCost satisfied = topologyPenalty(sol, sens, Interaction::Counterclockwise, a, b);
    CHECK(satisfied.grad_a.coeffs[0].norm() == 0.0);
    // Margin activates a satisfied pair.
    CHECK(topologyPenalty(sol, sens, Interaction::Counterclockwise, a, b, 2.5).value == doctest::Approx(0.5));
}

TEST_CASE("topology penalty gradient matches re-solved finite differences") {
    std::mt19937_64 rng(32);
    int checked = 0;
    for (int rep = 0; rep < 200 && checked < 10; ++rep) {
        const Trajectory a = randomTrajectory(rng, 3);
        const Trajectory b = randomTrajectory(rng, 2);
        const KeyPointSolution sol = closestApproach(a, b, pairWindow(a, b));
        if (sol.on_boundary || sol.f_tt < 1e-2 || std::abs(metricAtKeypoint(sol)) < 0.1) {
            continue;
        }
        const Interaction eta = metricAtKeypoint(sol) > 0 ? Interaction::Clockwise : Interaction::Counterclockwise;
        const PairCost c = topologyPenalty(sol, keypointSensitivities(sol, a, b), eta, a, b);
        auto value = [&](const Trajectory& x, const Trajectory& y) {
            const KeyPointSolution s = closestApproach(x, y, pairWindow(x, y));
            return topologyPenalty(s, keypointSensitivities(s, x, y), eta, x, y).value;
        };
        CHECK(worstCoeffError(a, c.grad_a, [&](const Trajectory& x) { return value(x, b); }) < 1e-3);
        CHECK(worstCoeffError(b, c.grad_b, [&](const Trajectory& y) { return value(a, y); }) < 1e-3);
        ++checked;
    }
    CHECK(checked == 10);
}

TEST_CASE("total objective") {
    const Scenario sc = twoVehicles(Interaction::Clockwise);
    const DecisionLayout layout = DecisionLayout::forScenario(sc);
    const auto trajs = decodeTrajectories(sc, layout, initialize(sc));
    const ObjectiveResult all = totalObjective(sc, trajs, FamilyMask{}, sc.weights);
    CHECK(all.costs.total() == doctest::Approx(all.costs.effort + all.costs.time + all.costs.kinodynamic +
                                               all.costs.collision + all.costs.topology));
    CHECK(all.costs.collision > 0.0);
    CHECK(all.gradients.size() == 2);

    const ObjectiveResult stage1 = totalObjective(sc, trajs, FamilyMask::fromStage({false, true}), sc.weights);
    CHECK(stage1.costs.collision == 0.0);
    CHECK(stage1.costs.effort == all.costs.effort);

    CHECK_THROWS_AS(totalObjective(sc, {trajs[0]}, FamilyMask{}, sc.weights), std::invalid_argument);

    // One vehicle: only per-vehicle families.
    Scenario single = sc;
    single.vehicles.resize(1);
    single.pattern = InteractionPattern{};
    const auto one = decodeTrajectories(single, DecisionLayout::forScenario(single), initialize(single));
    const ObjectiveResult r = totalObjective(single, one, FamilyMask{}, single.weights);
    CHECK(r.costs.collision == 0.0);
    CHECK(r.costs.topology == 0.0);
}

TEST_CASE("total objective is invariant under vehicle relabeling and translation") {
    const Scenario sc = loadScenario(std::string(TOPOTRAJ_FIXTURE_DIR) + "/triad3.yaml");
    const auto x = initialize(sc, {0.2, 4});
    const auto trajs = decodeTrajectories(sc, DecisionLayout::forScenario(sc), x);
    const ObjectiveResult base = totalObjective(sc, trajs, FamilyMask{}, sc.weights, {0.1});

    Scenario swapped = sc;
    std::reverse(swapped.vehicles.begin(), swapped.vehicles.end());
    std::vector<Trajectory> rev(trajs.rbegin(), trajs.rend());
    const ObjectiveResult r = totalObjective(swapped, rev, FamilyMask{}, swapped.weights, {0.1});
    CHECK(r.costs.total() == doctest::Approx(base.costs.total()).epsilon(1e-12));
    CHECK(r.costs.topology == doctest::Approx(base.costs.topology).epsilon(1e-12));

    Scenario moved = sc;
    const Vec2 d(3.0, -2.0);
    for (auto& o : moved.obstacles) {
        o.center += d;
    }
    std::vector<Trajectory> shifted;
    for (const auto& t : trajs) {
        std::vector<PieceCoeffs> pieces = t.pieces();
        for (auto& c : pieces) {
            c.row(0) += d.transpose();
        }
        shifted.emplace_back(pieces, t.durations());
    }
    const ObjectiveResult m = totalObjective(moved, shifted, FamilyMask{}, moved.weights, {0.1});
    CHECK(m.costs.effort == doctest::Approx(base.costs.effort).epsilon(1e-9));
    CHECK(m.costs.collision == doctest::Approx(base.costs.collision).epsilon(1e-9));
    CHECK(m.costs.topology == doctest::Approx(base.costs.topology).epsilon(1e-9));
    CHECK(m.costs.kinodynamic == doctest::Approx(base.costs.kinodynamic).epsilon(1e-9));
}

TEST_CASE("repeated evaluation is bit-identical") {
    const Scenario sc = loadScenario(std::string(TOPOTRAJ_FIXTURE_DIR) + "/crossing4.yaml");
    const auto trajs = decodeTrajectories(sc, DecisionLayout::forScenario(sc), initialize(sc, {0.3, 2}));
    const ObjectiveResult a = totalObjective(sc, trajs, FamilyMask{}, sc.weights);
    const ObjectiveResult b = totalObjective(sc, trajs, FamilyMask{}, sc.weights);
    CHECK(a.costs.total() == b.costs.total());
    CHECK(a.gradients[2].durations == b.gradients[2].durations);
}

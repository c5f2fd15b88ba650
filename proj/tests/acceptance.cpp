// Acceptance checks. Prints one PASS/FAIL line per criterion and exits non-zero if any fails.

#include "topotraj/costs.hpp"
#include "topotraj/gradcheck.hpp"
#include "topotraj/metrics.hpp"
#include "topotraj/minco.hpp"
#include "topotraj/scenario.hpp"
#include "topotraj/solver.hpp"
#include "topotraj/topology.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>

using namespace topotraj;

namespace {

const std::string kFixtures = TOPOTRAJ_FIXTURE_DIR;

int failures = 0;

void report(const char* name, bool pass, const std::string& detail) {
    std::printf("%s  %-28s %s\n", pass ? "PASS" : "FAIL", name, detail.c_str());
    std::fflush(stdout);
    failures += pass ? 0 : 1;
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
    char buf[256];
    std::snprintf(buf, sizeof(buf), f, a, b, c, d);
    return buf;
}

double seconds(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

Scenario withPattern(Scenario sc, Interaction eta) {
    InteractionPattern p;
    for (std::size_t i = 0; i < sc.vehicles.size(); ++i) {
        for (std::size_t j = i + 1; j < sc.vehicles.size(); ++j) {
            p.set(sc.vehicles[i].id, sc.vehicles[j].id, eta);
        }
    }
    sc.pattern = p;
    return sc;
}

Trajectory randomTrajectory(std::mt19937_64& rng, int pieces) {
    std::uniform_real_distribution<double> pos(0.0, 10.0);
    std::uniform_real_distribution<double> dur(0.5, 2.0);
    std::uniform_real_distribution<double> small(-0.5, 0.5);
    BoundaryState start{{pos(rng), pos(rng)}, {small(rng), small(rng)}, {small(rng), small(rng)}};
    BoundaryState goal{{pos(rng), pos(rng)}, Vec2::Zero(), Vec2::Zero()};
    std::vector<Vec2> wps;
    std::vector<double> durations{dur(rng)};
    for (int i = 1; i < pieces; ++i) {
        wps.emplace_back(pos(rng), pos(rng));
        durations.push_back(dur(rng));
    }
    return mincoSolve(start, goal, wps, durations);
}

Trajectory rotated(const Trajectory& t, double angle) {
    const Eigen::Matrix2d rot = Eigen::Rotation2Dd(angle).toRotationMatrix();
    std::vector<PieceCoeffs> pieces;
    for (int i = 0; i < t.pieceCount(); ++i) {
        pieces.push_back(t.coeffs(i) * rot.transpose());
    }
    return Trajectory(pieces, t.durations());
}

// Gradient exactness on the 2- and 3-vehicle fixtures.
void gradientExactness() {
    const auto start = std::chrono::steady_clock::now();
    double worst = 0.0;
    int resampled = 0;
    for (const char* f : {"headon2.yaml", "triad3.yaml", "corridor3.yaml"}) {
        GradcheckOptions opts;
        opts.samples = 20;
        opts.seed = 7;
        const GradcheckReport rep = gradcheck(loadScenario(kFixtures + "/" + f), opts);
        worst = std::max(worst, rep.worst());
        resampled += rep.resampled;
    }
    const double elapsed = seconds(start);
    report("gradient-exactness", worst < 1e-4 && elapsed < 60.0,
           fmt("worst relative error %.3e (< 1e-4), %.1f s (< 60 s), resampled %.0f", worst, elapsed, resampled));
}

// Key-point time sensitivities against finite-difference re-solves.
void bilevelSensitivity() {
    std::mt19937_64 rng(11);
    constexpr double h = 1e-6;
    int accepted = 0;
    int attempts = 0;
    double worst = 0.0;
    while (accepted < 60 && attempts < 2000) {
        ++attempts;
        const Trajectory a = randomTrajectory(rng, 3);
        const Trajectory b = randomTrajectory(rng, 2 + attempts % 3);
        const TimeWindow w = pairWindow(a, b);
        const KeyPointSolution sol = closestApproach(a, b, w);
        if (sol.on_boundary || sol.f_tt < 1e-2) {
            continue;
        }
        const KeyPointSensitivity sens = keypointSensitivities(sol, a, b);

        bool degenerate = false;
        double diff = 0.0;
        double scale = 0.0;
        auto probe = [&](const Trajectory& base, bool first, const CoeffGradient& analytic) {
            const int m = base.pieceCount();
            for (int i = 0; i < m && !degenerate; ++i) {
                for (int k = 0; k < 13 && !degenerate; ++k) {
                    auto perturbed = [&](double delta) {
                        std::vector<PieceCoeffs> pieces;
                        for (int p = 0; p < m; ++p) {
                            pieces.push_back(base.coeffs(p));
                        }
                        std::vector<double> durs = base.durations();
                        if (k < 12) {
                            pieces[i](k / 2, k % 2) += delta;
                        } else {
                            durs[i] += delta;
                        }
                        const Trajectory t(pieces, durs);
                        const Trajectory& ta = first ? t : a;
                        const Trajectory& tb = first ? b : t;
                        return closestApproach(ta, tb, pairWindow(ta, tb));
                    };
                    const KeyPointSolution plus = perturbed(h);
                    const KeyPointSolution minus = perturbed(-h);
                    if (plus.on_boundary || minus.on_boundary ||
                        std::abs(plus.t_star - sol.t_star) > 1e-3 || std::abs(minus.t_star - sol.t_star) > 1e-3) {
                        degenerate = true;
                        break;
                    }
                    const double fd = (plus.t_star - minus.t_star) / (2 * h);
                    const double an = k < 12 ? analytic.coeffs[i](k / 2, k % 2) : analytic.durations(i);
                    diff = std::max(diff, std::abs(fd - an));
                    scale = std::max(scale, std::abs(fd));
                }
            }
        };
        probe(a, true, sens.a);
        probe(b, false, sens.b);
        if (degenerate || scale < 1e-8) {
            continue;
        }
        worst = std::max(worst, diff / scale);
        ++accepted;
    }
    report("bilevel-sensitivity", accepted >= 50 && worst < 1e-3,
           fmt("%.0f pairs (>= 50), worst relative error %.3e (< 1e-3)", accepted, worst));
}

// All-clockwise and all-counterclockwise patterns from one initial vector.
void controllableInteraction() {
    const Scenario base = loadScenario(kFixtures + "/crossing4.yaml");
    const Scenario cw = withPattern(base, Interaction::Clockwise);
    const Scenario ccw = withPattern(base, Interaction::Counterclockwise);
    const Eigen::VectorXd x0 = initialize(base);
    const OptimizationResult rcw = twoStageOptimize(cw, {}, &x0);
    const OptimizationResult rccw = twoStageOptimize(ccw, {}, &x0);
    bool ok = true;
    double min_dist = 1e9;
    double max_speed = 0.0;
    for (const auto* r : {&rcw, &rccw}) {
        ok = ok && r->report.all_satisfied;
        min_dist = std::min(min_dist, minPairwiseDistance(r->trajectories));
        max_speed = std::max(max_speed, r->report.audit.max_speed);
    }
    bool opposite = rcw.report.pairs.size() == rccw.report.pairs.size();
    for (std::size_t i = 0; opposite && i < rcw.report.pairs.size(); ++i) {
        opposite = rcw.report.pairs[i].metric < 0.0 && rccw.report.pairs[i].metric > 0.0;
    }
    const double d_safe = base.weights.safe_distance;
    report("controllable-interaction", ok && opposite && min_dist >= 0.99 * d_safe && max_speed <= 3.03,
           std::string("flags ") + (ok ? "all true" : "NOT all true") + ", M signs " +
               (opposite ? "opposite" : "NOT opposite") +
               fmt(", min distance %.4f (>= %.4f), max speed %.4f (<= 3.03)", min_dist, 0.99 * d_safe, max_speed));
}

// Sign of the key-point metric against the local winding direction.
void oracleAgreement() {
    std::mt19937_64 rng(23);
    int checked = 0;
    int agree = 0;
    int attempts = 0;
    while (checked < 100 && attempts < 1000) {
        ++attempts;
        const Trajectory a = randomTrajectory(rng, 1 + attempts % 4);
        const Trajectory b = randomTrajectory(rng, 1 + (attempts / 4) % 4);
        const TimeWindow w = pairWindow(a, b);
        const KeyPointSolution sol = closestApproach(a, b, w);
        const double m = metricAtKeypoint(sol);
        if (std::abs(m) <= 1e-3 || sol.f_value < 1e-6) {
            continue;
        }
        // Unwrapped polar angle of the relative position around the key point.
        const double eps = 1e-3 * (w.hi - w.lo);
        const double lo = std::max(w.lo, sol.t_star - eps);
        const double hi = std::min(w.hi, sol.t_star + eps);
        double angle = 0.0;
        Vec2 prev = a.eval(lo).position - b.eval(lo).position;
        for (int k = 1; k <= 200; ++k) {
            const double t = lo + (hi - lo) * k / 200.0;
            const Vec2 r = a.eval(t).position - b.eval(t).position;
            angle += std::atan2(prev.x() * r.y() - prev.y() * r.x(), prev.dot(r));
            prev = r;
        }
        const Interaction expected = angle > 0.0 ? Interaction::Counterclockwise : Interaction::Clockwise;
        ++checked;
        agree += classifyInteraction(a, b, w) == expected ? 1 : 0;
    }
    report("topology-oracle-agreement", checked == 100 && agree == checked,
           fmt("%.0f/%.0f pairs agree (100%% required)", agree, checked));
}

// Wrong-side head-on initialization, 50 seeds.
void twoStageEscape() {
    const Scenario sc = loadScenario(kFixtures + "/headon2.yaml");
    int success = 0;
    for (int seed = 1; seed <= 50; ++seed) {
        const Eigen::VectorXd x0 = initialize(sc, InitOptions{0.3, static_cast<std::uint64_t>(seed)});
        success += twoStageOptimize(sc, {}, &x0).report.success ? 1 : 0;
    }
    report("two-stage-escape", success >= 45, fmt("%.0f/50 seeds succeed (>= 90%%)", success));
}

double crossingTime(const Trajectory& t, double x_wall) {
    const int n = 4000;
    const double total = t.totalDuration();
    double prev = 0.0;
    for (int k = 1; k <= n; ++k) {
        const double tk = total * k / n;
        if (t.eval(tk).position.x() >= x_wall) {
            double lo = prev;
            double hi = tk;
            for (int it = 0; it < 60; ++it) {
                const double mid = 0.5 * (lo + hi);
                (t.eval(mid).position.x() >= x_wall ? hi : lo) = mid;
            }
            return hi;
        }
        prev = tk;
    }
    return std::nan("");
}

// Sequential corridor passage; the order flips with the pattern.
void corridorOrdering() {
    const Scenario base = loadScenario(kFixtures + "/corridor3.yaml");
    auto order = [&](Interaction eta, bool& ok, std::vector<double>& times) {
        const Scenario sc = withPattern(base, eta);
        const OptimizationResult r = twoStageOptimize(sc, {});
        ok = r.report.success && r.report.audit.distance_ok;
        times.clear();
        for (const auto& t : r.trajectories) {
            times.push_back(crossingTime(t, 5.0));
        }
        std::vector<int> idx(times.size());
        for (std::size_t i = 0; i < idx.size(); ++i) {
            idx[i] = static_cast<int>(i);
        }
        std::sort(idx.begin(), idx.end(), [&](int i, int j) { return times[i] < times[j]; });
        for (std::size_t i = 1; i < idx.size(); ++i) {
            ok = ok && times[idx[i]] > times[idx[i - 1]];
        }
        return idx;
    };
    bool ok_ccw = false;
    bool ok_cw = false;
    std::vector<double> t_ccw;
    std::vector<double> t_cw;
    const auto o_ccw = order(Interaction::Counterclockwise, ok_ccw, t_ccw);
    auto o_cw = order(Interaction::Clockwise, ok_cw, t_cw);
    std::reverse(o_cw.begin(), o_cw.end());
    std::string seq;
    for (int i : o_ccw) {
        seq += base.vehicles[i].id + " ";
    }
    report("corridor-ordering", ok_ccw && ok_cw && o_ccw == o_cw,
           "ccw order " + seq + fmt("(%.2f %.2f %.2f s), ", t_ccw[o_ccw[0]], t_ccw[o_ccw[1]], t_ccw[o_ccw[2]]) +
               (o_ccw == o_cw ? "reversed under cw" : "NOT reversed under cw") +
               (ok_ccw && ok_cw ? ", both collision-free" : ", collision or ordering failure"));
}

void performanceEnvelope() {
    auto timed = [](const char* file) {
        const Scenario sc = loadScenario(kFixtures + "/" + file);
        const auto start = std::chrono::steady_clock::now();
        const OptimizationResult r = twoStageOptimize(sc);
        return std::make_pair(seconds(start), r.report.success);
    };
    const auto [t4, ok4] = timed("crossing4.yaml");
    const auto [t8, ok8] = timed("ring8.yaml");
    report("performance-envelope", ok4 && ok8 && t4 < 2.0 && t8 < 8.0,
           fmt("4 vehicles %.3f s (< 2 s), 8 vehicles %.3f s (< 8 s)", t4, t8) +
               (ok4 && ok8 ? ", both succeed" : ", optimization failed"));
}

void metricIdentities() {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-10.0, 10.0);
    const Eigen::Matrix2d& rot = rotationForm();
    double worst_skew = 0.0;
    bool symmetric = true;
    double worst_rotation = 0.0;
    for (int k = 0; k < 1000000; ++k) {
        const Vec2 v(u(rng), u(rng));
        worst_skew = std::max(worst_skew, std::abs(v.dot(rot * v)));
        if (k % 1000 == 0) {
            const Vec2 r(u(rng), u(rng));
            symmetric = symmetric && homotopyMetric(r, v) == homotopyMetric(-r, -v);
            const Eigen::Matrix2d q = Eigen::Rotation2Dd(u(rng)).toRotationMatrix();
            worst_rotation = std::max(worst_rotation, std::abs(homotopyMetric(q * r, q * v) - homotopyMetric(r, v)));
        }
    }
    for (int k = 0; k < 200; ++k) {
        const Trajectory a = randomTrajectory(rng, 3);
        const Trajectory b = randomTrajectory(rng, 4);
        const double m_ab = metricAtKeypoint(closestApproach(a, b, pairWindow(a, b)));
        const double m_ba = metricAtKeypoint(closestApproach(b, a, pairWindow(b, a)));
        symmetric = symmetric && m_ab == m_ba;
        const double angle = u(rng);
        const Trajectory ra = rotated(a, angle);
        const Trajectory rb = rotated(b, angle);
        const double m_rot = metricAtKeypoint(closestApproach(ra, rb, pairWindow(ra, rb)));
        worst_rotation = std::max(worst_rotation, std::abs(m_rot - m_ab));
    }
    report("metric-identities", worst_skew <= 1e-12 && symmetric && worst_rotation <= 1e-9,
           fmt("max |v'Bv| %.1e (<= 1e-12), rotation drift %.1e (<= 1e-9), pair symmetry ", worst_skew,
               worst_rotation) +
               (symmetric ? "exact" : "BROKEN"));
}

void mincoCorrectness() {
    const BoundaryState s0{Vec2::Zero(), Vec2::Zero(), Vec2::Zero()};
    const BoundaryState s1{Vec2(1.0, 0.0), Vec2::Zero(), Vec2::Zero()};
    const Trajectory unit = mincoSolve(s0, s1, {}, {1.0});
    double jerk_err = 0.0;
    for (int k = 0; k <= 1000; ++k) {
        const double t = k / 1000.0;
        const double ref = 10 * std::pow(t, 3) - 15 * std::pow(t, 4) + 6 * std::pow(t, 5);
        jerk_err = std::max(jerk_err, std::abs(unit.eval(t).position.x() - ref));
    }

    std::mt19937_64 rng(3);
    double residual = 0.0;
    double effort_err = 0.0;
    for (int inst = 0; inst < 200; ++inst) {
        const Trajectory t = randomTrajectory(rng, 2 + inst % 6);
        for (int i = 0; i + 1 < t.pieceCount(); ++i) {
            for (int order = 0; order <= 4; ++order) {
                const Vec2 left = t.coeffs(i).transpose() * evalBasis(t.duration(i), order);
                const Vec2 right = t.coeffs(i + 1).transpose() * evalBasis(0.0, order);
                residual = std::max(residual, (left - right).lpNorm<Eigen::Infinity>());
            }
        }
        // Composite Simpson on each piece.
        double quad = 0.0;
        for (int i = 0; i < t.pieceCount(); ++i) {
            const int n = 1024;
            const double hstep = t.duration(i) / n;
            for (int k = 0; k <= n; ++k) {
                const Vec2 jerk = t.coeffs(i).transpose() * evalBasis(k * hstep, 3);
                const double w = (k == 0 || k == n) ? 1.0 : (k % 2 ? 4.0 : 2.0);
                quad += w * hstep / 3.0 * jerk.squaredNorm();
            }
        }
        effort_err = std::max(effort_err, std::abs(jerkEnergy(t) - quad) / quad);
    }
    report("minco-correctness", jerk_err <= 1e-8 && residual < 1e-8 && effort_err <= 1e-6,
           fmt("min-jerk error %.1e (<= 1e-8), C4 residual %.1e (< 1e-8), effort relative error %.1e (<= 1e-6)",
               jerk_err, residual, effort_err));
}

}  // namespace

int main() {
    const std::vector<std::function<void()>> checks{gradientExactness,  bilevelSensitivity, controllableInteraction,
                                                     oracleAgreement,    twoStageEscape,     corridorOrdering,
                                                     performanceEnvelope, metricIdentities,  mincoCorrectness};
    for (const auto& check : checks) {
        try {
            check();
        } catch (const std::exception& e) {
            report("exception", false, e.what());
        }
    }
    std::printf("%s: %d failing criteria\n", failures ? "FAILED" : "OK", failures);
    return failures ? 1 : 0;
}

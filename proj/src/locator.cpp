#include "ipsim/locator.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

#include "textio.hpp"

namespace ipsim {

Vec2 AnchorLayout::anchor(int id) const {
    switch (id) {
        case 1: return {0.0, 0.0};
        case 2: return {a2_x, 0.0};
        case 3: return {0.0, a3_y};
        default: throw std::invalid_argument("anchor id must be 1, 2 or 3");
    }
}

void validate(const AnchorLayout& layout) {
    if (!std::isfinite(layout.a2_x) || layout.a2_x <= 0.0 || !std::isfinite(layout.a3_y) ||
        layout.a3_y <= 0.0) {
        throw std::invalid_argument("anchor layout needs a2_x > 0 and a3_y > 0");
    }
}

void validate(const DistanceVector& d) {
    for (double v : {d.d1, d.d2, d.d3}) {
        if (!std::isfinite(v) || v <= 0.0) {
            throw std::invalid_argument("distance vector entries must be positive and finite");
        }
    }
}

bool in_arena(Vec2 p, const AnchorLayout& layout) {
    return p.x >= 0.0 && p.x <= layout.a2_x && p.y >= 0.0 && p.y <= layout.a3_y;
}

Position trilaterate(const DistanceVector& d, const AnchorLayout& layout) {
    validate(layout);
    validate(d);
    const double x2 = layout.a2_x;
    const double y3 = layout.a3_y;
    const double x = (x2 * x2 + d.d1 * d.d1 - d.d2 * d.d2) / (2.0 * x2);
    const double y = (y3 * y3 + d.d1 * d.d1 - d.d3 * d.d3) / (2.0 * y3);
    return Position{x, y, !in_arena({x, y}, layout)};
}

double residual(const DistanceVector& d, const AnchorLayout& layout, const Position& p) {
    validate(layout);
    const Vec2 point{p.x, p.y};
    double sum = 0.0;
    const double ranges[3] = {d.d1, d.d2, d.d3};
    for (int i = 0; i < 3; ++i) {
        const double err = distance(point, layout.anchor(i + 1)) - ranges[i];
        sum += err * err;
    }
    return std::sqrt(sum / 3.0);
}

namespace {

double sum_squared_residuals(const std::vector<RangeMeasurement>& ms, Vec2 p) {
    double ssr = 0.0;
    for (const RangeMeasurement& m : ms) {
        const double err = distance(p, m.anchor) - m.range;
        ssr += err * err;
    }
    return ssr;
}

void check_anchors(const std::vector<RangeMeasurement>& ms) {
    if (ms.size() < 3) {
        throw std::invalid_argument("multilateration needs at least 3 anchors");
    }
    // Non-collinearity: some triangle spanned by the anchors has real area.
    double scale = 0.0;
    for (std::size_t i = 1; i < ms.size(); ++i) {
        scale = std::max(scale, norm(ms[i].anchor - ms[0].anchor));
    }
    for (std::size_t i = 1; i < ms.size(); ++i) {
        for (std::size_t j = i + 1; j < ms.size(); ++j) {
            const Vec2 u = ms[i].anchor - ms[0].anchor;
            const Vec2 v = ms[j].anchor - ms[0].anchor;
            if (std::abs(u.x * v.y - u.y * v.x) > 1e-12 * scale * scale) return;
        }
    }
    throw std::invalid_argument("multilateration anchors are collinear");
}

}  // namespace

LsFix multilaterate_ls(const std::vector<RangeMeasurement>& measurements, Position initial) {
    check_anchors(measurements);
    const std::size_t n = measurements.size();

    Vec2 p{initial.x, initial.y};
    double ssr = sum_squared_residuals(measurements, p);
    double damping = 1e-3;

    LsFix fix;
    for (int iter = 1; iter <= kLsMaxIterations; ++iter) {
        fix.iterations = iter;

        // Normal equations for residuals r_i = |p - a_i| - d_i with
        // Jacobian rows (p - a_i) / |p - a_i|.
        double jtj00 = 0.0, jtj01 = 0.0, jtj11 = 0.0;
        double jtr0 = 0.0, jtr1 = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const Vec2 delta = p - measurements[i].anchor;
            const double dist = std::max(norm(delta), 1e-12);
            const double r = dist - measurements[i].range;
            const double jx = delta.x / dist;
            const double jy = delta.y / dist;
            jtj00 += jx * jx;
            jtj01 += jx * jy;
            jtj11 += jy * jy;
            jtr0 += jx * r;
            jtr1 += jy * r;
        }

        // Damped solve: (J^T J + mu I) step = -J^T r.
        const double a00 = jtj00 + damping;
        const double a11 = jtj11 + damping;
        const double det = a00 * a11 - jtj01 * jtj01;
        if (det == 0.0) {
            damping *= 4.0;
            continue;
        }
        const double step_x = (-jtr0 * a11 + jtr1 * jtj01) / det;
        const double step_y = (-jtr1 * a00 + jtr0 * jtj01) / det;

        const Vec2 candidate{p.x + step_x, p.y + step_y};
        const double candidate_ssr = sum_squared_residuals(measurements, candidate);
        if (candidate_ssr <= ssr) {
            p = candidate;
            ssr = candidate_ssr;
            damping = std::max(damping * 0.5, 1e-12);
            if (std::hypot(step_x, step_y) < kLsStepTolerance) {
                fix.converged = true;
                break;
            }
        } else {
            damping *= 4.0;
            if (damping > 1e12) break;  // stuck; report best iterate
        }
    }

    fix.position = Position{p.x, p.y, false};
    fix.rms_residual = std::sqrt(ssr / static_cast<double>(n));
    return fix;
}

LsFix multilaterate_ls(const std::vector<RangeMeasurement>& measurements) {
    check_anchors(measurements);
    // Closed-form seed from the first three anchors, translated so the
    // first anchor plays the role of the origin.
    const Vec2 origin = measurements[0].anchor;
    const Vec2 e2 = measurements[1].anchor - origin;
    const Vec2 e3 = measurements[2].anchor - origin;
    const double d1 = measurements[0].range;
    const double d2 = measurements[1].range;
    const double d3 = measurements[2].range;
    Vec2 seed;
    if (std::abs(e2.y) < 1e-12 && std::abs(e3.x) < 1e-12 && e2.x > 0.0 && e3.y > 0.0) {
        seed.x = (e2.x * e2.x + d1 * d1 - d2 * d2) / (2.0 * e2.x);
        seed.y = (e3.y * e3.y + d1 * d1 - d3 * d3) / (2.0 * e3.y);
    } else {
        // General two-circle subtraction for arbitrary anchor placement.
        const double b2 = 0.5 * (d1 * d1 - d2 * d2 + e2.x * e2.x + e2.y * e2.y);
        const double b3 = 0.5 * (d1 * d1 - d3 * d3 + e3.x * e3.x + e3.y * e3.y);
        const double det = e2.x * e3.y - e2.y * e3.x;
        if (det == 0.0) {
            throw std::invalid_argument("first three anchors are collinear");
        }
        seed.x = (b2 * e3.y - b3 * e2.y) / det;
        seed.y = (e2.x * b3 - e3.x * b2) / det;
    }
    return multilaterate_ls(measurements, Position{origin.x + seed.x, origin.y + seed.y, false});
}

double separation(const Position& a, const Position& b) {
    return std::hypot(a.x - b.x, a.y - b.y);
}

void write_positions_csv(std::ostream& out, const std::vector<PositionRecord>& records) {
    out << "timestamp,agent_id,x,y,out_of_bounds\n";
    for (const PositionRecord& r : records) {
        out << textio::format_double(r.timestamp) << ',' << to_string(r.agent) << ','
            << textio::format_double(r.position.x) << ',' << textio::format_double(r.position.y)
            << ',' << (r.position.out_of_bounds ? 1 : 0) << '\n';
    }
}

}  // namespace ipsim

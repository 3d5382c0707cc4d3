#include "nltf/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace nltf {

namespace {

double cross(const std::vector<double>& o, const std::vector<double>& a, const std::vector<double>& b) {
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
}

// Andrew monotone chain; collinear points dropped so vertices are extreme.
std::vector<std::vector<double>> convex_hull_2d(std::vector<std::vector<double>> pts) {
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    std::size_t n = pts.size();
    if (n <= 2) return pts;
    std::vector<std::vector<double>> hull(2 * n);
    std::size_t k = 0;
    for (std::size_t i = 0; i < n; ++i) {
        while (k >= 2 && cross(hull[k - 2], hull[k - 1], pts[i]) <= 1e-14) --k;
        hull[k++] = pts[i];
    }
    std::size_t lower = k + 1;
    for (std::size_t i = n - 1; i-- > 0;) {
        while (k >= lower && cross(hull[k - 2], hull[k - 1], pts[i]) <= 1e-14) --k;
        hull[k++] = pts[i];
    }
    hull.resize(k - 1); // last point repeats the first
    return hull;
}

double point_segment_distance(std::span<const double> z, const std::vector<double>& a,
                              const std::vector<double>& b) {
    double abx = b[0] - a[0], aby = b[1] - a[1];
    double apx = z[0] - a[0], apy = z[1] - a[1];
    double len2 = abx * abx + aby * aby;
    double t = len2 > 0.0 ? std::clamp((apx * abx + apy * aby) / len2, 0.0, 1.0) : 0.0;
    double dx = apx - t * abx, dy = apy - t * aby;
    return std::sqrt(dx * dx + dy * dy);
}

} // namespace

RotationSet rotation_set(const Depth1Family& fam, const Caps& caps) {
    int d = fam.dim();
    if (d != 1 && d != 2)
        fail_config("rotation set supports dimension 1 or 2, got " + std::to_string(d));
    CycleSet cycles = simple_cycles(fam.block.sys, 1, caps);
    std::vector<std::vector<double>> means;
    means.reserve(cycles.cycles.size());
    for (const Word& cyc : cycles.cycles) {
        std::vector<double> mean(d, 0.0);
        for (Symbol s : cyc)
            for (int c = 0; c < d; ++c) mean[c] += fam.values[c][s];
        for (int c = 0; c < d; ++c) mean[c] /= static_cast<double>(cyc.size());
        means.push_back(std::move(mean));
    }
    RotationSet rs;
    rs.dim = d;
    if (d == 1) {
        rs.kind = RotationSet::Kind::Interval;
        rs.lo = means[0][0];
        rs.hi = means[0][0];
        for (const auto& m : means) {
            rs.lo = std::min(rs.lo, m[0]);
            rs.hi = std::max(rs.hi, m[0]);
        }
        return rs;
    }
    std::vector<std::vector<double>> hull = convex_hull_2d(means);
    rs.vertices = std::move(hull);
    if (rs.vertices.size() == 1) {
        rs.kind = RotationSet::Kind::Point;
    } else if (rs.vertices.size() == 2) {
        rs.kind = RotationSet::Kind::Segment;
    } else {
        rs.kind = RotationSet::Kind::Polygon;
    }
    return rs;
}

double hull_gap(const RotationSet& rs, std::span<const double> z) {
    if (static_cast<int>(z.size()) != rs.dim) fail_config("rotation set point dimension mismatch");
    if (rs.dim == 1) {
        double gap = 0.0;
        if (z[0] < rs.lo) gap = rs.lo - z[0];
        if (z[0] > rs.hi) gap = std::max(gap, z[0] - rs.hi);
        return gap;
    }
    switch (rs.kind) {
        case RotationSet::Kind::Point: {
            double dx = z[0] - rs.vertices[0][0], dy = z[1] - rs.vertices[0][1];
            return std::sqrt(dx * dx + dy * dy);
        }
        case RotationSet::Kind::Segment:
            return point_segment_distance(z, rs.vertices[0], rs.vertices[1]);
        default: {
            // inside a CCW polygon iff z is left of every edge; the gap is the
            // distance to the polygon when outside
            std::size_t n = rs.vertices.size();
            bool inside = true;
            for (std::size_t i = 0; i < n && inside; ++i) {
                const auto& a = rs.vertices[i];
                const auto& b = rs.vertices[(i + 1) % n];
                double c = (b[0] - a[0]) * (z[1] - a[1]) - (b[1] - a[1]) * (z[0] - a[0]);
                inside = c >= -1e-15;
            }
            if (inside) return 0.0;
            double best = point_segment_distance(z, rs.vertices[n - 1], rs.vertices[0]);
            for (std::size_t i = 0; i + 1 < n; ++i)
                best = std::min(best, point_segment_distance(z, rs.vertices[i], rs.vertices[i + 1]));
            return best;
        }
    }
}

bool hull_contains(const RotationSet& rs, std::span<const double> z, double tol) {
    return hull_gap(rs, z) <= tol;
}

double interior_margin(const RotationSet& rs, std::span<const double> z) {
    if (static_cast<int>(z.size()) != rs.dim) fail_config("rotation set point dimension mismatch");
    if (rs.dim == 1) return std::min(z[0] - rs.lo, rs.hi - z[0]);
    switch (rs.kind) {
        case RotationSet::Kind::Point:
        case RotationSet::Kind::Segment: {
            double gap = hull_gap(rs, z);
            return gap > 0.0 ? -gap : 0.0; // degenerate sets have empty interior
        }
        default: {
            std::size_t n = rs.vertices.size();
            double margin = std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < n; ++i) {
                const auto& a = rs.vertices[i];
                const auto& b = rs.vertices[(i + 1) % n];
                double ex = b[0] - a[0], ey = b[1] - a[1];
                double len = std::sqrt(ex * ex + ey * ey);
                double c = (ex * (z[1] - a[1]) - ey * (z[0] - a[0])) / len;
                margin = std::min(margin, c);
            }
            return margin;
        }
    }
}

namespace {

struct SmallMatrix { // d x d, d <= 2
    int d;
    double a[4];
    static SmallMatrix identity(int d) {
        SmallMatrix m{d, {0, 0, 0, 0}};
        for (int i = 0; i < d; ++i) m.a[i * d + i] = 1.0;
        return m;
    }
    std::vector<double> apply(const std::vector<double>& v) const {
        std::vector<double> out(d, 0.0);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) out[i] += a[i * d + j] * v[j];
        return out;
    }
};

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm2(const std::vector<double>& a) { return std::sqrt(dot(a, a)); }

} // namespace

SpectrumPoint entropy_at(const Depth1Family& fam, const RotationSet& rs, std::span<const double> z,
                         const SolveOptions& opts) {
    int d = fam.dim();
    if (static_cast<int>(z.size()) != d) fail_config("entropy_at point dimension mismatch");
    double gap = hull_gap(rs, z);
    if (gap > 1e-9)
        fail_domain("point is outside the rotation set by " + std::to_string(gap));

    SpectrumPoint out;
    out.z.assign(z.begin(), z.end());

    std::vector<double> q(d, 0.0);
    if (static_cast<int>(opts.warm_q.size()) == d) q = opts.warm_q;

    auto objective = [&](const std::vector<double>& qq) {
        double val = pressure_value(fam, qq);
        for (int i = 0; i < d; ++i) val -= qq[i] * z[i];
        return val;
    };
    auto gradient = [&](const std::vector<double>& qq) {
        std::vector<double> g = pressure_gradient(fam, qq);
        for (int i = 0; i < d; ++i) g[i] -= z[i];
        return g;
    };

    double G = objective(q);
    std::vector<double> g = gradient(q);
    double best_G = G;
    std::vector<double> best_q = q;
    SmallMatrix H = SmallMatrix::identity(d);
    bool converged = norm2(g) <= opts.grad_tol;
    bool hit_qmax = norm2(q) >= opts.q_max;

    for (int it = 0; it < opts.max_iter && !converged && !hit_qmax; ++it) {
        std::vector<double> dir = H.apply(g);
        for (double& v : dir) v = -v;
        double slope = dot(g, dir);
        if (!(slope < 0.0)) { // reset on a non-descent direction
            H = SmallMatrix::identity(d);
            for (int i = 0; i < d; ++i) dir[i] = -g[i];
            slope = dot(g, dir);
        }
        // keep trial points inside a bounded dual region; unbounded descent
        // directions (z at the boundary of the rotation set) otherwise jump
        // to overflow territory within one step
        double t = 1.0;
        double dir_norm = norm2(dir);
        double reach = opts.q_max + 10.0 - norm2(q);
        if (dir_norm * t > reach) t = reach / dir_norm;
        std::vector<double> qn(d);
        double Gn = 0.0;
        bool ok = false;
        for (int ls = 0; ls < 40; ++ls) {
            for (int i = 0; i < d; ++i) qn[i] = q[i] + t * dir[i];
            Gn = objective(qn);
            if (Gn <= G + 1e-4 * t * slope) {
                ok = true;
                break;
            }
            t *= 0.5;
        }
        if (!ok) break; // gradient noise floor reached
        std::vector<double> gn = gradient(qn);
        // BFGS update of the inverse Hessian approximation
        std::vector<double> s(d), y(d);
        for (int i = 0; i < d; ++i) {
            s[i] = qn[i] - q[i];
            y[i] = gn[i] - g[i];
        }
        double sy = dot(s, y);
        if (sy > 1e-12 * norm2(s) * norm2(y)) {
            std::vector<double> Hy = H.apply(y);
            double yHy = dot(y, Hy);
            double rho = 1.0 / sy;
            SmallMatrix Hn = H;
            for (int i = 0; i < d; ++i)
                for (int j = 0; j < d; ++j) {
                    double v = H.a[i * d + j];
                    v -= rho * (s[i] * Hy[j] + Hy[i] * s[j]);
                    v += rho * rho * (sy + yHy) * s[i] * s[j];
                    Hn.a[i * d + j] = v;
                }
            H = Hn;
        }
        q = qn;
        G = Gn;
        g = gn;
        if (G < best_G) {
            best_G = G;
            best_q = q;
        }
        converged = norm2(g) <= opts.grad_tol;
        hit_qmax = norm2(q) >= opts.q_max;
    }
    if (G < best_G) {
        best_G = G;
        best_q = q;
    }
    out.q = best_q;
    out.converged = converged;
    double h = best_G;
    if (h < 0.0 && h > -1e-9) h = 0.0;
    out.h = h;
    out.boundary_flag = !converged || hit_qmax || interior_margin(rs, z) <= 1e-6;
    return out;
}

std::vector<SpectrumPoint> spectrum_grid(const Depth1Family& fam, const RotationSet& rs, int resolution,
                                         const SolveOptions& opts) {
    if (resolution < 2) fail_config("grid resolution must be >= 2");
    std::vector<std::vector<double>> points;
    if (rs.dim == 1) {
        points.reserve(resolution);
        for (int i = 0; i < resolution; ++i) {
            double t = static_cast<double>(i) / (resolution - 1);
            points.push_back({rs.lo + t * (rs.hi - rs.lo)});
        }
    } else {
        switch (rs.kind) {
            case RotationSet::Kind::Point: points.push_back(rs.vertices[0]); break;
            case RotationSet::Kind::Segment: {
                const auto& a = rs.vertices[0];
                const auto& b = rs.vertices[1];
                for (int i = 0; i < resolution; ++i) {
                    double t = static_cast<double>(i) / (resolution - 1);
                    points.push_back({a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])});
                }
                break;
            }
            default: {
                double x0 = rs.vertices[0][0], x1 = x0, y0 = rs.vertices[0][1], y1 = y0;
                for (const auto& v : rs.vertices) {
                    x0 = std::min(x0, v[0]);
                    x1 = std::max(x1, v[0]);
                    y0 = std::min(y0, v[1]);
                    y1 = std::max(y1, v[1]);
                }
                for (int iy = 0; iy < resolution; ++iy)
                    for (int ix = 0; ix < resolution; ++ix) {
                        double tx = static_cast<double>(ix) / (resolution - 1);
                        double ty = static_cast<double>(iy) / (resolution - 1);
                        std::vector<double> p{x0 + tx * (x1 - x0), y0 + ty * (y1 - y0)};
                        if (hull_contains(rs, p)) points.push_back(std::move(p));
                    }
            }
        }
    }

    std::size_t n = points.size();
    std::vector<SpectrumPoint> out(n);
    if (n == 0) return out;

    // Serial anchor sweep with sequential warm starts, then an independent
    // (parallelizable) fill seeded from the preceding anchor. Results are
    // identical for any thread count.
    std::size_t stride = std::max<std::size_t>(1, n / 32);
    std::vector<std::size_t> anchors;
    for (std::size_t i = 0; i < n; i += stride) anchors.push_back(i);
    SolveOptions anchor_opts = opts;
    for (std::size_t a : anchors) {
        out[a] = entropy_at(fam, rs, points[a], anchor_opts);
        if (out[a].converged) anchor_opts.warm_q = out[a].q;
    }

    std::exception_ptr first_error = nullptr;
#ifdef NLTF_HAVE_OPENMP
#pragma omp parallel for schedule(dynamic, 8)
#endif
    for (long long ii = 0; ii < static_cast<long long>(n); ++ii) {
        std::size_t i = static_cast<std::size_t>(ii);
        if (i % stride == 0) continue; // anchor already solved
        try {
            SolveOptions o = opts;
            const SpectrumPoint& anchor = out[(i / stride) * stride];
            if (anchor.converged) o.warm_q = anchor.q;
            out[i] = entropy_at(fam, rs, points[i], o);
        } catch (...) {
#ifdef NLTF_HAVE_OPENMP
#pragma omp critical
#endif
            {
                if (!first_error) first_error = std::current_exception();
            }
        }
    }
    if (first_error) std::rethrow_exception(first_error);
    return out;
}

} // namespace nltf

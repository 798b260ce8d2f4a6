#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <vector>

#include "model.hpp"

namespace lossnet {

/// Solution of a reward LP together with its dual certificate. `alpha[i][j]`
/// is the admitted fraction of class i routed to its j-th allocation;
/// single-resource solutions have one entry per class. `dual_u` prices the
/// resources, `dual_v` prices the per-class admission caps.
struct LpSolution {
    std::vector<std::vector<double>> alpha;
    double value = 0.0;
    std::vector<double> dual_u;
    std::vector<double> dual_v;
    std::vector<size_t> saturated;  // classes whose admission cap binds

    double class_total(size_t i) const {
        double s = 0.0;
        for (double a : alpha[i]) s += a;
        return s;
    }

    /// Dual objective for per-class caps `caps` and resource limits `limits`
    /// (already shrunk); equals `value` at optimality.
    double dual_value(const std::vector<double>& limits, const std::vector<double>& caps) const {
        double d = 0.0;
        for (size_t k = 0; k < dual_u.size(); ++k)
            if (std::isfinite(limits[k])) d += dual_u[k] * limits[k];
        for (size_t i = 0; i < dual_v.size(); ++i) d += dual_v[i] * caps[i];
        return d;
    }
};

/// Per-class admission cap for a planning horizon: the fraction of load a
/// request admitted before `horizon` still contributes at the horizon.
inline std::vector<double> horizon_caps(const Scenario& sc, double horizon) {
    std::vector<double> caps(sc.num_classes());
    for (size_t i = 0; i < caps.size(); ++i)
        caps[i] = std::isinf(horizon) ? 1.0 : 1.0 - sc.classes[i].service.equilibrium_tail(horizon);
    return caps;
}

/// Fractional-knapsack reward LP for a single-resource scenario:
/// maximize sum_i r_i rho_i alpha_i subject to sum_i b_i rho_i alpha_i <=
/// b/shrink and 0 <= alpha_i <= cap_i(horizon). Solved greedily in
/// nonincreasing r_i/b_i order (ties to the lower class index). The duals
/// are read off the marginal class: u* is its reward density, or the last
/// included class's density when capacity is exhausted exactly at a class
/// boundary, or 0 when capacity does not bind; v_i = max(0, rho_i(r_i - b_i u*)).
inline LpSolution solve_knapsack(const Scenario& sc, double horizon = kInf, double shrink = 1.0) {
    if (!sc.single_resource())
        throw ConfigError("solve_knapsack needs a single-resource scenario; use solve_network_lp");
    if (!(shrink >= 1.0)) throw ConfigError("shrink must be >= 1");
    if (!(horizon >= 0.0)) throw ConfigError("horizon must be >= 0");

    const size_t m = sc.num_classes();
    const auto rho = offered_loads(sc);
    const auto caps = horizon_caps(sc, horizon);
    LpSolution out;
    out.alpha.assign(m, std::vector<double>(1, 0.0));
    out.dual_u.assign(1, 0.0);
    out.dual_v.assign(m, 0.0);

    const double b = sc.capacity[0];
    if (std::isinf(b)) {
        for (size_t i = 0; i < m; ++i) {
            out.alpha[i][0] = caps[i];
            out.dual_v[i] = sc.classes[i].reward * rho[i];
            out.value += sc.classes[i].reward * rho[i] * caps[i];
            out.saturated.push_back(i);
        }
        return out;
    }

    std::vector<size_t> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t c) {
        return sc.classes[a].reward / sc.unit_size(a) > sc.classes[c].reward / sc.unit_size(c);
    });

    double rem = b / shrink;
    std::optional<size_t> marginal;
    double last_density = 0.0;
    for (size_t i : order) {
        const double full = caps[i] * sc.unit_size(i) * rho[i];
        if (full <= rem + 1e-15) {
            out.alpha[i][0] = caps[i];
            rem -= full;
            last_density = sc.classes[i].reward / sc.unit_size(i);
        } else {
            out.alpha[i][0] = rem / (sc.unit_size(i) * rho[i]);
            rem = 0.0;
            marginal = i;
            break;
        }
    }

    double ustar;
    if (marginal) ustar = sc.classes[*marginal].reward / sc.unit_size(*marginal);
    else if (rem > 1e-12) ustar = 0.0;
    else ustar = last_density;

    out.dual_u[0] = ustar;
    for (size_t i = 0; i < m; ++i) {
        out.dual_v[i] = std::max(0.0, rho[i] * (sc.classes[i].reward - sc.unit_size(i) * ustar));
        out.value += sc.classes[i].reward * rho[i] * out.alpha[i][0];
        if (out.alpha[i][0] >= caps[i] - 1e-12) out.saturated.push_back(i);
    }
    return out;
}

/// Optimal point, value, and dual prices of a generic maximization LP.
struct SimplexResult {
    std::vector<double> x;
    double value = 0.0;
    std::vector<double> row_dual;  // one per constraint row
    std::vector<double> ub_dual;   // one per variable (0 where no upper bound)
};

/// Dense two-phase tableau simplex for
///   maximize c'x  subject to  Ax <= rhs, 0 <= x <= ub,
/// with Bland's anti-cycling rule throughout. Right-hand sides may be
/// negative (phase 1 introduces artificials for those rows). Upper bounds
/// are folded in as explicit rows. Throws AssumptionError on an infeasible
/// or unbounded program.
inline SimplexResult solve_simplex(const std::vector<double>& obj,
                                   const std::vector<std::vector<double>>& rows,
                                   const std::vector<double>& rhs,
                                   const std::vector<double>& ub = {}) {
    const size_t n = obj.size();
    if (!ub.empty() && ub.size() != n) throw ConfigError("simplex: ub length mismatch");
    for (const auto& r : rows)
        if (r.size() != n) throw ConfigError("simplex: row length mismatch");
    if (rows.size() != rhs.size()) throw ConfigError("simplex: rhs length mismatch");

    constexpr double tol = 1e-9;

    // Assemble the row set: user rows first, then finite upper bounds.
    std::vector<std::vector<double>> A(rows.begin(), rows.end());
    std::vector<double> d(rhs.begin(), rhs.end());
    std::vector<size_t> ub_row_of(n, SIZE_MAX);
    for (size_t j = 0; j < ub.size(); ++j) {
        if (std::isinf(ub[j])) continue;
        std::vector<double> r(n, 0.0);
        r[j] = 1.0;
        ub_row_of[j] = A.size();
        A.push_back(std::move(r));
        d.push_back(ub[j]);
    }

    const size_t m = A.size();
    const size_t slack0 = n;          // slack columns n .. n+m-1
    size_t ncols = n + m;
    std::vector<size_t> art_col(m, SIZE_MAX);
    for (size_t i = 0; i < m; ++i) {
        if (d[i] < 0.0) {
            for (double& v : A[i]) v = -v;
            d[i] = -d[i];
            art_col[i] = ncols++;  // slack coefficient becomes -1; artificial basic
        }
    }
    const size_t first_art = n + m;

    // T: m rows x (ncols + 1); last column is the RHS.
    std::vector<std::vector<double>> T(m, std::vector<double>(ncols + 1, 0.0));
    std::vector<size_t> basis(m);
    for (size_t i = 0; i < m; ++i) {
        for (size_t j = 0; j < n; ++j) T[i][j] = A[i][j];
        T[i][slack0 + i] = art_col[i] == SIZE_MAX ? 1.0 : -1.0;
        if (art_col[i] != SIZE_MAX) T[i][art_col[i]] = 1.0;
        basis[i] = art_col[i] == SIZE_MAX ? slack0 + i : art_col[i];
        T[i][ncols] = d[i];
    }

    std::vector<double> row0(ncols + 1, 0.0);
    auto rebuild_row0 = [&](const std::vector<double>& costs) {
        std::fill(row0.begin(), row0.end(), 0.0);
        for (size_t j = 0; j < ncols; ++j) row0[j] = -costs[j];
        for (size_t i = 0; i < m; ++i) {
            const double cb = costs[basis[i]];
            if (cb == 0.0) continue;
            for (size_t j = 0; j <= ncols; ++j) row0[j] += cb * T[i][j];
        }
    };

    auto pivot = [&](size_t r, size_t col) {
        const double p = T[r][col];
        for (size_t j = 0; j <= ncols; ++j) T[r][j] /= p;
        for (size_t i = 0; i < m; ++i) {
            if (i == r || T[i][col] == 0.0) continue;
            const double f = T[i][col];
            for (size_t j = 0; j <= ncols; ++j) T[i][j] -= f * T[r][j];
            T[i][col] = 0.0;
        }
        if (row0[col] != 0.0) {
            const double f = row0[col];
            for (size_t j = 0; j <= ncols; ++j) row0[j] -= f * T[r][j];
            row0[col] = 0.0;
        }
        basis[r] = col;
    };

    auto run = [&](size_t max_col) {
        const size_t iter_cap = 10000 * (m + ncols + 1);
        for (size_t it = 0; it < iter_cap; ++it) {
            size_t enter = SIZE_MAX;
            for (size_t j = 0; j < max_col; ++j) {
                if (row0[j] < -tol) { enter = j; break; }  // Bland: lowest index
            }
            if (enter == SIZE_MAX) return;
            size_t leave = SIZE_MAX;
            double best = kInf;
            for (size_t i = 0; i < m; ++i) {
                if (T[i][enter] <= tol) continue;
                const double ratio = std::max(T[i][ncols], 0.0) / T[i][enter];
                if (ratio < best - 1e-15 ||
                    (ratio < best + 1e-15 && (leave == SIZE_MAX || basis[i] < basis[leave]))) {
                    best = ratio;
                    leave = i;
                }
            }
            if (leave == SIZE_MAX) throw AssumptionError("linear program is unbounded");
            pivot(leave, enter);
        }
        throw std::logic_error("simplex failed to terminate");
    };

    if (first_art < ncols) {
        std::vector<double> costs(ncols, 0.0);
        for (size_t j = first_art; j < ncols; ++j) costs[j] = -1.0;
        rebuild_row0(costs);
        run(ncols);
        double art_sum = 0.0;
        for (size_t i = 0; i < m; ++i)
            if (basis[i] >= first_art) art_sum += T[i][ncols];
        if (art_sum > 1e-7) throw AssumptionError("linear program is infeasible");
        // Drive remaining artificials out of the basis; rows with no
        // non-artificial pivot candidate are redundant and stay inert.
        for (size_t i = 0; i < m; ++i) {
            if (basis[i] < first_art) continue;
            for (size_t j = 0; j < first_art; ++j) {
                if (std::abs(T[i][j]) > tol) { pivot(i, j); break; }
            }
        }
    }

    std::vector<double> costs(ncols, 0.0);
    for (size_t j = 0; j < n; ++j) costs[j] = obj[j];
    rebuild_row0(costs);
    run(first_art);  // artificial columns never re-enter

    SimplexResult res;
    res.x.assign(n, 0.0);
    for (size_t i = 0; i < m; ++i)
        if (basis[i] < n) res.x[basis[i]] = T[i][ncols];
    res.value = 0.0;
    for (size_t j = 0; j < n; ++j) res.value += obj[j] * res.x[j];
    res.row_dual.assign(rows.size(), 0.0);
    res.ub_dual.assign(n, 0.0);
    for (size_t i = 0; i < rows.size(); ++i) res.row_dual[i] = std::max(0.0, row0[slack0 + i]);
    for (size_t j = 0; j < n; ++j)
        if (ub_row_of[j] != SIZE_MAX) res.ub_dual[j] = std::max(0.0, row0[slack0 + ub_row_of[j]]);
    return res;
}

namespace detail {

/// Network reward LP over per-(class, allocation) admission fractions.
/// `retain` (optional) masks allocations out of the program entirely.
inline LpSolution network_lp_masked(const Scenario& sc, double horizon, double shrink,
                                    const std::vector<std::vector<char>>* retain) {
    if (!(shrink >= 1.0)) throw ConfigError("shrink must be >= 1");
    if (!(horizon >= 0.0)) throw ConfigError("horizon must be >= 0");
    const size_t m = sc.num_classes(), s = sc.num_resources();
    const auto rho = offered_loads(sc);
    const auto caps = horizon_caps(sc, horizon);

    struct Var { size_t cls, alloc; };
    std::vector<Var> vars;
    for (size_t i = 0; i < m; ++i)
        for (size_t j = 0; j < sc.classes[i].allocations.size(); ++j)
            if (!retain || (*retain)[i][j]) vars.push_back({i, j});

    std::vector<double> obj(vars.size());
    for (size_t v = 0; v < vars.size(); ++v)
        obj[v] = sc.classes[vars[v].cls].reward * rho[vars[v].cls];

    std::vector<std::vector<double>> rows;
    std::vector<double> rhs;
    std::vector<size_t> resource_row(s, SIZE_MAX);
    for (size_t k = 0; k < s; ++k) {
        if (std::isinf(sc.capacity[k])) continue;
        std::vector<double> r(vars.size(), 0.0);
        for (size_t v = 0; v < vars.size(); ++v)
            r[v] = rho[vars[v].cls] * sc.classes[vars[v].cls].allocations[vars[v].alloc][k];
        resource_row[k] = rows.size();
        rows.push_back(std::move(r));
        rhs.push_back(sc.capacity[k] / shrink);
    }
    std::vector<size_t> class_row(m);
    for (size_t i = 0; i < m; ++i) {
        std::vector<double> r(vars.size(), 0.0);
        for (size_t v = 0; v < vars.size(); ++v)
            if (vars[v].cls == i) r[v] = 1.0;
        class_row[i] = rows.size();
        rows.push_back(std::move(r));
        rhs.push_back(caps[i]);
    }

    const SimplexResult sr = solve_simplex(obj, rows, rhs);

    LpSolution out;
    out.alpha.resize(m);
    for (size_t i = 0; i < m; ++i) out.alpha[i].assign(sc.classes[i].allocations.size(), 0.0);
    for (size_t v = 0; v < vars.size(); ++v) out.alpha[vars[v].cls][vars[v].alloc] = sr.x[v];
    out.value = sr.value;
    out.dual_u.assign(s, 0.0);
    for (size_t k = 0; k < s; ++k)
        if (resource_row[k] != SIZE_MAX) out.dual_u[k] = sr.row_dual[resource_row[k]];
    out.dual_v.assign(m, 0.0);
    for (size_t i = 0; i < m; ++i) {
        out.dual_v[i] = sr.row_dual[class_row[i]];
        if (out.class_total(i) >= caps[i] - 1e-9) out.saturated.push_back(i);
    }
    return out;
}

}  // namespace detail

/// Reward LP for a multi-resource loss network (single-resource scenarios
/// reduce to the same program solve_knapsack handles, via the simplex).
inline LpSolution solve_network_lp(const Scenario& sc, double horizon = kInf, double shrink = 1.0) {
    return detail::network_lp_masked(sc, horizon, shrink, nullptr);
}

/// Largest eps in (0, 1/4] for which the unperturbed steady-state duals
/// remain optimal when the capacity is shrunk by 1+4*eps. Located by
/// bisection (tolerance 1e-6) on the strong-duality gap at the frozen duals.
/// Multi-resource scenarios use the same probe with the network LP; dual
/// degeneracy can make that value approximate.
inline double epsilon_zero(const Scenario& sc) {
    const bool single = sc.single_resource();
    const LpSolution base = single ? solve_knapsack(sc) : solve_network_lp(sc);
    const std::vector<double> caps(sc.num_classes(), 1.0);

    auto optimal_at = [&](double eps) {
        const double shrink = 1.0 + 4.0 * eps;
        const LpSolution probe =
            single ? solve_knapsack(sc, kInf, shrink) : solve_network_lp(sc, kInf, shrink);
        std::vector<double> limits(sc.capacity);
        for (double& v : limits) v /= shrink;
        const double dual = base.dual_value(limits, caps);
        return std::abs(probe.value - dual) <= 1e-9 * (1.0 + std::abs(probe.value));
    };

    if (optimal_at(0.25)) return 0.25;
    double lo = 0.0, hi = 0.25;
    while (hi - lo > 1e-6) {
        const double mid = 0.5 * (lo + hi);
        (optimal_at(mid) ? lo : hi) = mid;
    }
    return lo;
}

}  // namespace lossnet

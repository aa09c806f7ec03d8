#include "oed/design.hpp"

#include "oed/csv.hpp"
#include "oed/errors.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>

namespace oed {

SymmetricEigen jacobi_eigen(const Matrix& input) {
    if (input.rows() != input.cols()) throw ConfigError("jacobi_eigen: matrix is not square");
    const Eigen::Index m = input.rows();
    Matrix a = 0.5 * (input + input.transpose());
    Matrix v = Matrix::Identity(m, m);
    const double norm = std::max(a.norm(), std::numeric_limits<double>::min());
    const double eps = std::numeric_limits<double>::epsilon();

    constexpr int kMaxSweeps = 100;
    bool done = false;
    for (int sweep = 0; sweep < kMaxSweeps && !done; ++sweep) {
        double off = 0.0;
        for (Eigen::Index p = 0; p < m; ++p)
            for (Eigen::Index q = p + 1; q < m; ++q) off += a(p, q) * a(p, q);
        if (std::sqrt(off) <= eps * norm) {
            done = true;
            break;
        }
        for (Eigen::Index p = 0; p < m; ++p) {
            for (Eigen::Index q = p + 1; q < m; ++q) {
                const double apq = a(p, q);
                if (apq == 0.0) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (Eigen::Index k = 0; k < m; ++k) {
                    const double akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (Eigen::Index k = 0; k < m; ++k) {
                    const double apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                for (Eigen::Index k = 0; k < m; ++k) {
                    const double vkp = v(k, p), vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }
    if (!done) throw DidNotConverge("Jacobi eigen-solver exhausted its sweep budget");

    std::vector<Eigen::Index> order(static_cast<std::size_t>(m));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](auto i, auto j) { return a(i, i) < a(j, j); });
    SymmetricEigen out{Vector(m), Matrix(m, m)};
    for (Eigen::Index k = 0; k < m; ++k) {
        out.values[k] = a(order[static_cast<std::size_t>(k)], order[static_cast<std::size_t>(k)]);
        out.vectors.col(k) = v.col(order[static_cast<std::size_t>(k)]).normalized();
    }
    return out;
}

EigenPair min_eigenpair(const Matrix& a) {
    SymmetricEigen e = jacobi_eigen(a);
    return {e.values[0], e.vectors.col(0)};
}

Matrix atomic_information(const SensitivityRecord& record, std::size_t i) {
    const Matrix& b = record.blocks.at(i);
    return b.transpose() * b;
}

FisherInformation fim_from_weights(const SensitivityRecord& record, const Vector& lambda) {
    if (static_cast<std::size_t>(lambda.size()) != record.size())
        throw ConfigError("design weights do not match the sensitivity record length");
    const auto m = static_cast<Eigen::Index>(record.dim_param());
    Matrix f = Matrix::Zero(m, m);
    for (std::size_t i = 0; i < record.size(); ++i) {
        const double w = lambda[static_cast<Eigen::Index>(i)];
        if (w != 0.0) f.noalias() += w * (record.blocks[i].transpose() * record.blocks[i]);
    }
    return {0.5 * (f + f.transpose())};
}

FisherInformation full_fim(const SensitivityRecord& record) {
    return fim_from_weights(record, Vector::Ones(static_cast<Eigen::Index>(record.size())));
}

namespace {

/// Atoms stacked row-wise, scaled so that max_i tr(M_i) = 1.
struct NormalizedAtoms {
    Matrix stacked;  ///< (N·q)×m
    Eigen::Index n_points = 0;
    Eigen::Index q = 0;
    Eigen::Index m = 0;
    double scale = 1.0;

    Matrix weighted(const Vector& lambda) const {
        Matrix a = Matrix::Zero(m, m);
        for (Eigen::Index i = 0; i < n_points; ++i) {
            if (lambda[i] == 0.0) continue;
            const auto b = stacked.middleRows(i * q, q);
            a.noalias() += lambda[i] * (b.transpose() * b);
        }
        return 0.5 * (a + a.transpose());
    }

    /// g_i = tr(W M_i) for a symmetric W.
    Vector directional(const Matrix& w) const {
        const Matrix bw = stacked * w;
        Vector g(n_points);
        for (Eigen::Index i = 0; i < n_points; ++i)
            g[i] = bw.middleRows(i * q, q).cwiseProduct(stacked.middleRows(i * q, q)).sum();
        return g;
    }
};

NormalizedAtoms normalize(const SensitivityRecord& record) {
    NormalizedAtoms atoms;
    atoms.n_points = static_cast<Eigen::Index>(record.size());
    atoms.q = record.blocks.front().rows();
    atoms.m = record.blocks.front().cols();
    atoms.stacked.resize(atoms.n_points * atoms.q, atoms.m);
    double scale = 0.0;
    for (Eigen::Index i = 0; i < atoms.n_points; ++i) {
        const Matrix& b = record.blocks[static_cast<std::size_t>(i)];
        atoms.stacked.middleRows(i * atoms.q, atoms.q) = b;
        scale = std::max(scale, b.squaredNorm());
    }
    atoms.scale = scale;
    if (scale > 0.0) atoms.stacked /= std::sqrt(scale);
    return atoms;
}

struct Certificate {
    double primal = 0.0;  ///< λ_min(Σ λ M), normalized
    double gap = 0.0;
};

/// Best available bound on t* − primal: the rank-one eigenvector bound and,
/// when supplied, the bound from a trace-one dual matrix.
Certificate certify(const NormalizedAtoms& atoms, const Vector& lambda, const Matrix* dual) {
    const EigenPair ep = min_eigenpair(atoms.weighted(lambda));
    Certificate c;
    c.primal = ep.value;
    const Matrix vvt = ep.vector * ep.vector.transpose();
    c.gap = atoms.directional(vvt).maxCoeff() - ep.value;
    if (dual) c.gap = std::min(c.gap, atoms.directional(*dual).maxCoeff() - ep.value);
    c.gap = std::max(c.gap, 0.0);
    return c;
}

bool is_rank_deficient(const NormalizedAtoms& atoms) {
    const Vector ones = Vector::Ones(atoms.n_points);
    const SymmetricEigen e = jacobi_eigen(atoms.weighted(ones));
    const double top = std::max(e.values[e.values.size() - 1], std::numeric_limits<double>::min());
    return e.values[0] <= 1e-12 * top;
}

DesignWeights solve_frank_wolfe(const NormalizedAtoms& atoms, const DesignOptions& opt) {
    const Eigen::Index n = atoms.n_points;
    DesignWeights out;
    Vector lambda = Vector::Constant(n, 1.0 / static_cast<double>(n));
    Matrix a = atoms.weighted(lambda);
    double best_gap = std::numeric_limits<double>::infinity();
    double gap = best_gap;
    int k = 0;
    for (; k < opt.max_iter; ++k) {
        const EigenPair ep = min_eigenpair(a);
        const Vector g = atoms.directional(ep.vector * ep.vector.transpose());
        Eigen::Index vertex = 0;
        const double gmax = g.maxCoeff(&vertex);
        gap = std::max(gmax - ep.value, 0.0);
        best_gap = std::min(best_gap, gap);
        if (k % 50 == 0) out.gap_checkpoints.push_back(best_gap);
        if (gap <= opt.tol) {
            out.converged = true;
            break;
        }
        const double step = 2.0 / (k + 2.0);
        lambda *= 1.0 - step;
        lambda[vertex] += step;
        const auto b = atoms.stacked.middleRows(vertex * atoms.q, atoms.q);
        a = (1.0 - step) * a + step * (b.transpose() * b);
    }
    out.iterations = k;
    lambda = lambda.cwiseMax(0.0);
    out.lambda = lambda / lambda.sum();
    const Certificate cert = certify(atoms, out.lambda, nullptr);
    out.t_value = cert.primal;
    out.gap = out.converged ? std::min(gap, cert.gap) : cert.gap;
    if (cert.gap <= opt.tol) out.converged = true;
    return out;
}

/// Largest step α ≤ 1 keeping X + α·dX positive definite (X = L Lᵀ).
double psd_step(const Eigen::LLT<Matrix>& llt, const Matrix& dx) {
    const Matrix l = llt.matrixL();
    const Matrix linv = l.triangularView<Eigen::Lower>().solve(Matrix::Identity(dx.rows(), dx.cols()));
    const Matrix s = linv * dx * linv.transpose();
    const double e = Eigen::SelfAdjointEigenSolver<Matrix>(0.5 * (s + s.transpose()), Eigen::EigenvaluesOnly)
                         .eigenvalues()[0];
    return e < 0.0 ? -1.0 / e : std::numeric_limits<double>::infinity();
}

double positive_step(const Vector& x, const Vector& dx) {
    double a = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < x.size(); ++i)
        if (dx[i] < 0.0) a = std::min(a, -x[i] / dx[i]);
    return a;
}

/// Primal-dual interior point (HKM direction, Mehrotra predictor-corrector) for
///   max t   s.t.  Z = Σ λ_i M_i − tI ⪰ 0,  λ ≥ 0,  1ᵀλ = 1
///   min ν   s.t.  W ⪰ 0,  tr W = 1,  s_i = ν − tr(W M_i) ≥ 0.
/// Z is recomputed from (λ, t) and s from (ν, W), so both sides stay feasible;
/// non-support weights end up ordered by s_i, the dual gradient slack.
DesignWeights solve_interior_point(const NormalizedAtoms& atoms, const DesignOptions& opt) {
    const Eigen::Index n = atoms.n_points;
    const Eigen::Index m = atoms.m;
    const Eigen::Index q = atoms.q;
    const Matrix eye = Matrix::Identity(m, m);
    const auto sym = [](const Matrix& x) { return Matrix(0.5 * (x + x.transpose())); };

    Vector lambda = Vector::Constant(n, 1.0 / static_cast<double>(n));
    const Matrix a0 = atoms.weighted(lambda);
    double t = min_eigenpair(a0).value - std::max(a0.trace() / static_cast<double>(m), 1e-12);
    Matrix w = eye / static_cast<double>(m);
    double nu = atoms.directional(w).maxCoeff() + 1.0 / static_cast<double>(m);

    DesignWeights out;
    Certificate best{0.0, std::numeric_limits<double>::infinity()};
    Vector best_lambda = lambda;
    int it = 0;
    for (; it < opt.max_iter; ++it) {
        const Matrix z = atoms.weighted(lambda) - t * eye;
        const Eigen::LLT<Matrix> zllt(z);
        const Eigen::LLT<Matrix> wllt(w);
        if (zllt.info() != Eigen::Success || wllt.info() != Eigen::Success) break;
        const Vector s = Vector::Constant(n, nu) - atoms.directional(w);
        if (s.minCoeff() <= 0.0 || lambda.minCoeff() <= 0.0) break;

        const Certificate cert = certify(atoms, lambda, &w);
        if (cert.gap < best.gap) {
            best = cert;
            best_lambda = lambda;
        }
        if (best.gap <= opt.tol) {
            out.converged = true;
            break;
        }
        const double mu = ((z * w).trace() + lambda.dot(s)) / static_cast<double>(n + m);
        if (!(mu > 1e-3 * opt.tol * std::numeric_limits<double>::epsilon())) break;

        const Matrix zinv = zllt.solve(eye);
        const Matrix c1 = atoms.stacked * zinv * atoms.stacked.transpose();
        const Matrix c2 = atoms.stacked * w * atoms.stacked.transpose();
        const Matrix hadamard = c1.cwiseProduct(c2);
        Matrix kkt(n + 1, n + 1);
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j <= i; ++j) kkt(i, j) = kkt(j, i) = hadamard.block(i * q, j * q, q, q).sum();
        const Vector h = atoms.directional(sym(zinv * w));
        kkt.col(n).head(n) = -h;
        kkt.row(n).head(n) = -h.transpose();
        kkt(n, n) = (zinv * w).trace();
        kkt.diagonal().head(n) += s.cwiseQuotient(lambda);
        const Vector dscale = kkt.diagonal().cwiseSqrt().cwiseInverse();
        const Eigen::LDLT<Matrix> kllt(dscale.asDiagonal() * kkt * dscale.asDiagonal());
        if (kllt.info() != Eigen::Success) break;
        const auto ksolve = [&](const Vector& r) { return Vector(dscale.cwiseProduct(kllt.solve(dscale.cwiseProduct(r)))); };
        Vector border = Vector::Zero(n + 1);
        border.head(n).setOnes();
        const Vector kb = ksolve(border);

        struct Direction {
            Vector dlambda;
            double dt = 0.0, dnu = 0.0;
            Matrix dz, dw;
            Vector ds;
            double alpha_p = 0.0, alpha_d = 0.0;
        };
        // Newton direction aiming at ZW = target·I, λ_i s_i = target, with
        // second-order corrections kz (matrix) and kl (per weight).
        const auto direction = [&](double target, const Matrix& kz, const Vector& kl) {
            const Matrix p = sym(zinv * (target * eye - kz));
            Vector r(n + 1);
            r.head(n) = (Vector::Constant(n, target) - kl).cwiseQuotient(lambda) + atoms.directional(p) - Vector::Constant(n, nu);
            r[n] = 1.0 - p.trace();
            const Vector kr = ksolve(r);
            Direction d;
            // 1ᵀdλ = 1 − 1ᵀλ picks the multiplier dν on the border.
            d.dnu = (border.dot(kr) - (1.0 - lambda.sum())) / border.dot(kb);
            const Vector x = kr - d.dnu * kb;
            d.dlambda = x.head(n);
            d.dt = x[n];
            d.dz = atoms.weighted(d.dlambda) - d.dt * eye;
            d.dw = p - w - sym(zinv * d.dz * w);
            d.ds = Vector::Constant(n, d.dnu) - atoms.directional(d.dw);
            d.alpha_p = std::min({1.0, positive_step(lambda, d.dlambda), psd_step(zllt, d.dz)});
            d.alpha_d = std::min({1.0, positive_step(s, d.ds), psd_step(wllt, d.dw)});
            return d;
        };

        const Direction pred = direction(0.0, Matrix::Zero(m, m), Vector::Zero(n));
        const double mu_aff = ((z + pred.alpha_p * pred.dz) * (w + pred.alpha_d * pred.dw)).trace() +
                              (lambda + pred.alpha_p * pred.dlambda).dot(s + pred.alpha_d * pred.ds);
        const double sigma = std::pow(std::clamp(mu_aff / static_cast<double>(n + m) / mu, 0.0, 1.0), 3);
        const Direction d =
            direction(sigma * mu, pred.dz * pred.dw, pred.dlambda.cwiseProduct(pred.ds));

        constexpr double kFraction = 0.95;
        const double ap = kFraction * d.alpha_p;
        const double ad = kFraction * d.alpha_d;
        if (ap < 1e-14 && ad < 1e-14) break;
        lambda += ap * d.dlambda;
        t += ap * d.dt;
        w = sym(w + ad * d.dw);
        nu += ad * d.dnu;
    }
    out.iterations = it;
    out.lambda = best_lambda / best_lambda.sum();
    out.t_value = best.primal;
    out.gap = best.gap;
    return out;
}

}  // namespace

DesignWeights e_optimal_weights(const SensitivityRecord& record, const DesignOptions& options) {
    if (record.size() == 0) throw ConfigError("e_optimal_weights: empty sensitivity record");
    record.validate();
    if (!(options.tol > 0.0)) throw ConfigError("design tolerance must be > 0");
    if (options.max_iter < 1) throw ConfigError("design max_iter must be >= 1");
    const NormalizedAtoms atoms = normalize(record);
    const auto n = atoms.n_points;

    DesignWeights out;
    if (atoms.scale == 0.0) {
        out.lambda = Vector::Constant(n, 1.0 / static_cast<double>(n));
        out.converged = true;
        out.rank_deficient = true;
        return out;
    }
    out = options.solver == DesignSolver::FrankWolfe ? solve_frank_wolfe(atoms, options) : solve_interior_point(atoms, options);
    out.scale = atoms.scale;
    out.t_value *= atoms.scale;
    out.rank_deficient = is_rank_deficient(atoms);
    return out;
}

Vector rank_times(const Vector& lambda) {
    const auto n = static_cast<std::size_t>(lambda.size());
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return lambda[static_cast<Eigen::Index>(a)] > lambda[static_cast<Eigen::Index>(b)];
    });
    Vector ranks(lambda.size());
    std::size_t pos = 0;
    while (pos < n) {
        std::size_t end = pos + 1;
        const double v = lambda[static_cast<Eigen::Index>(order[pos])];
        while (end < n && lambda[static_cast<Eigen::Index>(order[end])] == v) ++end;
        // positions pos+1 .. end (1-based) share their mean
        const double mid = 0.5 * static_cast<double>(pos + 1 + end);
        for (std::size_t k = pos; k < end; ++k) ranks[static_cast<Eigen::Index>(order[k])] = mid;
        pos = end;
    }
    return ranks;
}

std::vector<std::size_t> select_top_n(const Vector& ranks, std::size_t n) {
    const auto total = static_cast<std::size_t>(ranks.size());
    if (n == 0 || n > total) throw ConfigError("select_top_n: n must be in [1, " + std::to_string(total) + "]");
    std::vector<std::size_t> order(total);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return ranks[static_cast<Eigen::Index>(a)] < ranks[static_cast<Eigen::Index>(b)];
    });
    order.resize(n);
    std::sort(order.begin(), order.end());
    return order;
}

std::vector<double> times_of(const TimeGrid& grid, const std::vector<std::size_t>& indices) {
    std::vector<double> out;
    out.reserve(indices.size());
    for (std::size_t i : indices) out.push_back(grid.point(i));
    return out;
}

void write_design_csv(const TimeGrid& grid, const DesignWeights& weights, std::ostream& out) {
    const Vector ranks = rank_times(weights.lambda);
    out << "t,lambda,rank\n";
    for (Eigen::Index i = 0; i < weights.lambda.size(); ++i)
        out << format_double(grid.point(static_cast<std::size_t>(i))) << ',' << format_double(weights.lambda[i]) << ','
            << format_double(ranks[i]) << '\n';
}

std::string design_diagnostics(const DesignWeights& w) {
    std::ostringstream os;
    os << "iterations = " << w.iterations << '\n'
       << "converged = " << (w.converged ? "true" : "false") << '\n'
       << "t_value = " << format_double(w.t_value) << '\n'
       << "gap_normalized = " << format_double(w.gap) << '\n'
       << "gap = " << format_double(w.gap * w.scale) << '\n'
       << "scale = " << format_double(w.scale) << '\n'
       << "rank_deficient = " << (w.rank_deficient ? "true" : "false") << '\n';
    return os.str();
}

}  // namespace oed

#include "al/pca.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "al/common.hpp"

namespace al {

namespace {

constexpr double kPowerTol = 1e-10;
constexpr int kPowerMaxIter = 10000;

double dot(const double* a, const double* b, std::size_t m) {
    double s = 0.0;
    for (std::size_t i = 0; i < m; ++i) s += a[i] * b[i];
    return s;
}

double norm(const std::vector<double>& v) {
    return std::sqrt(dot(v.data(), v.data(), v.size()));
}

// Removes the projections of v onto each row of basis (k rows of length m).
void orthogonalize(std::vector<double>& v, const std::vector<double>& basis,
                   std::size_t k) {
    const std::size_t m = v.size();
    for (std::size_t i = 0; i < k; ++i) {
        const double* b = basis.data() + i * m;
        double c = dot(v.data(), b, m);
        for (std::size_t j = 0; j < m; ++j) v[j] -= c * b[j];
    }
}

// Top-r eigenpairs of the symmetric PSD matrix A (m x m) by power iteration
// with deflation. Iterates are re-orthogonalized against earlier eigenvectors
// so repeated and zero eigenvalues still yield an orthonormal set.
void top_eigenpairs(std::vector<double> A, std::size_t m, std::size_t r,
                    std::vector<double>& vectors, std::vector<double>& values) {
    vectors.assign(r * m, 0.0);
    values.assign(r, 0.0);
    Rng rng(0x70636165696765ULL);  // fixed seed, results are deterministic
    std::vector<double> v(m), w(m);
    for (std::size_t k = 0; k < r; ++k) {
        for (auto& x : v) x = rng.uniform(-1.0, 1.0);
        orthogonalize(v, vectors, k);
        double nv = norm(v);
        if (nv < 1e-12) {
            // random start collapsed; fall back to basis vectors
            for (std::size_t j = 0; j < m; ++j) {
                std::fill(v.begin(), v.end(), 0.0);
                v[j] = 1.0;
                orthogonalize(v, vectors, k);
                nv = norm(v);
                if (nv > 0.5) break;
            }
        }
        for (auto& x : v) x /= nv;

        double lambda = 0.0;
        for (int it = 0; it < kPowerMaxIter; ++it) {
            for (std::size_t i = 0; i < m; ++i)
                w[i] = dot(A.data() + i * m, v.data(), m);
            orthogonalize(w, vectors, k);
            lambda = dot(v.data(), w.data(), m);
            double nw = norm(w);
            if (nw < 1e-15) {
                lambda = 0.0;
                break;  // v spans the (near-)null space; keep it as is
            }
            double diff = 0.0;
            for (std::size_t i = 0; i < m; ++i) {
                double wi = w[i] / nw;
                diff = std::max(diff, std::abs(wi - v[i]));
                v[i] = wi;
            }
            if (diff <= kPowerTol) break;
        }
        lambda = std::max(lambda, 0.0);
        values[k] = lambda;
        std::copy(v.begin(), v.end(), vectors.begin() + k * m);
        // deflate
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < m; ++j)
                A[i * m + j] -= lambda * v[i] * v[j];
    }
}

void canonicalize_sign(double* comp, std::size_t d) {
    for (std::size_t j = 0; j < d; ++j) {
        if (std::abs(comp[j]) > 1e-12) {
            if (comp[j] < 0.0)
                for (std::size_t k = 0; k < d; ++k) comp[k] = -comp[k];
            return;
        }
    }
}

}  // namespace

PcaModel pca_fit(const EmbeddingMatrix& X, std::size_t r) {
    if (X.n < 2) throw Error("pca_fit: need at least 2 rows");
    if (r < 1 || r > std::min(X.n, X.d))
        throw Error("pca_fit: r out of range [1, min(n, d)]");
    const std::size_t n = X.n, d = X.d;

    PcaModel model;
    model.d = d;
    model.r = r;
    model.mean.assign(d, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) model.mean[j] += X.data[i * d + j];
    for (auto& m : model.mean) m /= static_cast<double>(n);

    std::vector<double> centered(n * d);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j)
            centered[i * d + j] = X.data[i * d + j] - model.mean[j];

    const double scale = 1.0 / static_cast<double>(n - 1);
    std::vector<double> vectors, values;

    if (d <= n) {
        std::vector<double> cov(d * d, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            const double* row = centered.data() + i * d;
            for (std::size_t a = 0; a < d; ++a)
                for (std::size_t b = a; b < d; ++b)
                    cov[a * d + b] += row[a] * row[b];
        }
        for (std::size_t a = 0; a < d; ++a)
            for (std::size_t b = a; b < d; ++b) {
                cov[a * d + b] *= scale;
                cov[b * d + a] = cov[a * d + b];
            }
        top_eigenpairs(std::move(cov), d, r, vectors, values);
        model.components = std::move(vectors);
    } else {
        // Gram trick: eigenvectors u of (Xc Xc^T)/(n-1) map to Xc^T u.
        std::vector<double> gram(n * n, 0.0);
        for (std::size_t a = 0; a < n; ++a)
            for (std::size_t b = a; b < n; ++b) {
                double s = dot(centered.data() + a * d, centered.data() + b * d, d) * scale;
                gram[a * n + b] = s;
                gram[b * n + a] = s;
            }
        top_eigenpairs(std::move(gram), n, r, vectors, values);
        model.components.assign(r * d, 0.0);
        for (std::size_t k = 0; k < r; ++k) {
            double* comp = model.components.data() + k * d;
            const double* u = vectors.data() + k * n;
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < d; ++j)
                    comp[j] += u[i] * centered[i * d + j];
            double nc = std::sqrt(dot(comp, comp, d));
            if (nc > 1e-12) {
                for (std::size_t j = 0; j < d; ++j) comp[j] /= nc;
            } else {
                // zero-variance direction: complete with a basis vector
                // orthogonal to the components found so far
                std::vector<double> cand(d);
                for (std::size_t j = 0; j < d; ++j) {
                    std::fill(cand.begin(), cand.end(), 0.0);
                    cand[j] = 1.0;
                    orthogonalize(cand, model.components, k);
                    double ncand = norm(cand);
                    if (ncand > 0.5) {
                        for (std::size_t t = 0; t < d; ++t) comp[t] = cand[t] / ncand;
                        break;
                    }
                }
            }
        }
    }

    model.explained_variance = std::move(values);

    // enforce non-increasing variance order
    std::vector<std::size_t> order(r);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return model.explained_variance[a] > model.explained_variance[b];
    });
    std::vector<double> comps_sorted(r * d), vars_sorted(r);
    for (std::size_t k = 0; k < r; ++k) {
        vars_sorted[k] = model.explained_variance[order[k]];
        std::copy_n(model.components.data() + order[k] * d, d,
                    comps_sorted.data() + k * d);
    }
    model.components = std::move(comps_sorted);
    model.explained_variance = std::move(vars_sorted);

    for (std::size_t k = 0; k < r; ++k)
        canonicalize_sign(model.components.data() + k * d, d);
    return model;
}

EmbeddingMatrix pca_project(const PcaModel& model, const EmbeddingMatrix& X) {
    if (X.d != model.d)
        throw Error("pca_project: dimension mismatch (" + std::to_string(X.d) +
                    " vs model " + std::to_string(model.d) + ")");
    EmbeddingMatrix out;
    out.n = X.n;
    out.d = model.r;
    out.ids = X.ids;
    out.data.assign(X.n * model.r, 0.0);
    std::vector<double> centered(model.d);
    for (std::size_t i = 0; i < X.n; ++i) {
        for (std::size_t j = 0; j < model.d; ++j)
            centered[j] = X.data[i * model.d + j] - model.mean[j];
        for (std::size_t k = 0; k < model.r; ++k)
            out.data[i * model.r + k] =
                dot(centered.data(), model.components.data() + k * model.d, model.d);
    }
    out.validate();
    return out;
}

}  // namespace al

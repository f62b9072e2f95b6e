#include <doctest.h>

#include <cmath>
#include <vector>

#include "al/common.hpp"
#include "al/pca.hpp"
#include "al/pool.hpp"

using namespace al;

namespace {

EmbeddingMatrix make_matrix(std::size_t n, std::size_t d,
                            std::vector<double> data) {
    EmbeddingMatrix m;
    m.n = n;
    m.d = d;
    m.data = std::move(data);
    for (std::size_t i = 0; i < n; ++i) m.ids.push_back(i);
    m.validate();
    return m;
}

// Oracle construction: data of exact rank r as a product of random factors.
EmbeddingMatrix random_low_rank(std::size_t n, std::size_t d, std::size_t rank,
                                Rng& rng) {
    std::vector<double> left(n * rank), right(rank * d);
    for (auto& v : left) v = rng.uniform(-2.0, 2.0);
    for (auto& v : right) v = rng.uniform(-2.0, 2.0);
    std::vector<double> data(n * d, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < rank; ++k)
            for (std::size_t j = 0; j < d; ++j)
                data[i * d + j] += left[i * rank + k] * right[k * d + j];
    return make_matrix(n, d, std::move(data));
}

double reconstruction_error(const PcaModel& model, const EmbeddingMatrix& x) {
    EmbeddingMatrix proj = pca_project(model, x);
    double worst = 0.0;
    for (std::size_t i = 0; i < x.n; ++i) {
        for (std::size_t j = 0; j < x.d; ++j) {
            double rec = model.mean[j];
            for (std::size_t k = 0; k < model.r; ++k)
                rec += proj.data[i * model.r + k] * model.components[k * x.d + j];
            worst = std::max(worst, std::abs(rec - x.data[i * x.d + j]));
        }
    }
    return worst;
}

void check_orthonormal(const PcaModel& model) {
    for (std::size_t a = 0; a < model.r; ++a) {
        for (std::size_t b = 0; b < model.r; ++b) {
            double dot = 0.0;
            for (std::size_t j = 0; j < model.d; ++j)
                dot += model.components[a * model.d + j] * model.components[b * model.d + j];
            CHECK(std::abs(dot - (a == b ? 1.0 : 0.0)) <= 1e-6);
        }
    }
}

double total_variance(const EmbeddingMatrix& x) {
    std::vector<double> mean(x.d, 0.0);
    for (std::size_t i = 0; i < x.n; ++i)
        for (std::size_t j = 0; j < x.d; ++j) mean[j] += x.data[i * x.d + j];
    for (auto& m : mean) m /= static_cast<double>(x.n);
    double tot = 0.0;
    for (std::size_t i = 0; i < x.n; ++i)
        for (std::size_t j = 0; j < x.d; ++j) {
            double c = x.data[i * x.d + j] - mean[j];
            tot += c * c;
        }
    return tot / static_cast<double>(x.n - 1);
}

}  // namespace

TEST_CASE("points on the line y=x give the diagonal component") {
    auto x = make_matrix(4, 2, {0, 0, 1, 1, 2, 2, 3, 3});
    auto model = pca_fit(x, 1);
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    CHECK(model.components[0] == doctest::Approx(inv_sqrt2).epsilon(1e-9));
    CHECK(model.components[1] == doctest::Approx(inv_sqrt2).epsilon(1e-9));
    // projecting the fit data: coordinate variance equals explained variance
    auto proj = pca_project(model, x);
    double var = total_variance(proj);
    CHECK(var == doctest::Approx(model.explained_variance[0]).epsilon(1e-9));
}

TEST_CASE("all-identical rows have zero variance") {
    auto x = make_matrix(3, 2, {5, 7, 5, 7, 5, 7});
    auto model = pca_fit(x, 1);
    CHECK(model.explained_variance[0] == doctest::Approx(0.0).epsilon(1e-12));
    check_orthonormal(model);
}

TEST_CASE("rank-2 data reconstructs exactly with r=2") {
    Rng rng(42);
    auto x = random_low_rank(12, 5, 2, rng);
    auto model = pca_fit(x, 2);
    CHECK(reconstruction_error(model, x) <= 1e-6);
    check_orthonormal(model);
}

TEST_CASE("projecting the mean gives the zero row") {
    Rng rng(7);
    auto x = random_low_rank(10, 4, 3, rng);
    auto model = pca_fit(x, 3);
    EmbeddingMatrix mean_row = make_matrix(1, 4, model.mean);
    auto proj = pca_project(model, mean_row);
    for (double v : proj.data) CHECK(std::abs(v) <= 1e-9);
}

TEST_CASE("gram trick path (n < d) matches the rank oracle") {
    Rng rng(99);
    auto x = random_low_rank(6, 10, 2, rng);
    auto model = pca_fit(x, 2);
    CHECK(reconstruction_error(model, x) <= 1e-6);
    check_orthonormal(model);
}

TEST_CASE("trace preservation over full component count") {
    Rng rng(3);
    for (int trial = 0; trial < 10; ++trial) {
        std::size_t n = 4 + rng.below(10);
        std::size_t d = 2 + rng.below(5);
        EmbeddingMatrix x;
        x.n = n;
        x.d = d;
        for (std::size_t i = 0; i < n; ++i) {
            x.ids.push_back(i);
            for (std::size_t j = 0; j < d; ++j)
                x.data.push_back(rng.uniform(-3.0, 3.0));
        }
        x.validate();
        std::size_t r = std::min(n - 1, d);
        auto model = pca_fit(x, r);
        check_orthonormal(model);
        double sum = 0.0;
        for (double v : model.explained_variance) sum += v;
        CHECK(sum == doctest::Approx(total_variance(x)).epsilon(1e-6));
        for (std::size_t k = 1; k < r; ++k)
            CHECK(model.explained_variance[k] <= model.explained_variance[k - 1] + 1e-9);
    }
}

TEST_CASE("projection is translation invariant") {
    Rng rng(5);
    auto x = random_low_rank(9, 4, 3, rng);
    std::vector<double> shift(4);
    for (auto& s : shift) s = rng.uniform(-10.0, 10.0);
    EmbeddingMatrix shifted = x;
    for (std::size_t i = 0; i < x.n; ++i)
        for (std::size_t j = 0; j < x.d; ++j)
            shifted.data[i * x.d + j] += shift[j];
    shifted.validate();
    auto pa = pca_project(pca_fit(x, 2), x);
    auto pb = pca_project(pca_fit(shifted, 2), shifted);
    for (std::size_t k = 0; k < pa.data.size(); ++k)
        CHECK(std::abs(pa.data[k] - pb.data[k]) <= 1e-6);
}

TEST_CASE("precondition errors") {
    auto x = make_matrix(3, 2, {0, 0, 1, 1, 2, 2});
    CHECK_THROWS_AS(pca_fit(x, 0), Error);
    CHECK_THROWS_AS(pca_fit(x, 3), Error);
    auto one = make_matrix(1, 2, {0, 0});
    CHECK_THROWS_AS(pca_fit(one, 1), Error);

    auto model = pca_fit(x, 1);
    auto wrong = make_matrix(2, 3, {0, 0, 0, 1, 1, 1});
    CHECK_THROWS_AS(pca_project(model, wrong), Error);
}

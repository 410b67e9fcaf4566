#include <doctest.h>

#include <cmath>

#include "fgts/classifiers.hpp"
#include "fgts/error.hpp"
#include "support/gen.hpp"
#include "support/tmpdir.hpp"

using namespace fgts;

namespace {

struct Set {
    std::vector<Embedding> x;
    std::vector<Label> y;
};

/// Gaussian blobs around +/- `centre` along axis 0.
Set blobs(test::Gen& g, std::size_t per_class, std::size_t dim, double centre, double sd) {
    Set s;
    for (std::size_t i = 0; i < 2 * per_class; ++i) {
        const bool fake = i % 2 == 1;
        Embedding e(dim);
        for (auto& v : e) v = g.normal(0.0, sd);
        e[0] += fake ? centre : -centre;
        s.x.push_back(std::move(e));
        s.y.push_back(fake ? Label::fake : Label::real);
    }
    return s;
}

Embedding unit_direction(test::Gen& g, std::size_t dim) {
    Embedding w(dim);
    double norm = 0;
    for (auto& v : w) norm += (v = g.normal()) * v;
    for (auto& v : w) v /= std::sqrt(norm);
    return w;
}

// Points at least `margin` from the plane through the origin normal to w.
Set separable(test::Gen& g, const Embedding& w, std::size_t per_class, double margin) {
    const std::size_t dim = w.size();
    Set s;
    std::size_t n[2] = {0, 0};
    while (n[0] < per_class || n[1] < per_class) {
        Embedding e(dim);
        for (auto& v : e) v = g.normal(0.0, 3.0);
        double dot = 0;
        for (std::size_t d = 0; d < dim; ++d) dot += w[d] * e[d];
        if (std::abs(dot) < margin) continue;
        const int c = dot > 0;
        if (n[c] == per_class) continue;
        ++n[c];
        s.x.push_back(std::move(e));
        s.y.push_back(c ? Label::fake : Label::real);
    }
    return s;
}

double accuracy_of(const Model& m, const Set& s) {
    std::size_t ok = 0;
    for (std::size_t i = 0; i < s.x.size(); ++i) ok += predict(m, s.x[i]).label == s.y[i];
    return static_cast<double>(ok) / static_cast<double>(s.x.size());
}

}  // namespace

TEST_CASE("centroid fitting") {
    const Embedding e{0.3, -2.0};
    auto m = fit_centroids(std::vector{e, Embedding{1, 1}}, std::vector{Label::real, Label::fake});
    CHECK(m.mu_real == e);
    m = fit_centroids(std::vector<Embedding>{{1, 0}, {0, 1}, {5, 5}}, std::vector{Label::real, Label::real, Label::fake});
    CHECK(m.mu_real == Embedding{0.5, 0.5});
    CHECK_THROWS_WITH_AS(fit_centroids(std::vector<Embedding>{{1, 0}}, std::vector{Label::real}),
                         doctest::Contains("empty class"), ValidationError);
}

TEST_CASE("centroid prediction examples") {
    CentroidModel m;
    m.mu_real = {1, 0, 0};
    m.mu_fake = {0, 1, 0};
    CHECK(centroid_predict(m, m.mu_real).label == Label::real);
    CHECK(centroid_predict(m, m.mu_fake).label == Label::fake);
    const auto tie = centroid_predict(m, std::vector<double>{0, 0, 1});
    CHECK(tie.score == 0.0);
    CHECK(tie.label == Label::fake);
    CHECK_THROWS_WITH_AS(centroid_predict(m, std::vector<double>{0, 0, 0}), doctest::Contains("zero-norm"),
                         ValidationError);
    CHECK(centroid_predict(m, std::vector<double>{1, 1, 0}).score == 0.0);
    m.mu_fake = {0, 0, 0};
    CHECK(centroid_predict(m, std::vector<double>{1, 0, 0}).score == doctest::Approx(-1.0));
}

TEST_CASE("centroids separate +/-1 blobs perfectly") {
    test::Gen g(0);
    const Set train = blobs(g, 1000, 8, 1.0, 0.1);
    const Set test_set = blobs(g, 1000, 8, 1.0, 0.1);
    const Model m = fit_centroids(train.x, train.y);
    CHECK(accuracy_of(m, test_set) == 1.0);
}

TEST_CASE("property: centroid score is scale-free and negates under label swap") {
    test::Gen g(1);
    for (int i = 0; i < 50; ++i) {
        Set s = blobs(g, 5, g.size(2, 6), 0.5, 1.0);
        const auto m = fit_centroids(s.x, s.y);
        for (auto& y : s.y) y = y == Label::real ? Label::fake : Label::real;
        const auto swapped = fit_centroids(s.x, s.y);
        Embedding z(m.dim());
        for (auto& v : z) v = g.normal();
        const double score = centroid_predict(m, z).score;
        auto scaled = z;
        const double c = g.uniform(0.01, 100.0);
        for (auto& v : scaled) v *= c;
        CHECK(centroid_predict(m, scaled).score == doctest::Approx(score).epsilon(1e-12));
        CHECK(centroid_predict(swapped, z).score == -score);
        if (score != 0.0) CHECK(centroid_predict(swapped, z).label != centroid_predict(m, z).label);
    }
}

TEST_CASE("probe prediction examples") {
    auto p = LinearProbe::zeros(3);
    const auto zero = probe_predict(p, std::vector<double>{1, 2, 3});
    CHECK(zero.score == 0.0);
    CHECK(zero.label == Label::fake);
    p.bias = {0.0f, 10.0f};
    test::Gen g(2);
    for (int i = 0; i < 20; ++i)
        CHECK(probe_predict(p, std::vector<double>{g.normal(), g.normal(), g.normal()}).label == Label::fake);
    CHECK_THROWS_WITH_AS(probe_predict(p, std::vector<double>{1, 2}), doctest::Contains("dimension mismatch"),
                         ValidationError);
}

TEST_CASE("probe rejects single-class input") {
    CHECK_THROWS_WITH_AS(fit_probe(std::vector<Embedding>{{1, 0}, {0, 1}}, std::vector{Label::fake, Label::fake}),
                         doctest::Contains("degenerate single-class input"), ValidationError);
}

TEST_CASE("probe converges on a separable 2-D set") {
    test::Gen g(3);
    const Embedding w = unit_direction(g, 2);
    const Set train = separable(g, w, 200, 1.0);
    const Set held = separable(g, w, 200, 1.0);
    const Model m = fit_probe(train.x, train.y);
    CHECK(accuracy_of(m, train) >= 0.99);
    CHECK(accuracy_of(m, held) >= 0.99);
}

TEST_CASE("probe records its training metadata") {
    test::Gen g(4);
    const Set s = separable(g, unit_direction(g, 3), 20, 1.0);
    TrainingMeta meta;
    meta.epochs = 7;
    meta.seed = 42;
    const auto p = fit_probe(s.x, s.y, meta, false);
    CHECK(p.meta.epochs == 7);
    CHECK(p.meta.seed == 42);
    CHECK_FALSE(p.normalize_input);
    CHECK(p.loss_history.size() == 7);
}

TEST_CASE("full-batch probe: duplicating the data keeps the boundary direction") {
    test::Gen g(5);
    const Set s = separable(g, unit_direction(g, 4), 50, 1.0);
    Set twice = s;
    twice.x.insert(twice.x.end(), s.x.begin(), s.x.end());
    twice.y.insert(twice.y.end(), s.y.begin(), s.y.end());
    TrainingMeta meta;
    meta.batch_size = 0;
    const auto a = fit_probe(s.x, s.y, meta);
    const auto b = fit_probe(twice.x, twice.y, meta);
    std::vector<double> da(4), db(4);
    double na = 0, nb = 0;
    for (std::size_t d = 0; d < 4; ++d) {
        da[d] = double(a.weights[4 + d]) - a.weights[d];
        db[d] = double(b.weights[4 + d]) - b.weights[d];
        na += da[d] * da[d];
        nb += db[d] * db[d];
    }
    for (std::size_t d = 0; d < 4; ++d) CHECK(std::abs(da[d] / std::sqrt(na) - db[d] / std::sqrt(nb)) <= 1e-6);
}

TEST_CASE("full-batch loss is non-increasing") {
    test::Gen g(6);
    const Set s = separable(g, unit_direction(g, 8), 100, 1.0);
    TrainingMeta meta;
    meta.batch_size = 0;
    const auto p = fit_probe(s.x, s.y, meta);
    REQUIRE(p.loss_history.size() == 50);
    for (std::size_t e = 1; e < p.loss_history.size(); ++e)
        CHECK(p.loss_history[e] <= p.loss_history[e - 1] + 1e-4);
    CHECK(probe_loss(p, s.x, s.y) == doctest::Approx(p.loss_history.back()).epsilon(1e-5));
}

TEST_CASE("fit_probe is bit-reproducible") {
    test::Gen g(7);
    const Set s = separable(g, unit_direction(g, 6), 100, 1.0);
    const auto a = fit_probe(s.x, s.y);
    const auto b = fit_probe(s.x, s.y);
    CHECK(a.weights == b.weights);
    CHECK(a.bias == b.bias);
    CHECK(a.loss_history == b.loss_history);
    TrainingMeta other;
    other.seed = 1;
    CHECK(fit_probe(s.x, s.y, other).weights != a.weights);
}

TEST_CASE("model persistence round trips") {
    test::Gen g(8);
    const Set s = separable(g, unit_direction(g, 5), 30, 1.0);
    test::TempDir dir;

    SUBCASE("centroid") {
        const Model m = fit_centroids(s.x, s.y, {9, 3, 4});
        save_model(m, dir.path() / "m.json");
        const Model back = load_model(dir.path() / "m.json");
        REQUIRE(std::holds_alternative<CentroidModel>(back));
        CHECK(std::get<CentroidModel>(back).mu_fake == std::get<CentroidModel>(m).mu_fake);
        CHECK(std::get<CentroidModel>(back).k == 3);
        CHECK(model_tokens(back) == std::vector<std::size_t>{9, 3, 4});
        CHECK(model_to_json(back) == model_to_json(m));
    }
    SUBCASE("probe") {
        auto p = fit_probe(s.x, s.y);
        p.k = 2;
        p.token_indices = {1, 2};
        const Model m = p;
        const Model back = model_from_json(model_to_json(m));
        REQUIRE(std::holds_alternative<LinearProbe>(back));
        const auto& q = std::get<LinearProbe>(back);
        CHECK(q.weights == p.weights);
        CHECK(q.bias == p.bias);
        CHECK(q.meta.lr == p.meta.lr);
        CHECK(protocol_name(back) == "probe");
        for (const auto& x : s.x) CHECK(predict(back, x).score == predict(m, x).score);
        CHECK(model_to_json(back) == model_to_json(m));
    }
    SUBCASE("malformed") {
        CHECK_THROWS_AS(model_from_json(R"({"protocol":"svm"})"), ValidationError);
        CHECK_THROWS_AS(model_from_json("not json"), ValidationError);
    }
}

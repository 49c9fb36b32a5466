#include <doctest.h>

#include <cmath>
#include <numeric>

#include "gsn/gradcheck.hpp"
#include "gsn/losses.hpp"
#include "gsn/rng.hpp"

using namespace gsn;

namespace {

AttentionStack stack_from_maps(int h, int w, std::initializer_list<std::vector<double>> maps) {
    AttentionStack s(h, w, static_cast<int>(maps.size()));
    int tok = 0;
    for (const auto& m : maps) {
        for (int i = 0; i < h; ++i)
            for (int j = 0; j < w; ++j) s.at(i, j, tok) = m[static_cast<size_t>(i) * w + j];
        ++tok;
    }
    return s;
}

}  // namespace

TEST_CASE("loss kind parsing") {
    CHECK(LossKind::parse("iou").base == LossBase::IoU);
    CHECK(LossKind::parse("com").base == LossBase::NegCoM);
    CHECK(LossKind::parse("kl").base == LossBase::NegKL);
    CHECK(LossKind::parse("cc").base == LossBase::NegCC);
    CHECK(LossKind::parse("ae").base == LossBase::AttendExcite);
    CHECK(LossKind::parse("db").base == LossBase::DivideBind);
    CHECK(LossKind::parse("pd").base == LossBase::Predicated);

    const auto combined = LossKind::parse("com+int:1.5");
    CHECK(combined.base == LossBase::NegCoM);
    CHECK(combined.aux == AuxTerm::NegIntensity);
    CHECK(combined.lambda == doctest::Approx(1.5));
    CHECK(combined.to_string() == "com+int:1.5");

    const auto iou_var = LossKind::parse("iou+var:2");
    CHECK(iou_var.aux == AuxTerm::Variance);
    CHECK(iou_var.lambda == doctest::Approx(2.0));

    CHECK_THROWS_AS(LossKind::parse("bogus"), ParseError);
    CHECK_THROWS_AS(LossKind::parse("ae+int:1"), ParseError);      // combined needs an overlap base
    CHECK_THROWS_AS(LossKind::parse("com+int"), ParseError);       // missing lambda
    CHECK_THROWS_AS(LossKind::parse("com+int:0"), ParseError);     // lambda must be positive
    CHECK_THROWS_AS(LossKind::parse("com+int:x"), ParseError);
    CHECK_THROWS_AS(LossKind::parse("com+foo:1"), ParseError);
}

TEST_CASE("loss_eval closed forms") {
    SUBCASE("attend-excite reads the weakest entity's maximum") {
        const auto s = stack_from_maps(2, 2, {{0.9, 0.1, 0.2, 0.3}, {0.1, 0.4, 0.2, 0.1}});
        CHECK(loss_eval(LossKind::parse("ae"), s, {0, 1}) == doctest::Approx(0.6).epsilon(1e-12));
    }
    SUBCASE("divide-bind forward differences") {
        const auto s = stack_from_maps(2, 2, {{0.0, 1.0, 1.0, 0.0}});
        CHECK(loss_eval(LossKind::parse("db"), s, {0}) == doctest::Approx(-4.0).epsilon(1e-12));
    }
    SUBCASE("predicated closed form on a 1x2 map") {
        const auto s = stack_from_maps(1, 2, {{0.5, 0.5}});
        CHECK(loss_eval(LossKind::parse("pd"), s, {0}) == doctest::Approx(-std::log(0.75)).epsilon(1e-9));
        CHECK(loss_eval(LossKind::parse("pd"), s, {0}) == doctest::Approx(0.287682).epsilon(1e-5));
    }
    SUBCASE("predicated rejects entries >= 1") {
        const auto s = stack_from_maps(1, 2, {{1.0, 0.5}});
        CHECK_THROWS_AS(loss_eval(LossKind::parse("pd"), s, {0}), ProbabilityOverflow);
    }
    SUBCASE("overlap kinds demand two entities") {
        const auto s = stack_from_maps(2, 2, {{0.25, 0.25, 0.25, 0.25}});
        CHECK_THROWS_AS(loss_eval(LossKind::parse("iou"), s, {0}), FewerThanTwoEntities);
    }
}

TEST_CASE("combined losses") {
    const AttentionStack s = random_softmax_stack(6, 6, 2, 77);
    const std::vector<int> entities = {0, 1};

    SUBCASE("lambda 0 equals the base exactly") {
        for (const char* base : {"iou", "com", "kl", "cc"}) {
            LossKind combined = LossKind::parse(base);
            combined.aux = AuxTerm::NegIntensity;
            combined.lambda = 0.0;
            CHECK(loss_eval(combined, s, entities) == loss_eval(LossKind::parse(base), s, entities));
            combined.aux = AuxTerm::Variance;
            CHECK(loss_eval(combined, s, entities) == loss_eval(LossKind::parse(base), s, entities));
        }
    }
    SUBCASE("lambda scales the auxiliary term linearly") {
        const double base = loss_eval(LossKind::parse("iou"), s, entities);
        const double with1 = loss_eval(LossKind::parse("iou+var:1"), s, entities);
        const double with2 = loss_eval(LossKind::parse("iou+var:2"), s, entities);
        CHECK(with2 - base == doctest::Approx(2.0 * (with1 - base)).epsilon(1e-12));
    }
}

TEST_CASE("finite_diff oracle sanity") {
    SUBCASE("linear function has unit gradient") {
        const auto f = [](const std::vector<double>& x) {
            double s = 0.0;
            for (double v : x) s += v;
            return s;
        };
        const auto g = finite_diff(f, std::vector<double>(9, 0.4), 1e-6);
        for (double v : g) CHECK(v == doctest::Approx(1.0).epsilon(1e-9));
    }
    SUBCASE("quadratic recovers the point") {
        std::vector<double> x = {0.3, -1.2, 2.5};
        const auto f = [](const std::vector<double>& v) {
            double s = 0.0;
            for (double t : v) s += 0.5 * t * t;
            return s;
        };
        const auto g = finite_diff(f, x, 1e-6);
        for (size_t i = 0; i < x.size(); ++i) CHECK(g[i] == doctest::Approx(x[i]).epsilon(1e-8));
    }
    SUBCASE("h must be positive") {
        const auto f = [](const std::vector<double>&) { return 0.0; };
        CHECK_THROWS_AS(finite_diff(f, {1.0}, 0.0), ValidationError);
    }
}

TEST_CASE("attend-excite gradient is a single -1 at the weakest entity's argmax") {
    const AttentionStack s = random_softmax_stack(6, 6, 2, 5);
    const auto g = loss_grad_maps(LossKind::parse("ae"), s, {0, 1});
    int nonzero = 0;
    double value = 0.0;
    for (const auto& m : g.grads)
        for (double x : m.v)
            if (x != 0.0) {
                ++nonzero;
                value = x;
            }
    CHECK(nonzero == 1);
    CHECK(value == doctest::Approx(-1.0));
}

TEST_CASE("identical maps are stationary and antisymmetric under kl") {
    // Two identical slices: the negated-KL gradient must vanish (the loss is
    // at its maximum of 0 along the equal-maps manifold and symmetric).
    AttentionStack s(4, 4, 2);
    Xoshiro256 rng(21);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
            const double x = std::abs(rng.next_gaussian_pair().first) + 0.1;
            s.at(i, j, 0) = x;
            s.at(i, j, 1) = x;
        }
    const auto g = loss_grad_maps(LossKind::parse("kl"), s, {0, 1});
    double total = 0.0;
    for (const auto& m : g.grads)
        for (double x : m.v) total += std::abs(x);
    CHECK(total < 1e-8);

    // Antisymmetry on distinct maps: swapping the two entities negates... the
    // per-entity gradients swap roles.
    const AttentionStack r = random_softmax_stack(4, 4, 2, 6);
    const auto fwd = loss_grad_maps(LossKind::parse("kl"), r, {0, 1});
    const auto rev = loss_grad_maps(LossKind::parse("kl"), r, {1, 0});
    for (size_t k = 0; k < fwd.grads[0].v.size(); ++k) {
        CHECK(fwd.grads[0].v[k] == doctest::Approx(rev.grads[1].v[k]).epsilon(1e-12));
        CHECK(fwd.grads[1].v[k] == doctest::Approx(rev.grads[0].v[k]).epsilon(1e-12));
    }
}

TEST_CASE("permuting the entity order permutes the map gradient") {
    const AttentionStack s = random_softmax_stack(5, 5, 3, 33);
    for (const char* kind : {"iou", "com", "kl", "cc", "pd"}) {
        const auto fwd = loss_grad_maps(LossKind::parse(kind), s, {0, 1, 2});
        const auto rot = loss_grad_maps(LossKind::parse(kind), s, {2, 0, 1});
        CHECK(rot.entities == std::vector<int>{2, 0, 1});
        for (size_t k = 0; k < fwd.grads[0].v.size(); ++k) {
            CHECK(rot.grads[1].v[k] == doctest::Approx(fwd.grads[0].v[k]).epsilon(1e-12));
            CHECK(rot.grads[2].v[k] == doctest::Approx(fwd.grads[1].v[k]).epsilon(1e-12));
            CHECK(rot.grads[0].v[k] == doctest::Approx(fwd.grads[2].v[k]).epsilon(1e-12));
        }
    }
}

TEST_CASE("gradient suite over a reduced seed set") {
    // The full 50-seed suite runs in the acceptance binary; keep the unit
    // run quick but cover every kind on both stages.
    GradCheckOptions opt;
    opt.seeds = 4;
    const auto report = run_gradient_suite(canonical_loss_kinds(), opt);
    for (const auto& issue : report.issues) {
        CAPTURE(issue.kind);
        CAPTURE(issue.seed);
        CAPTURE(issue.stage);
        CAPTURE(issue.analytic);
        CAPTURE(issue.numeric);
        CHECK(false);
    }
    CHECK(report.ok());
    CHECK(report.comparisons > 0);
}

TEST_CASE("grad_latent special cases") {
    SUBCASE("identical token keys make kl constant, gradient zero") {
        std::vector<double> row = {1.0, 0.0, 0.0};
        std::vector<double> keys;
        keys.insert(keys.end(), row.begin(), row.end());
        keys.insert(keys.end(), row.begin(), row.end());
        const auto tok = TokenEmbeddings::from_rows(2, 3, keys, keys);
        Xoshiro256 rng(2);
        LatentGrid z(4, 4, 3);
        rng.fill_gaussian(z.v);
        const auto g = grad_latent(LossKind::parse("kl"), z, tok, {0, 1});
        for (double x : g.v) CHECK(x == doctest::Approx(0.0).epsilon(1e-12));
    }
    SUBCASE("descent: a small enough step strictly decreases the loss") {
        Xoshiro256 rng(3);
        for (const char* kind_name : {"iou", "com", "kl", "cc", "ae", "db", "pd"}) {
            const LossKind kind = LossKind::parse(kind_name);
            const auto tok = TokenEmbeddings::random(2, 6, 17);
            LatentGrid z(5, 5, 6);
            rng.fill_gaussian(z.v);
            const std::vector<int> entities = {0, 1};
            const auto g = grad_latent(kind, z, tok, entities);
            double norm = 0.0;
            for (double x : g.v) norm += x * x;
            norm = std::sqrt(norm);
            if (norm <= 1e-8) continue;
            const double before = loss_eval(kind, compute_attention(z, tok), entities);
            double alpha = 1.0;
            bool improved = false;
            for (int halving = 0; halving <= 20 && !improved; ++halving, alpha *= 0.5) {
                LatentGrid trial = z;
                for (size_t k = 0; k < z.v.size(); ++k) trial.v[k] = z.v[k] - alpha * g.v[k];
                improved = loss_eval(kind, compute_attention(trial, tok), entities) < before;
            }
            CAPTURE(kind_name);
            CHECK(improved);
        }
    }
}

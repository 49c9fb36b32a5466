#include <doctest.h>

#include <cmath>

#include <cstring>

#include "gsn/diffusion.hpp"
#include "gsn/trial.hpp"
#include "gsn/rng.hpp"

using namespace gsn;

TEST_CASE("build_schedule") {
    SUBCASE("near-zero beta keeps alpha_bar near one") {
        const auto s = build_schedule(1, 1e-12, 1e-12);
        CHECK(s.alpha_bar_at(1) == doctest::Approx(1.0).epsilon(1e-9));
    }
    SUBCASE("two equal betas multiply") {
        const auto s = build_schedule(2, 0.1, 0.1);
        CHECK(s.alpha_at(1) == doctest::Approx(0.9).epsilon(1e-12));
        CHECK(s.alpha_bar_at(1) == doctest::Approx(0.9).epsilon(1e-12));
        CHECK(s.alpha_bar_at(2) == doctest::Approx(0.81).epsilon(1e-12));
        CHECK(s.sigma_at(2) == doctest::Approx(std::sqrt(0.1)).epsilon(1e-12));
    }
    SUBCASE("alpha_bar is nonincreasing") {
        Xoshiro256 rng(1);
        for (int trial = 0; trial < 10; ++trial) {
            const double b0 = 1e-4 + 0.01 * rng.next_double();
            const double b1 = b0 + 0.05 * rng.next_double();
            const auto s = build_schedule(30, b0, b1);
            for (int t = 1; t < 30; ++t) CHECK(s.alpha_bar_at(t) >= s.alpha_bar_at(t + 1));
        }
    }
    SUBCASE("bad ranges throw") {
        CHECK_THROWS_AS(build_schedule(0, 0.1, 0.2), BadRange);
        CHECK_THROWS_AS(build_schedule(5, 0.0, 0.2), BadRange);
        CHECK_THROWS_AS(build_schedule(5, 0.3, 0.2), BadRange);
        CHECK_THROWS_AS(build_schedule(5, 0.3, 1.0), BadRange);
    }
}

TEST_CASE("forward_diffuse") {
    LatentGrid z0(2, 2, 2, 1.0);
    LatentGrid noise(2, 2, 2, 2.0);

    SUBCASE("alpha_bar near one returns z0") {
        const auto s = build_schedule(1, 1e-15, 1e-15);
        const auto z = forward_diffuse(z0, 1, s, noise);
        for (double x : z.v) CHECK(x == doctest::Approx(1.0).epsilon(1e-7));
    }
    SUBCASE("zero noise scales by sqrt(alpha_bar)") {
        const auto s = build_schedule(2, 0.19, 0.19);  // abar_2 = 0.81^2 = 0.6561
        const auto z = forward_diffuse(z0, 2, s, LatentGrid(2, 2, 2, 0.0));
        for (double x : z.v) CHECK(x == doctest::Approx(0.81).epsilon(1e-12));
    }
    SUBCASE("zero z0 scales noise by sqrt(1-alpha_bar)") {
        const auto s = build_schedule(1, 0.25, 0.25);  // abar = 0.75
        const auto z = forward_diffuse(LatentGrid(2, 2, 2, 0.0), 1, s, noise);
        for (double x : z.v) CHECK(x == doctest::Approx(1.0).epsilon(1e-12));  // 0.5 * 2.0
    }
}

TEST_CASE("denoiser_predict") {
    const auto sched = build_schedule(10, 1e-3, 0.02);

    SUBCASE("zero pull returns z") {
        const auto tok = TokenEmbeddings::random(2, 4, 3);
        const auto den = make_toy_denoiser(tok, 0.0, sched);
        Xoshiro256 rng(4);
        LatentGrid z(3, 3, 4);
        rng.fill_gaussian(z.v);
        const auto eps = denoiser_predict(z, 5, den);
        CHECK(eps.v == z.v);
    }
    SUBCASE("single token: attention is one, pull is the value vector") {
        const auto tok = TokenEmbeddings::from_rows(1, 3, {1, 0, 0}, {0.5, 0.25, -1.0});
        ToyDenoiser den;
        den.tok = tok;
        den.pull = [](int) { return 2.0; };
        LatentGrid z(2, 2, 3, 1.0);
        const auto eps = denoiser_predict(z, 1, den);
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) {
                CHECK(eps.at(i, j, 0) == doctest::Approx(1.0 - 2.0 * 0.5).epsilon(1e-12));
                CHECK(eps.at(i, j, 1) == doctest::Approx(1.0 - 2.0 * 0.25).epsilon(1e-12));
                CHECK(eps.at(i, j, 2) == doctest::Approx(1.0 + 2.0).epsilon(1e-12));
            }
    }
}

TEST_CASE("denoiser_predict golden regression at the default config") {
    // Seed-7 prediction fingerprint, frozen from the first verified run;
    // pins the PRNG layout, token construction and pull arithmetic.
    ExperimentConfig cfg;
    const auto sched = build_schedule(cfg.steps, cfg.beta_start, cfg.beta_end);
    const auto den = make_toy_denoiser(experiment_tokens(cfg), cfg.pull, sched);
    Xoshiro256 rng(7);
    LatentGrid z(cfg.h, cfg.w, cfg.d);
    rng.fill_gaussian(z.v);
    const auto eps = denoiser_predict(z, 25, den);
    uint64_t hash = 1469598103934665603ULL;
    for (double x : eps.v) {
        uint64_t bits;
        std::memcpy(&bits, &x, 8);
        for (int i = 0; i < 8; ++i) {
            hash ^= (bits >> (8 * i)) & 0xFF;
            hash *= 1099511628211ULL;
        }
    }
    CHECK(hash == 4620823227317217974ULL);
}

TEST_CASE("reverse_step") {
    SUBCASE("alpha near 1 with eps_hat = 0 leaves z almost unchanged") {
        const auto s = build_schedule(2, 1e-12, 1e-12);
        const auto tok = TokenEmbeddings::from_rows(1, 3, {1, 0, 0}, {0, 0, 0});
        ToyDenoiser den;
        den.tok = tok;
        den.pull = [](int) { return 1.0; };  // single token, zero value: eps_hat = z - 0... pull*1*0 = 0
        // With the all-zero value vector the pull term vanishes, so
        // eps_hat = z; with beta ~ 1e-12 the update coefficient is ~1.
        Xoshiro256 rng(11);
        LatentGrid z(2, 2, 3);
        rng.fill_gaussian(z.v);
        const auto out = reverse_step(z, 2, s, den, LatentGrid(2, 2, 3, 0.0));
        for (size_t k = 0; k < z.v.size(); ++k) CHECK(out.v[k] == doctest::Approx(z.v[k]).epsilon(1e-5));
    }
    SUBCASE("coefficient closed form when eps_hat == z") {
        // alpha = 0.96, abar = 0.36 -> z * (1 - 0.05)/sqrt(0.96).
        NoiseSchedule s;
        s.steps = 1;
        s.alpha = {0.96};
        s.alpha_bar = {0.36};
        s.sigma = {std::sqrt(1.0 - 0.96)};
        const auto tok = TokenEmbeddings::random(2, 3, 6);
        ToyDenoiser den;
        den.tok = tok;
        den.pull = [](int) { return 0.0; };  // eps_hat = z
        Xoshiro256 rng(7);
        LatentGrid z(2, 2, 3);
        rng.fill_gaussian(z.v);
        const auto out = reverse_step(z, 1, s, den, LatentGrid(2, 2, 3, 0.0));
        const double coef = (1.0 - 0.05) / std::sqrt(0.96);
        for (size_t k = 0; k < z.v.size(); ++k) CHECK(out.v[k] == doctest::Approx(coef * z.v[k]).epsilon(1e-12));
    }
    SUBCASE("linear in z when the denoiser is linear") {
        const auto sched = build_schedule(5, 1e-3, 0.02);
        const auto tok = TokenEmbeddings::random(2, 3, 8);
        const auto den = make_toy_denoiser(tok, 1.7, sched);
        // The toy denoiser itself is nonlinear through attention; linearity
        // holds when eps_hat is fixed, so compare with pull = 0.
        ToyDenoiser frozen;
        frozen.tok = tok;
        frozen.pull = [](int) { return 0.0; };
        Xoshiro256 rng(9);
        LatentGrid z(2, 2, 3);
        rng.fill_gaussian(z.v);
        LatentGrid z2 = z;
        for (double& x : z2.v) x *= 3.0;
        const auto a = reverse_step(z, 3, sched, frozen, LatentGrid(2, 2, 3, 0.0));
        const auto b = reverse_step(z2, 3, sched, frozen, LatentGrid(2, 2, 3, 0.0));
        for (size_t k = 0; k < a.v.size(); ++k) CHECK(b.v[k] == doctest::Approx(3.0 * a.v[k]).epsilon(1e-12));
    }
    SUBCASE("degenerate schedule throws") {
        NoiseSchedule s;
        s.steps = 1;
        s.alpha = {1.0};
        s.alpha_bar = {1.0};
        s.sigma = {0.0};
        const auto tok = TokenEmbeddings::random(2, 3, 10);
        ToyDenoiser den;
        den.tok = tok;
        den.pull = [](int) { return 0.0; };
        CHECK_THROWS_AS(reverse_step(LatentGrid(2, 2, 3, 1.0), 1, s, den, LatentGrid(2, 2, 3, 0.0)),
                        DegenerateSchedule);
    }
}

TEST_CASE("forward/reverse algebraic consistency") {
    // Diffuse z0 to step t, reverse once with eps_hat equal to the true
    // noise and no fresh noise; subtracting the known epsilon coefficient
    // must leave sqrt(abar_{t-1}) * z0, to 1e-9.
    const auto sched = build_schedule(20, 1e-4, 0.02);
    for (uint64_t seed = 0; seed < 20; ++seed) {
        Xoshiro256 rng(seed);
        LatentGrid z0(4, 4, 2);
        rng.fill_gaussian(z0.v);
        LatentGrid eps(4, 4, 2);
        rng.fill_gaussian(eps.v);
        const int t = 2 + static_cast<int>(rng.next_u64() % 19);  // in [2, 20]

        const auto zt = forward_diffuse(z0, t, sched, eps);

        // A denoiser that reports exactly the injected noise.
        ToyDenoiser oracle;
        oracle.tok = TokenEmbeddings::random(2, 2, 1);
        oracle.pull = [](int) { return 0.0; };
        // reverse_step computes eps_hat from its denoiser, so apply the
        // update by hand with eps_hat = eps and sigma = 0.
        const double alpha = sched.alpha_at(t);
        const double abar = sched.alpha_bar_at(t);
        const double abar_prev = sched.alpha_bar_at(t - 1);
        LatentGrid z_prev(4, 4, 2);
        for (size_t k = 0; k < zt.v.size(); ++k)
            z_prev.v[k] = (zt.v[k] - (1.0 - alpha) / std::sqrt(1.0 - abar) * eps.v[k]) / std::sqrt(alpha);

        const double eps_coef = std::sqrt(alpha) * (1.0 - abar_prev) / std::sqrt(1.0 - abar);
        for (size_t k = 0; k < zt.v.size(); ++k) {
            const double recovered = z_prev.v[k] - eps_coef * eps.v[k];
            CHECK(recovered == doctest::Approx(std::sqrt(abar_prev) * z0.v[k]).epsilon(1e-9));
        }
    }
}

TEST_CASE("formation_success") {
    SUBCASE("connected 8-cell block with high attention forms") {
        AttentionStack s(4, 4, 2);
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) {
                const bool block = i < 2;  // rows 0-1: entity 0's block (8 cells)
                s.at(i, j, 0) = block ? 0.8 : 0.2;
                s.at(i, j, 1) = block ? 0.2 : 0.8;
            }
        const auto formed = formation_success(s, {0, 1}, 0.05, 0.5);
        CHECK(formed[0]);
        CHECK(formed[1]);
    }
    SUBCASE("entity that is never the argmax does not form") {
        AttentionStack s(4, 4, 2);
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) {
                s.at(i, j, 0) = 0.7;
                s.at(i, j, 1) = 0.3;
            }
        const auto formed = formation_success(s, {0, 1}, 0.05, 0.5);
        CHECK(formed[0]);
        CHECK_FALSE(formed[1]);
    }
    SUBCASE("full-grid single entity forms for any thresholds") {
        AttentionStack s(3, 3, 1, 1.0);
        CHECK(formation_success(s, {0}, 1.0, 0.99)[0]);
    }
    SUBCASE("component size threshold is binding") {
        // Two disconnected 2-cell blobs of entity 0 on a 4x4 grid; with
        // s_min = 0.2 (ceil -> 4 cells) neither blob is large enough.
        AttentionStack s(4, 4, 2);
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) {
                s.at(i, j, 0) = 0.1;
                s.at(i, j, 1) = 0.9;
            }
        for (auto [i, j] : {std::pair{0, 0}, std::pair{0, 1}, std::pair{3, 2}, std::pair{3, 3}}) {
            s.at(i, j, 0) = 0.9;
            s.at(i, j, 1) = 0.1;
        }
        const auto strict = formation_success(s, {0}, 0.2, 0.5);
        CHECK_FALSE(strict[0]);
        const auto loose = formation_success(s, {0}, 0.1, 0.5);  // 2 cells suffice
        CHECK(loose[0]);
    }
    SUBCASE("mean attention threshold is binding") {
        AttentionStack s(2, 2, 2);
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) {
                s.at(i, j, 0) = 0.55;
                s.at(i, j, 1) = 0.45;
            }
        CHECK(formation_success(s, {0}, 0.5, 0.5)[0]);
        CHECK_FALSE(formation_success(s, {0}, 0.5, 0.6)[0]);
    }
    SUBCASE("parameter validation") {
        AttentionStack s(2, 2, 1, 1.0);
        CHECK_THROWS_AS(formation_success(s, {0}, 0.0, 0.5), BadRange);
        CHECK_THROWS_AS(formation_success(s, {0}, 0.5, 1.0), BadRange);
    }
}
